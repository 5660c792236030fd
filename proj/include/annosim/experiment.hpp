#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "annosim/cartography.hpp"
#include "annosim/data.hpp"
#include "annosim/model.hpp"
#include "annosim/targets.hpp"
#include "annosim/vinfo.hpp"

namespace annosim {

// Full sweep protocol configuration. Everything stochastic derives from
// base_seed; split.seed and features.hash_seed are filled in from it unless
// the config sets them explicitly.
struct ExperimentConfig {
    std::filesystem::path dataset_path;
    std::string name = "sweep";
    std::vector<int> ks;
    int replicates = 10;
    std::uint64_t base_seed = 1;
    SplitSpec split;
    bool split_seed_explicit = false;
    FeatureConfig features;
    bool hash_seed_explicit = false;
    TrainConfig train;
    // The null model is bias-only and cheap, so it gets a longer full-batch
    // schedule by default to sit near the entropy optimum.
    TrainConfig null_train{.learning_rate = 0.05, .epochs = 400, .batch_size = 1 << 30};
    std::vector<EvalMode> eval_modes{EvalMode::ml, EvalMode::ld};
    RegionRule region_rule;
    // Cartography maps are kept (and transitions computed) for these ks;
    // empty means "derive up to 8 milestones spanning ks".
    std::vector<int> transition_ks;
    std::filesystem::path output_dir = "out";
    bool emit_dynamics = false;
    int jobs = 0;  // 0 = hardware concurrency

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig from_file(const std::filesystem::path& path);

    // Semantic fields only: output_dir and jobs are excluded so the echo is
    // byte-stable across output locations and parallelism levels.
    nlohmann::json to_json() const;

    void validate_against(const Dataset& ds) const;
    std::vector<int> milestones() const;
    bool mode_enabled(EvalMode mode) const;
};

// One trained mode ("ml" or "ld") inside one (k, replicate) cell.
struct ModeCellResult {
    double accuracy = 0.0;
    double dev_accuracy = 0.0;
    std::optional<double> abs_gt_accuracy;
    double final_loss = 0.0;
    std::size_t train_tie_count = 0;
    std::size_t eval_tie_count = 0;
    double h_y = 0.0;
    double h_y_given_x = 0.0;
    double v_information = 0.0;
    int vinfo_clamped = 0;
    bool vinfo_negative = false;
    std::optional<CartographyMap> map;  // milestone ks only
};

struct CellResult {
    int k = 0;
    int replicate = 0;
    std::map<std::string, ModeCellResult> modes;

    nlohmann::json to_json() const;
    static CellResult from_json(const nlohmann::json& j);
};

struct KStat {
    int k = 0;
    int n = 0;
    double mean = 0.0;
    double stddev = 0.0;  // population
    double min = 0.0;
    double max = 0.0;
};

struct VInfoKStat {
    int k = 0;
    int n = 0;
    double mean_v_information = 0.0;
    double stddev_v_information = 0.0;
    double mean_h_y = 0.0;
    double mean_h_y_given_x = 0.0;
    int negative_count = 0;
};

struct ModeSummary {
    std::vector<KStat> accuracy_per_k;
    double min_accuracy = 0.0;
    int argmin_k = 0;
    double max_accuracy = 0.0;
    int argmax_k = 0;
    double gain = 0.0;
    std::vector<VInfoKStat> vinfo_per_k;  // trained modes only
};

// Region movement between two milestone ks, aggregated over replicates.
struct TransitionSummary {
    int from_k = 0;
    int to_k = 0;
    // mean over replicates that had movers, of per-replicate proportions
    std::array<std::array<double, 3>, 3> mean_proportions{};
    std::array<std::array<std::int64_t, 3>, 3> total_counts{};
    int replicates_with_movers = 0;
    int replicates_without_movers = 0;
};

struct SweepReport {
    std::string name;
    std::string dataset_name;
    std::vector<int> ks;
    int replicates = 0;
    std::uint64_t base_seed = 0;
    std::vector<int> milestone_ks;
    // keys: "ml", "ld" for trained modes; "ml_abs_gt", "ld_abs_gt" when
    // absolute-ground-truth evaluation is enabled
    std::map<std::string, ModeSummary> modes;
    std::map<std::string, std::vector<TransitionSummary>> transitions;  // per trained mode

    nlohmann::json to_json() const;
    std::string format_table() const;  // min/max accuracy table, one block per mode
};

// Executes replicates x |ks| cells (simulate, train, evaluate, v-info,
// cartography), persisting one JSON artifact per cell under
// output_dir/cells/ as it goes, then aggregates. With resume = true,
// existing cell artifacts are loaded instead of recomputed. Deterministic:
// the same config yields byte-identical artifacts at any worker count.
SweepReport run_sweep(const ExperimentConfig& cfg, bool resume = false);
SweepReport run_sweep(const ExperimentConfig& cfg, const Dataset& ds, bool resume = false);

// Pure aggregation of completed cells into the report.
SweepReport summarize(const ExperimentConfig& cfg, const std::string& dataset_name,
                      const std::vector<CellResult>& cells);

// Re-aggregates a finished (or partially finished) output directory and
// rewrites report.json plus the plot CSVs. Only needs the cell artifacts
// and the config echo, not the dataset itself.
SweepReport summarize_directory(const ExperimentConfig& cfg, const std::string& dataset_name);

std::string cell_file_name(int k, int replicate);

}  // namespace annosim
