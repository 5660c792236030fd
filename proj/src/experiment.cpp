#include "annosim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <set>
#include <thread>

#include "annosim/error.hpp"
#include "annosim/io.hpp"
#include "annosim/rng.hpp"
#include "annosim/simulate.hpp"

namespace annosim {

using nlohmann::json;

namespace {

EvalMode parse_eval_mode(const std::string& s) {
    if (s == "ml") return EvalMode::ml;
    if (s == "ld") return EvalMode::ld;
    if (s == "absolute_gt") return EvalMode::absolute_gt;
    throw ValidationError("unknown eval mode: " + s + " (expected ml, ld, absolute_gt)");
}

TrainConfig parse_train_config(const json& j, TrainConfig base) {
    base.learning_rate = j.value("learning_rate", base.learning_rate);
    base.weight_decay = j.value("weight_decay", base.weight_decay);
    base.epochs = j.value("epochs", base.epochs);
    base.batch_size = j.value("batch_size", base.batch_size);
    base.seed = j.value("seed", base.seed);
    base.adam_beta1 = j.value("adam_beta1", base.adam_beta1);
    base.adam_beta2 = j.value("adam_beta2", base.adam_beta2);
    base.adam_epsilon = j.value("adam_epsilon", base.adam_epsilon);
    return base;
}

json train_config_json(const TrainConfig& c) {
    return json{{"learning_rate", c.learning_rate}, {"weight_decay", c.weight_decay},
                {"epochs", c.epochs},               {"batch_size", c.batch_size},
                {"seed", c.seed},                   {"adam_beta1", c.adam_beta1},
                {"adam_beta2", c.adam_beta2},       {"adam_epsilon", c.adam_epsilon}};
}

std::vector<int> normalize_ks(std::vector<int> ks) {
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    return ks;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    ExperimentConfig cfg;
    if (j.contains("dataset")) cfg.dataset_path = j.at("dataset").get<std::string>();
    cfg.name = j.value("name", cfg.name);

    if (j.contains("ks")) {
        cfg.ks = j.at("ks").get<std::vector<int>>();
    } else if (j.contains("k_range")) {
        const json& r = j.at("k_range");
        const int from = r.at("from").get<int>();
        const int to = r.at("to").get<int>();
        const int step = r.value("step", 1);
        if (step < 1 || to < from) throw ValidationError("bad k_range");
        for (int k = from; k <= to; k += step) cfg.ks.push_back(k);
    }
    cfg.ks = normalize_ks(cfg.ks);

    cfg.replicates = j.value("replicates", cfg.replicates);
    cfg.base_seed = j.value("base_seed", cfg.base_seed);

    if (j.contains("split")) {
        const json& s = j.at("split");
        cfg.split.train_fraction = s.value("train", cfg.split.train_fraction);
        cfg.split.dev_fraction = s.value("dev", cfg.split.dev_fraction);
        cfg.split.test_fraction = s.value("test", cfg.split.test_fraction);
        if (s.contains("seed")) {
            cfg.split.seed = s.at("seed").get<std::uint64_t>();
            cfg.split_seed_explicit = true;
        }
    }

    if (j.contains("features")) {
        const json& f = j.at("features");
        const std::string source = f.value("source", std::string("provided_vectors"));
        if (source == "provided_vectors") cfg.features.source = FeatureSource::provided_vectors;
        else if (source == "hashed_bow") cfg.features.source = FeatureSource::hashed_bow;
        else throw ValidationError("unknown feature source: " + source);
        cfg.features.dimension = f.value("dimension", cfg.features.dimension);
        cfg.features.lowercase = f.value("lowercase", cfg.features.lowercase);
        if (f.contains("hash_seed")) {
            cfg.features.hash_seed = f.at("hash_seed").get<std::uint64_t>();
            cfg.hash_seed_explicit = true;
        }
    }

    if (j.contains("train")) cfg.train = parse_train_config(j.at("train"), cfg.train);
    if (j.contains("null_train")) cfg.null_train = parse_train_config(j.at("null_train"), cfg.null_train);

    if (j.contains("eval_modes")) {
        cfg.eval_modes.clear();
        for (const auto& m : j.at("eval_modes")) cfg.eval_modes.push_back(parse_eval_mode(m.get<std::string>()));
    }

    if (j.contains("region_rule")) {
        const json& r = j.at("region_rule");
        const std::string mode = r.value("mode", std::string("absolute"));
        if (mode == "absolute") cfg.region_rule.mode = RegionRule::Mode::absolute;
        else if (mode == "percentile") cfg.region_rule.mode = RegionRule::Mode::percentile;
        else throw ValidationError("unknown region rule mode: " + mode);
        cfg.region_rule.tau_variability = r.value("tau_variability", cfg.region_rule.tau_variability);
        cfg.region_rule.tau_confidence = r.value("tau_confidence", cfg.region_rule.tau_confidence);
    }

    if (j.contains("transition_ks")) cfg.transition_ks = normalize_ks(j.at("transition_ks").get<std::vector<int>>());
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    cfg.emit_dynamics = j.value("emit_dynamics", cfg.emit_dynamics);
    cfg.jobs = j.value("jobs", cfg.jobs);
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw ValidationError("config file " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

json ExperimentConfig::to_json() const {
    json modes = json::array();
    for (EvalMode m : eval_modes) modes.push_back(eval_mode_name(m));
    return json{
        {"dataset", dataset_path.string()},
        {"name", name},
        {"ks", ks},
        {"replicates", replicates},
        {"base_seed", base_seed},
        {"split",
         {{"train", split.train_fraction},
          {"dev", split.dev_fraction},
          {"test", split.test_fraction},
          {"seed", split.seed}}},
        {"features",
         {{"source", features.source == FeatureSource::provided_vectors ? "provided_vectors" : "hashed_bow"},
          {"dimension", features.dimension},
          {"hash_seed", features.hash_seed},
          {"lowercase", features.lowercase}}},
        {"train", train_config_json(train)},
        {"null_train", train_config_json(null_train)},
        {"eval_modes", modes},
        {"region_rule",
         {{"mode", region_rule.mode == RegionRule::Mode::absolute ? "absolute" : "percentile"},
          {"tau_variability", region_rule.tau_variability},
          {"tau_confidence", region_rule.tau_confidence}}},
        {"transition_ks", milestones()},
        {"emit_dynamics", emit_dynamics}};
}

bool ExperimentConfig::mode_enabled(EvalMode mode) const {
    return std::find(eval_modes.begin(), eval_modes.end(), mode) != eval_modes.end();
}

void ExperimentConfig::validate_against(const Dataset& ds) const {
    if (ks.empty()) throw ValidationError("config: ks must not be empty");
    for (int k : ks) {
        if (k < 1 || k > ds.annotator_count) {
            throw ValidationError("config: k=" + std::to_string(k) + " outside [1, M=" +
                                  std::to_string(ds.annotator_count) + "]");
        }
    }
    if (replicates < 1) throw ValidationError("config: replicates must be >= 1");
    split.validate();
    train.validate();
    null_train.validate();
    if (!mode_enabled(EvalMode::ml) && !mode_enabled(EvalMode::ld)) {
        throw ValidationError("config: eval_modes needs ml or ld (absolute_gt is evaluation-only)");
    }
    for (int k : transition_ks) {
        if (std::find(ks.begin(), ks.end(), k) == ks.end()) {
            throw ValidationError("config: transition k=" + std::to_string(k) + " is not in ks");
        }
    }
    if (train.epochs < 2) throw ValidationError("config: cartography needs train.epochs >= 2");
}

std::vector<int> ExperimentConfig::milestones() const {
    if (!transition_ks.empty()) return transition_ks;
    if (ks.size() <= 8) return ks;
    std::vector<int> out;
    for (int i = 0; i < 8; ++i) {
        const auto idx = static_cast<std::size_t>(
            std::llround(static_cast<double>(i) * static_cast<double>(ks.size() - 1) / 7.0));
        out.push_back(ks[idx]);
    }
    return normalize_ks(out);
}

// ---------------------------------------------------------------------------
// Cell serialization
// ---------------------------------------------------------------------------

namespace {

json map_to_json(const CartographyMap& map) {
    json regions = json::array();
    for (Region r : map.region) regions.push_back(region_letter(r));
    return json{{"ids", map.ids},
                {"confidence", map.confidence},
                {"variability", map.variability},
                {"region", regions},
                {"k", map.k},
                {"replicate", map.replicate_index}};
}

CartographyMap map_from_json(const json& j) {
    CartographyMap map;
    map.ids = j.at("ids").get<std::vector<std::string>>();
    map.confidence = j.at("confidence").get<std::vector<double>>();
    map.variability = j.at("variability").get<std::vector<double>>();
    for (const auto& r : j.at("region")) map.region.push_back(region_from_letter(r.get<std::string>()));
    map.k = j.at("k").get<int>();
    map.replicate_index = j.at("replicate").get<int>();
    if (map.confidence.size() != map.region.size() || map.confidence.size() != map.variability.size()) {
        throw ValidationError("cell artifact: inconsistent map arrays");
    }
    return map;
}

}  // namespace

json CellResult::to_json() const {
    json modes_json = json::object();
    for (const auto& [mode, m] : modes) {
        json mj{{"accuracy", m.accuracy},
                {"dev_accuracy", m.dev_accuracy},
                {"final_loss", m.final_loss},
                {"train_tie_count", m.train_tie_count},
                {"eval_tie_count", m.eval_tie_count},
                {"vinfo",
                 {{"h_y", m.h_y},
                  {"h_y_given_x", m.h_y_given_x},
                  {"v_information", m.v_information},
                  {"clamped", m.vinfo_clamped},
                  {"negative", m.vinfo_negative}}}};
        if (m.abs_gt_accuracy) mj["abs_gt_accuracy"] = *m.abs_gt_accuracy;
        if (m.map) mj["map"] = map_to_json(*m.map);
        modes_json[mode] = std::move(mj);
    }
    return json{{"k", k}, {"replicate", replicate}, {"modes", modes_json}};
}

CellResult CellResult::from_json(const json& j) {
    CellResult cell;
    cell.k = j.at("k").get<int>();
    cell.replicate = j.at("replicate").get<int>();
    for (const auto& [mode, mj] : j.at("modes").items()) {
        ModeCellResult m;
        m.accuracy = mj.at("accuracy").get<double>();
        m.dev_accuracy = mj.at("dev_accuracy").get<double>();
        m.final_loss = mj.at("final_loss").get<double>();
        m.train_tie_count = mj.at("train_tie_count").get<std::size_t>();
        m.eval_tie_count = mj.at("eval_tie_count").get<std::size_t>();
        const json& v = mj.at("vinfo");
        m.h_y = v.at("h_y").get<double>();
        m.h_y_given_x = v.at("h_y_given_x").get<double>();
        m.v_information = v.at("v_information").get<double>();
        m.vinfo_clamped = v.at("clamped").get<int>();
        m.vinfo_negative = v.at("negative").get<bool>();
        if (mj.contains("abs_gt_accuracy")) m.abs_gt_accuracy = mj.at("abs_gt_accuracy").get<double>();
        if (mj.contains("map")) m.map = map_from_json(mj.at("map"));
        cell.modes[mode] = std::move(m);
    }
    return cell;
}

std::string cell_file_name(int k, int replicate) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "k%04d_r%03d.json", k, replicate);
    return buf;
}

// ---------------------------------------------------------------------------
// Cell execution
// ---------------------------------------------------------------------------

namespace {

struct Context {
    explicit Context(const ExperimentConfig& c) : cfg(c) {}

    const ExperimentConfig& cfg;
    Dataset train_ds, dev_ds, test_ds;
    Matrix train_x, dev_x, test_x;
    EvalTargets abs_gt;  // from test split; only valid when absolute_gt enabled
    std::set<int> milestone_set;
    int num_classes = 0;
};

CellResult compute_cell(const Context& ctx, int k, int replicate) {
    const ExperimentConfig& cfg = ctx.cfg;
    CellResult cell;
    cell.k = k;
    cell.replicate = replicate;

    const AnnotatorSubset train_sub = build_subset(ctx.train_ds, k, cfg.base_seed, replicate);
    const AnnotatorSubset dev_sub = build_subset(ctx.dev_ds, k, cfg.base_seed, replicate);
    const AnnotatorSubset test_sub = build_subset(ctx.test_ds, k, cfg.base_seed, replicate);

    for (TargetMode mode : {TargetMode::ml, TargetMode::ld}) {
        const EvalMode eval_mode = mode == TargetMode::ml ? EvalMode::ml : EvalMode::ld;
        if (!cfg.mode_enabled(eval_mode)) continue;
        const std::string mode_name = target_mode_name(mode);
        const std::uint64_t mode_tag = fnv1a64(mode_name);

        const TrainTargets train_targets = make_train_targets(train_sub, ctx.num_classes, mode);

        TrainConfig tc = cfg.train;
        tc.seed = stream_seed({seed_tag::train, cfg.base_seed, static_cast<std::uint64_t>(k),
                               static_cast<std::uint64_t>(replicate), mode_tag});
        const FitResult fitted = fit(ctx.train_x, train_targets, tc, &train_targets.gold);

        TrainConfig nc = cfg.null_train;
        nc.seed = stream_seed({seed_tag::null_train, cfg.base_seed, static_cast<std::uint64_t>(k),
                               static_cast<std::uint64_t>(replicate), mode_tag});
        const ModelState null_model = fit_null(train_targets, nc);

        const EvalTargets test_targets = make_eval_targets(test_sub, ctx.num_classes, eval_mode);
        const EvalTargets dev_targets = make_eval_targets(dev_sub, ctx.num_classes, eval_mode);
        const Matrix test_preds = predict_proba(fitted.model, ctx.test_x);
        const Matrix dev_preds = predict_proba(fitted.model, ctx.dev_x);

        ModeCellResult m;
        m.final_loss = fitted.model.final_loss;
        m.train_tie_count = train_targets.tie_count;
        m.eval_tie_count = test_targets.tie_count;
        if (mode == TargetMode::ml) {
            m.accuracy = accuracy_ml(test_preds, test_targets);
            m.dev_accuracy = accuracy_ml(dev_preds, dev_targets);
            if (cfg.mode_enabled(EvalMode::absolute_gt)) {
                m.abs_gt_accuracy = accuracy_ml(test_preds, ctx.abs_gt);
            }
        } else {
            m.accuracy = accuracy_ld(test_preds, test_targets);
            m.dev_accuracy = accuracy_ld(dev_preds, dev_targets);
            if (cfg.mode_enabled(EvalMode::absolute_gt)) {
                m.abs_gt_accuracy = accuracy_ld(test_preds, ctx.abs_gt);
            }
        }

        const GoldSource source =
            mode == TargetMode::ml ? GoldSource::ml_majority : GoldSource::ld_argmax;
        const VInfoReport vr = compute_vinfo(fitted.model, null_model, ctx.test_x,
                                             test_targets.gold, source, "test");
        m.h_y = vr.h_y;
        m.h_y_given_x = vr.h_y_given_x;
        m.v_information = vr.v_information;
        m.vinfo_clamped = vr.clamped;
        m.vinfo_negative = vr.negative;

        if (ctx.milestone_set.count(k) != 0) {
            m.map = compute_map(*fitted.dynamics, cfg.region_rule, train_sub.ids, k, replicate);
        }
        if (cfg.emit_dynamics) {
            char name[48];
            std::snprintf(name, sizeof name, "k%04d_r%03d_%s_dynamics.csv", k, replicate,
                          mode_name.c_str());
            write_dynamics_csv(cfg.output_dir / "cells" / name, train_sub.ids, *fitted.dynamics);
        }

        cell.modes[mode_name] = std::move(m);
    }
    return cell;
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

struct Stats {
    int n = 0;
    double mean = 0.0, stddev = 0.0, min = 0.0, max = 0.0;
};

Stats compute_stats(const std::vector<double>& values) {
    Stats s;
    s.n = static_cast<int>(values.size());
    if (values.empty()) return s;
    double sum = 0.0;
    s.min = values.front();
    s.max = values.front();
    for (double v : values) {
        sum += v;
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
    }
    s.mean = sum / static_cast<double>(s.n);
    double var = 0.0;
    for (double v : values) {
        const double d = v - s.mean;
        var += d * d;
    }
    s.stddev = std::sqrt(var / static_cast<double>(s.n));  // population
    return s;
}

// Accuracy curve extrema over per-k means; ties resolve toward smaller k.
void fill_extrema(ModeSummary& summary) {
    bool first = true;
    for (const KStat& ks : summary.accuracy_per_k) {
        if (first || ks.mean < summary.min_accuracy) {
            summary.min_accuracy = ks.mean;
            summary.argmin_k = ks.k;
        }
        if (first || ks.mean > summary.max_accuracy) {
            summary.max_accuracy = ks.mean;
            summary.argmax_k = ks.k;
        }
        first = false;
    }
    summary.gain = summary.max_accuracy - summary.min_accuracy;
}

}  // namespace

SweepReport summarize(const ExperimentConfig& cfg, const std::string& dataset_name,
                      const std::vector<CellResult>& cells) {
    SweepReport report;
    report.name = cfg.name;
    report.dataset_name = dataset_name;
    report.ks = cfg.ks;
    report.replicates = cfg.replicates;
    report.base_seed = cfg.base_seed;
    report.milestone_ks = cfg.milestones();

    // (k, replicate) -> cell, and membership checks
    std::map<std::pair<int, int>, const CellResult*> by_key;
    for (const CellResult& cell : cells) by_key[{cell.k, cell.replicate}] = &cell;
    for (int k : cfg.ks) {
        bool any = false;
        for (int r = 0; r < cfg.replicates; ++r) any |= by_key.count({k, r}) != 0;
        if (!any) throw ValidationError("summarize: no completed cell for k=" + std::to_string(k));
    }

    std::vector<std::string> trained_modes;
    if (cfg.mode_enabled(EvalMode::ml)) trained_modes.push_back("ml");
    if (cfg.mode_enabled(EvalMode::ld)) trained_modes.push_back("ld");

    for (const std::string& mode : trained_modes) {
        ModeSummary summary;
        ModeSummary abs_summary;
        bool have_abs = false;
        for (int k : cfg.ks) {
            std::vector<double> accs, abs_accs, vis, hys, hyxs;
            int negatives = 0;
            for (int r = 0; r < cfg.replicates; ++r) {
                const auto it = by_key.find({k, r});
                if (it == by_key.end()) continue;
                const auto mit = it->second->modes.find(mode);
                if (mit == it->second->modes.end()) {
                    throw ValidationError("summarize: cell k=" + std::to_string(k) + " r=" +
                                          std::to_string(r) + " lacks mode " + mode);
                }
                const ModeCellResult& m = mit->second;
                accs.push_back(m.accuracy);
                vis.push_back(m.v_information);
                hys.push_back(m.h_y);
                hyxs.push_back(m.h_y_given_x);
                if (m.vinfo_negative) ++negatives;
                if (m.abs_gt_accuracy) {
                    abs_accs.push_back(*m.abs_gt_accuracy);
                    have_abs = true;
                }
            }
            const Stats acc_stats = compute_stats(accs);
            summary.accuracy_per_k.push_back(
                {k, acc_stats.n, acc_stats.mean, acc_stats.stddev, acc_stats.min, acc_stats.max});
            const Stats vi_stats = compute_stats(vis);
            const Stats hy_stats = compute_stats(hys);
            const Stats hyx_stats = compute_stats(hyxs);
            summary.vinfo_per_k.push_back({k, vi_stats.n, vi_stats.mean, vi_stats.stddev,
                                           hy_stats.mean, hyx_stats.mean, negatives});
            if (!abs_accs.empty()) {
                const Stats abs_stats = compute_stats(abs_accs);
                abs_summary.accuracy_per_k.push_back(
                    {k, abs_stats.n, abs_stats.mean, abs_stats.stddev, abs_stats.min, abs_stats.max});
            }
        }
        fill_extrema(summary);
        report.modes[mode] = std::move(summary);
        if (have_abs) {
            fill_extrema(abs_summary);
            report.modes[mode + "_abs_gt"] = std::move(abs_summary);
        }
    }

    // Transitions between consecutive milestones, within each replicate.
    const std::vector<int> milestones = report.milestone_ks;
    for (const std::string& mode : trained_modes) {
        std::vector<TransitionSummary> per_pair;
        for (std::size_t i = 0; i + 1 < milestones.size(); ++i) {
            TransitionSummary ts;
            ts.from_k = milestones[i];
            ts.to_k = milestones[i + 1];
            std::array<std::array<double, 3>, 3> prop_sums{};
            for (int r = 0; r < cfg.replicates; ++r) {
                const auto a_it = by_key.find({ts.from_k, r});
                const auto b_it = by_key.find({ts.to_k, r});
                if (a_it == by_key.end() || b_it == by_key.end()) continue;
                const auto& a_mode = a_it->second->modes.at(mode);
                const auto& b_mode = b_it->second->modes.at(mode);
                if (!a_mode.map || !b_mode.map) {
                    throw ValidationError("summarize: missing cartography map at milestone k=" +
                                          std::to_string(ts.from_k) + " or k=" + std::to_string(ts.to_k));
                }
                const TransitionReport tr = transitions(*a_mode.map, *b_mode.map);
                for (std::size_t from = 0; from < 3; ++from) {
                    for (std::size_t to = 0; to < 3; ++to) {
                        ts.total_counts[from][to] += tr.counts[from][to];
                    }
                }
                if (tr.no_transitions) {
                    ++ts.replicates_without_movers;
                } else {
                    ++ts.replicates_with_movers;
                    for (std::size_t from = 0; from < 3; ++from) {
                        for (std::size_t to = 0; to < 3; ++to) {
                            prop_sums[from][to] += tr.proportions[from][to];
                        }
                    }
                }
            }
            if (ts.replicates_with_movers > 0) {
                for (std::size_t from = 0; from < 3; ++from) {
                    for (std::size_t to = 0; to < 3; ++to) {
                        ts.mean_proportions[from][to] =
                            prop_sums[from][to] / static_cast<double>(ts.replicates_with_movers);
                    }
                }
            }
            per_pair.push_back(ts);
        }
        report.transitions[mode] = std::move(per_pair);
    }

    return report;
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

namespace {

json kstat_json(const KStat& s) {
    return json{{"k", s.k},       {"n", s.n},     {"mean", s.mean},
                {"stddev", s.stddev}, {"min", s.min}, {"max", s.max}};
}

json transition_matrix_json(const std::array<std::array<double, 3>, 3>& m) {
    json out = json::object();
    const Region regions[3] = {Region::easy, Region::ambiguous, Region::hard};
    for (Region from : regions) {
        for (Region to : regions) {
            if (from == to) continue;
            out[std::string(region_letter(from)) + "->" + region_letter(to)] =
                m[static_cast<std::size_t>(from)][static_cast<std::size_t>(to)];
        }
    }
    return out;
}

}  // namespace

json SweepReport::to_json() const {
    json modes_json = json::object();
    for (const auto& [mode, summary] : modes) {
        json per_k = json::array();
        for (const KStat& s : summary.accuracy_per_k) per_k.push_back(kstat_json(s));
        json mj{{"accuracy_per_k", per_k},
                {"min", {{"accuracy", summary.min_accuracy}, {"k", summary.argmin_k}}},
                {"max", {{"accuracy", summary.max_accuracy}, {"k", summary.argmax_k}}},
                {"gain", summary.gain}};
        if (!summary.vinfo_per_k.empty()) {
            json vi = json::array();
            for (const VInfoKStat& s : summary.vinfo_per_k) {
                vi.push_back(json{{"k", s.k},
                                  {"n", s.n},
                                  {"mean_v_information", s.mean_v_information},
                                  {"stddev_v_information", s.stddev_v_information},
                                  {"mean_h_y", s.mean_h_y},
                                  {"mean_h_y_given_x", s.mean_h_y_given_x},
                                  {"negative_count", s.negative_count}});
            }
            mj["vinfo_per_k"] = std::move(vi);
        }
        modes_json[mode] = std::move(mj);
    }

    json transitions_json = json::object();
    for (const auto& [mode, pairs] : transitions) {
        json arr = json::array();
        for (const TransitionSummary& ts : pairs) {
            json counts = json::object();
            const Region regions[3] = {Region::easy, Region::ambiguous, Region::hard};
            for (Region from : regions) {
                for (Region to : regions) {
                    counts[std::string(region_letter(from)) + "->" + region_letter(to)] =
                        ts.total_counts[static_cast<std::size_t>(from)][static_cast<std::size_t>(to)];
                }
            }
            arr.push_back(json{{"from_k", ts.from_k},
                               {"to_k", ts.to_k},
                               {"mean_proportions", transition_matrix_json(ts.mean_proportions)},
                               {"total_counts", counts},
                               {"replicates_with_movers", ts.replicates_with_movers},
                               {"replicates_without_movers", ts.replicates_without_movers}});
        }
        transitions_json[mode] = std::move(arr);
    }

    return json{{"name", name},
                {"dataset", dataset_name},
                {"ks", ks},
                {"replicates", replicates},
                {"base_seed", base_seed},
                {"milestone_ks", milestone_ks},
                {"modes", modes_json},
                {"transitions", transitions_json},
                {"metadata",
                 {{"variability_definition", "population_stddev"},
                  {"tie_break", "lowest_class_index"},
                  {"vinfo_eval_split", "test"},
                  {"accuracy_format", "value (k)"}}}};
}

std::string SweepReport::format_table() const {
    std::string out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-12s %-18s %-18s %-8s\n", "mode", "min accuracy (k)",
                  "max accuracy (k)", "gain");
    out += buf;
    for (const auto& [mode, summary] : modes) {
        char min_s[32], max_s[32];
        std::snprintf(min_s, sizeof min_s, "%.4f (%d)", summary.min_accuracy, summary.argmin_k);
        std::snprintf(max_s, sizeof max_s, "%.4f (%d)", summary.max_accuracy, summary.argmax_k);
        std::snprintf(buf, sizeof buf, "%-12s %-18s %-18s %.4f\n", mode.c_str(), min_s, max_s,
                      summary.gain);
        out += buf;
    }
    for (const auto& [mode, pairs] : transitions) {
        if (pairs.empty()) {
            out += "transitions[" + mode + "]: no transition pairs\n";
            continue;
        }
        for (const TransitionSummary& ts : pairs) {
            std::snprintf(buf, sizeof buf, "transitions[%s] k=%d -> k=%d:", mode.c_str(), ts.from_k,
                          ts.to_k);
            out += buf;
            if (ts.replicates_with_movers == 0) {
                out += " no transitions\n";
                continue;
            }
            const Region regions[3] = {Region::easy, Region::ambiguous, Region::hard};
            for (Region from : regions) {
                for (Region to : regions) {
                    if (from == to) continue;
                    const double p = ts.mean_proportions[static_cast<std::size_t>(from)]
                                                        [static_cast<std::size_t>(to)];
                    if (p == 0.0) continue;
                    std::snprintf(buf, sizeof buf, " %s->%s %.3f", region_letter(from),
                                  region_letter(to), p);
                    out += buf;
                }
            }
            out += '\n';
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sweep driver
// ---------------------------------------------------------------------------

namespace {

ExperimentConfig resolve_seeds(ExperimentConfig cfg) {
    if (!cfg.split_seed_explicit) cfg.split.seed = stream_seed({seed_tag::split, cfg.base_seed});
    if (!cfg.hash_seed_explicit) {
        cfg.features.hash_seed = stream_seed({seed_tag::hashed_bow, cfg.base_seed});
    }
    return cfg;
}

void write_long_csvs(const ExperimentConfig& cfg, const std::vector<CellResult>& cells) {
    // accuracy_long.csv: one row per (k, replicate, mode); abs-gt rows leave
    // v_information empty.
    std::string acc = "k,replicate,mode,accuracy,v_information\n";
    std::vector<const CellResult*> ordered;
    ordered.reserve(cells.size());
    for (const CellResult& c : cells) ordered.push_back(&c);
    std::sort(ordered.begin(), ordered.end(), [](const CellResult* a, const CellResult* b) {
        if (a->k != b->k) return a->k < b->k;
        return a->replicate < b->replicate;
    });
    for (const CellResult* cell : ordered) {
        for (const auto& [mode, m] : cell->modes) {
            acc += std::to_string(cell->k) + ',' + std::to_string(cell->replicate) + ',' + mode +
                   ',' + format_double(m.accuracy) + ',' + format_double(m.v_information) + '\n';
            if (m.abs_gt_accuracy) {
                acc += std::to_string(cell->k) + ',' + std::to_string(cell->replicate) + ',' + mode +
                       "_abs_gt," + format_double(*m.abs_gt_accuracy) + ",\n";
            }
        }
    }
    write_text_atomic(cfg.output_dir / "accuracy_long.csv", acc);

    // transitions_long.csv: per (mode, milestone pair, replicate, cell).
    std::string tr = "mode,from_k,to_k,replicate,transition,count,proportion\n";
    const std::vector<int> milestones = cfg.milestones();
    std::map<std::pair<int, int>, const CellResult*> by_key;
    for (const CellResult& c : cells) by_key[{c.k, c.replicate}] = &c;
    const Region regions[3] = {Region::easy, Region::ambiguous, Region::hard};
    for (const char* mode : {"ml", "ld"}) {
        if ((std::string(mode) == "ml" && !cfg.mode_enabled(EvalMode::ml)) ||
            (std::string(mode) == "ld" && !cfg.mode_enabled(EvalMode::ld))) {
            continue;
        }
        for (std::size_t i = 0; i + 1 < milestones.size(); ++i) {
            for (int r = 0; r < cfg.replicates; ++r) {
                const auto a_it = by_key.find({milestones[i], r});
                const auto b_it = by_key.find({milestones[i + 1], r});
                if (a_it == by_key.end() || b_it == by_key.end()) continue;
                const auto& ma = a_it->second->modes.at(mode);
                const auto& mb = b_it->second->modes.at(mode);
                if (!ma.map || !mb.map) continue;
                const TransitionReport rep = transitions(*ma.map, *mb.map);
                for (Region from : regions) {
                    for (Region to : regions) {
                        if (from == to) continue;
                        const auto f = static_cast<std::size_t>(from);
                        const auto t = static_cast<std::size_t>(to);
                        tr += std::string(mode) + ',' + std::to_string(milestones[i]) + ',' +
                              std::to_string(milestones[i + 1]) + ',' + std::to_string(r) + ',' +
                              region_letter(from) + "->" + region_letter(to) + ',' +
                              std::to_string(rep.counts[f][t]) + ',' +
                              format_double(rep.proportions[f][t]) + '\n';
                    }
                }
            }
        }
    }
    write_text_atomic(cfg.output_dir / "transitions_long.csv", tr);
}

// Loads exactly the artifacts this config's task grid produces; files from
// older runs with other parameters are ignored.
std::vector<CellResult> load_task_cells(const ExperimentConfig& cfg, bool require_all) {
    const std::filesystem::path cells_dir = cfg.output_dir / "cells";
    std::vector<CellResult> cells;
    for (int k : cfg.ks) {
        for (int r = 0; r < cfg.replicates; ++r) {
            const std::filesystem::path f = cells_dir / cell_file_name(k, r);
            if (!std::filesystem::exists(f)) {
                if (require_all) throw IoError("missing cell artifact: " + f.string());
                continue;
            }
            try {
                cells.push_back(CellResult::from_json(json::parse(read_text(f))));
            } catch (const json::exception& e) {
                throw ValidationError("cell artifact " + f.string() + ": " + e.what());
            }
        }
    }
    return cells;
}

}  // namespace

SweepReport run_sweep(const ExperimentConfig& raw_cfg, const Dataset& ds, bool resume) {
    const ExperimentConfig cfg = resolve_seeds(raw_cfg);
    ds.validate();
    cfg.validate_against(ds);

    Context ctx(cfg);
    {
        Split parts = split(ds, cfg.split);
        ctx.train_ds = std::move(parts.train);
        ctx.dev_ds = std::move(parts.dev);
        ctx.test_ds = std::move(parts.test);
    }
    ctx.train_x = featurize(ctx.train_ds, cfg.features);
    ctx.dev_x = featurize(ctx.dev_ds, cfg.features);
    ctx.test_x = featurize(ctx.test_ds, cfg.features);
    if (cfg.mode_enabled(EvalMode::absolute_gt)) ctx.abs_gt = absolute_gt_targets(ctx.test_ds);
    const std::vector<int> milestones = cfg.milestones();
    ctx.milestone_set.insert(milestones.begin(), milestones.end());
    ctx.num_classes = ds.num_classes();

    const std::filesystem::path cells_dir = cfg.output_dir / "cells";
    std::filesystem::create_directories(cells_dir);
    {
        json echo = cfg.to_json();
        echo["dataset_name"] = ds.name;
        write_text_atomic(cfg.output_dir / "config.json", echo.dump(2) + "\n");
    }

    struct Task {
        int k;
        int replicate;
    };
    std::vector<Task> tasks;
    for (int k : cfg.ks) {
        for (int r = 0; r < cfg.replicates; ++r) tasks.push_back({k, r});
    }

    std::vector<CellResult> results(tasks.size());
    std::vector<std::string> errors(tasks.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size() || failed.load()) break;
            const Task task = tasks[i];
            const std::filesystem::path cell_path = cells_dir / cell_file_name(task.k, task.replicate);
            try {
                bool loaded = false;
                if (resume && std::filesystem::exists(cell_path)) {
                    try {
                        results[i] = CellResult::from_json(json::parse(read_text(cell_path)));
                        loaded = true;
                    } catch (const std::exception&) {
                        loaded = false;  // damaged artifact: recompute
                    }
                }
                if (!loaded) {
                    results[i] = compute_cell(ctx, task.k, task.replicate);
                    write_text_atomic(cell_path, results[i].to_json().dump(2) + "\n");
                }
            } catch (const std::exception& e) {
                errors[i] = e.what();
                failed.store(true);
            }
        }
    };

    unsigned jobs = cfg.jobs > 0 ? static_cast<unsigned>(cfg.jobs)
                                 : std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min<unsigned>(jobs, static_cast<unsigned>(tasks.size()));
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (!errors[i].empty()) {
            throw CellError("cell k=" + std::to_string(tasks[i].k) + " replicate=" +
                            std::to_string(tasks[i].replicate) + " failed: " + errors[i]);
        }
    }

    // Summarize from the persisted artifacts so fresh and resumed runs share
    // one code path (and therefore identical report bytes).
    const std::vector<CellResult> cells = load_task_cells(cfg, /*require_all=*/true);
    SweepReport report = summarize(cfg, ds.name, cells);
    write_text_atomic(cfg.output_dir / "report.json", report.to_json().dump(2) + "\n");
    write_long_csvs(cfg, cells);
    return report;
}

SweepReport run_sweep(const ExperimentConfig& cfg, bool resume) {
    if (cfg.dataset_path.empty()) throw ValidationError("config: missing dataset path");
    const Dataset ds = load_dataset(cfg.dataset_path);
    return run_sweep(cfg, ds, resume);
}

SweepReport summarize_directory(const ExperimentConfig& raw_cfg, const std::string& dataset_name) {
    const ExperimentConfig cfg = resolve_seeds(raw_cfg);
    const std::vector<CellResult> cells = load_task_cells(cfg, /*require_all=*/false);
    if (cells.empty()) {
        throw ValidationError("no cell artifacts under " + (cfg.output_dir / "cells").string());
    }
    SweepReport report = summarize(cfg, dataset_name, cells);
    write_text_atomic(cfg.output_dir / "report.json", report.to_json().dump(2) + "\n");
    write_long_csvs(cfg, cells);
    return report;
}

}  // namespace annosim
