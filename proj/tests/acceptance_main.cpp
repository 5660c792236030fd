// Acceptance suite: one line per criterion, nonzero exit if any fail.
//
//  1. hypergeometric correctness of the subset sampler
//  2. prefix nesting and byte-identical determinism
//  3. trainer gradient correctness and full-batch descent
//  4. null-model closed form
//  5. v-information identities and bounds
//  6. cartography contracts (property-tested)
//  7. sweep-level accuracy rise and saturation on the reference generator
//  8. ambiguous-to-easy transition dominance on the same sweep
//  9. end-to-end CLI determinism, parallel == sequential

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "annosim/cartography.hpp"
#include "annosim/data.hpp"
#include "annosim/experiment.hpp"
#include "annosim/io.hpp"
#include "annosim/model.hpp"
#include "annosim/rng.hpp"
#include "annosim/simulate.hpp"
#include "annosim/synthetic.hpp"
#include "annosim/targets.hpp"
#include "annosim/vinfo.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace annosim;
using nlohmann::json;

namespace {

struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void expect(bool condition, const std::string& message) {
    if (!condition) throw CheckFailure(message);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

int g_failures = 0;

void criterion(int number, const std::string& title, double budget_seconds,
               const std::function<std::string()>& body) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    try {
        detail = body();
    } catch (const std::exception& e) {
        ok = false;
        detail = e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (ok && budget_seconds > 0.0 && elapsed > budget_seconds) {
        ok = false;
        detail = "runtime " + fmt(elapsed) + "s exceeds " + fmt(budget_seconds) + "s budget";
    }
    if (!ok) ++g_failures;
    std::printf("%s criterion %d: %s (%s; %.1fs)\n", ok ? "PASS" : "FAIL", number, title.c_str(),
                detail.c_str(), elapsed);
    std::fflush(stdout);
}

Dataset single_instance_dataset(std::vector<int> counts) {
    Dataset ds;
    ds.name = "one";
    int m = 0;
    for (int c : counts) m += c;
    ds.annotator_count = m;
    for (std::size_t c = 0; c < counts.size(); ++c) ds.class_labels.push_back("c" + std::to_string(c));
    ds.instances.push_back({"only", "t", std::nullopt, std::move(counts)});
    return ds;
}

// --- criterion bodies -------------------------------------------------------

std::string run_hypergeometric() {
    const std::vector<int> pool{3, 2, 0};
    const Dataset ds = single_instance_dataset(pool);
    std::vector<std::vector<int>> support;
    oracles::enumerate_draws(pool, 2, support);
    expect(support.size() == 3, "expected 3 support points");

    std::map<std::vector<int>, double> pmf;
    for (const auto& d : support) pmf[d] = oracles::hypergeom_pmf(pool, d);
    expect(std::abs(pmf[{2, 0, 0}] - 0.3) < 1e-12, "pmf([2,0,0]) != 3/10");
    expect(std::abs(pmf[{1, 1, 0}] - 0.6) < 1e-12, "pmf([1,1,0]) != 6/10");
    expect(std::abs(pmf[{0, 2, 0}] - 0.1) < 1e-12, "pmf([0,2,0]) != 1/10");

    const int trials = 10000;
    std::map<std::vector<int>, long long> observed;
    for (int r = 0; r < trials; ++r) {
        const AnnotatorSubset subset = build_subset(ds, 2, 20240731, r);
        std::vector<int> drawn(3, 0);
        for (int a : subset.annotations[0]) ++drawn[static_cast<std::size_t>(a)];
        ++observed[drawn];
    }
    std::vector<long long> obs;
    std::vector<double> expected;
    for (const auto& d : support) {
        obs.push_back(observed[d]);
        expected.push_back(pmf[d] * trials);
    }
    const double stat = oracles::chi2_statistic(obs, expected);
    const double p = oracles::chi2_survival(stat, 2);
    expect(p > 0.01, "chi-square p = " + fmt(p) + " <= 0.01");
    return "chi2 p = " + fmt(p);
}

std::string run_nesting_determinism() {
    SplitMix64 rng(404);
    Dataset ds;
    ds.name = "nest";
    ds.class_labels = {"a", "b", "c"};
    const int m = 12;
    ds.annotator_count = m;
    for (int i = 0; i < 100; ++i) {
        std::vector<int> counts(3, 0);
        for (int j = 0; j < m; ++j) ++counts[rng.bounded(3)];
        ds.instances.push_back({"n" + std::to_string(i), "t", std::nullopt, std::move(counts)});
    }

    for (int r = 0; r < 2; ++r) {
        std::vector<AnnotatorSubset> subsets;
        for (int k = 1; k <= m; ++k) subsets.push_back(build_subset(ds, k, 7, r));
        for (int k = 1; k <= m; ++k) {
            for (int kp = k + 1; kp <= m; ++kp) {
                const auto& small = subsets[static_cast<std::size_t>(k - 1)];
                const auto& big = subsets[static_cast<std::size_t>(kp - 1)];
                for (std::size_t i = 0; i < ds.size(); ++i) {
                    expect(std::equal(small.annotations[i].begin(), small.annotations[i].end(),
                                      big.annotations[i].begin()),
                           "prefix nesting violated at k=" + std::to_string(k) + " k'=" +
                               std::to_string(kp));
                }
            }
        }
    }

    testutil::TempDir tmp;
    save_subset(build_subset(ds, 5, 7, 1), tmp / "a.jsonl");
    save_subset(build_subset(ds, 5, 7, 1), tmp / "b.jsonl");
    expect(read_text(tmp / "a.jsonl") == read_text(tmp / "b.jsonl"),
           "two identical builds produced different bytes");
    return "all k<k' prefixes match over 100 instances, reruns byte-identical";
}

std::string run_trainer_correctness() {
    SplitMix64 rng(555);
    double worst_rel = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const auto n = static_cast<std::size_t>(4 + rng.bounded(6));
        const int c = 2 + static_cast<int>(rng.bounded(3));
        const int f = 2 + static_cast<int>(rng.bounded(5));
        const bool ld = trial % 2 == 1;

        Matrix x(n, static_cast<std::size_t>(f));
        for (double& v : x.data) v = rng.next_gaussian();
        TrainTargets t;
        t.num_classes = c;
        if (ld) {
            t.mode = TargetMode::ld;
            t.dists = Matrix(n, static_cast<std::size_t>(c));
            for (std::size_t i = 0; i < n; ++i) {
                double sum = 0.0;
                for (int j = 0; j < c; ++j) {
                    const double v = rng.next_double_open();
                    t.dists.at(i, static_cast<std::size_t>(j)) = v;
                    sum += v;
                }
                for (int j = 0; j < c; ++j) t.dists.at(i, static_cast<std::size_t>(j)) /= sum;
                t.gold.push_back(0);
            }
        } else {
            t.mode = TargetMode::ml;
            for (std::size_t i = 0; i < n; ++i) {
                const int y = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(c)));
                t.labels.push_back(y);
                t.gold.push_back(y);
            }
        }

        ModelState m;
        m.num_classes = c;
        m.feature_dim = f;
        m.weights = Matrix(static_cast<std::size_t>(c), static_cast<std::size_t>(f));
        for (double& v : m.weights.data) v = 0.4 * rng.next_gaussian();
        m.bias.resize(static_cast<std::size_t>(c));
        for (double& v : m.bias) v = 0.4 * rng.next_gaussian();

        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), std::size_t{0});
        const LossGrad analytic = loss_and_grad(m, x, t, all);
        const oracles::FdGradient fd = oracles::fd_gradient(m, x, t, 1e-5);
        for (std::size_t i = 0; i < analytic.grad_weights.data.size(); ++i) {
            const double rel = std::abs(analytic.grad_weights.data[i] - fd.grad_weights.data[i]) /
                               std::max(1.0, std::abs(fd.grad_weights.data[i]));
            worst_rel = std::max(worst_rel, rel);
        }
        for (std::size_t i = 0; i < analytic.grad_bias.size(); ++i) {
            const double rel = std::abs(analytic.grad_bias[i] - fd.grad_bias[i]) /
                               std::max(1.0, std::abs(fd.grad_bias[i]));
            worst_rel = std::max(worst_rel, rel);
        }
    }
    expect(worst_rel <= 1e-6, "worst gradient deviation " + fmt(worst_rel) + " > 1e-6");

    // full-batch descent on a convex two-blob fixture at lr = 1e-3
    const std::size_t n = 80;
    Matrix x(n, 2);
    TrainTargets t;
    t.mode = TargetMode::ml;
    t.num_classes = 2;
    SplitMix64 gen(66);
    for (std::size_t i = 0; i < n; ++i) {
        const int y = static_cast<int>(gen.bounded(2));
        x.at(i, 0) = (y == 0 ? -3.0 : 3.0) + gen.next_gaussian();
        x.at(i, 1) = gen.next_gaussian();
        t.labels.push_back(y);
        t.gold.push_back(y);
    }
    TrainConfig cfg;
    cfg.learning_rate = 1e-3;
    cfg.epochs = 50;
    cfg.batch_size = 1 << 20;
    const FitResult fitted = fit(x, t, cfg);
    double prev = std::log(2.0);
    for (double loss : fitted.epoch_losses) {
        expect(loss <= prev, "full-batch loss increased: " + fmt(prev) + " -> " + fmt(loss));
        prev = loss;
    }
    return "worst gradient rel. err " + fmt(worst_rel) + ", loss monotone over 50 epochs";
}

std::string run_null_closed_form() {
    TrainTargets t;
    t.mode = TargetMode::ld;
    t.num_classes = 3;
    const std::size_t n = 120;
    t.dists = Matrix(n, 3);
    SplitMix64 rng(88);
    std::vector<double> mean(3, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        std::vector<double> row(3);
        for (double& v : row) {
            v = rng.next_double_open();
            sum += v;
        }
        for (std::size_t j = 0; j < 3; ++j) {
            t.dists.at(i, j) = row[j] / sum;
            mean[j] += t.dists.at(i, j);
        }
        t.gold.push_back(0);
    }
    for (double& v : mean) v /= static_cast<double>(n);

    TrainConfig cfg;
    cfg.learning_rate = 1e-4;
    cfg.epochs = 30000;
    cfg.batch_size = 1 << 20;
    const std::vector<double> dist = null_distribution(fit_null(t, cfg));
    double tv = 0.0;
    for (std::size_t j = 0; j < 3; ++j) tv += std::abs(dist[j] - mean[j]);
    tv /= 2.0;
    expect(tv <= 1e-4, "total variation " + fmt(tv) + " > 1e-4");
    return "total variation " + fmt(tv);
}

std::string run_vinfo_identities() {
    TrainConfig null_cfg;
    null_cfg.learning_rate = 0.02;
    null_cfg.epochs = 3000;
    null_cfg.batch_size = 1 << 20;

    // (a) mean PVI equals H(Y) - H(Y|X) to 1e-9, on a real fitted pair
    {
        SplitMix64 rng(2025);
        const std::size_t n = 800;
        Matrix x(n, 6);
        for (double& v : x.data) v = rng.next_gaussian();
        TrainTargets t;
        t.mode = TargetMode::ld;
        t.num_classes = 3;
        t.dists = Matrix(n, 3);
        for (std::size_t i = 0; i < n; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < 3; ++j) {
                const double v = rng.next_double_open();
                t.dists.at(i, j) = v;
                sum += v;
            }
            int best = 0;
            for (std::size_t j = 0; j < 3; ++j) {
                t.dists.at(i, j) /= sum;
                if (t.dists.at(i, j) > t.dists.at(i, static_cast<std::size_t>(best))) {
                    best = static_cast<int>(j);
                }
            }
            t.gold.push_back(best);
        }
        TrainConfig cfg;
        cfg.seed = 12;
        const ModelState model = fit(x, t, cfg).model;
        const ModelState null_model = fit_null(t, null_cfg);
        const VInfoReport r = compute_vinfo(model, null_model, x, t.gold, GoldSource::ld_argmax, "train");
        double mean_pvi = 0.0;
        for (double v : r.pvi) mean_pvi += v;
        mean_pvi /= static_cast<double>(r.pvi.size());
        expect(std::abs(mean_pvi - r.v_information) <= 1e-9,
               "identity off by " + fmt(std::abs(mean_pvi - r.v_information)));
    }

    // (b) independent X and Y: mean |I_V| over 10 seeds stays within 0.05 bits
    double mean_abs_iv = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        SplitMix64 rng(3000 + seed);
        const std::size_t n = 2000;
        const std::size_t n_train = 1600;
        Matrix x(n, 8);
        for (double& v : x.data) v = rng.next_gaussian();
        std::vector<int> y(n);
        for (int& v : y) v = static_cast<int>(rng.bounded(2));

        Matrix train_x(n_train, 8), test_x(n - n_train, 8);
        TrainTargets train_t;
        train_t.mode = TargetMode::ml;
        train_t.num_classes = 2;
        std::vector<int> test_gold;
        for (std::size_t i = 0; i < n; ++i) {
            if (i < n_train) {
                for (std::size_t j = 0; j < 8; ++j) train_x.at(i, j) = x.at(i, j);
                train_t.labels.push_back(y[i]);
                train_t.gold.push_back(y[i]);
            } else {
                for (std::size_t j = 0; j < 8; ++j) test_x.at(i - n_train, j) = x.at(i, j);
                test_gold.push_back(y[i]);
            }
        }
        TrainConfig cfg;
        cfg.seed = seed;
        const ModelState model = fit(train_x, train_t, cfg).model;
        const ModelState null_model = fit_null(train_t, null_cfg);
        const VInfoReport r =
            compute_vinfo(model, null_model, test_x, test_gold, GoldSource::ml_majority, "test");
        mean_abs_iv += std::abs(r.v_information);
    }
    mean_abs_iv /= 10.0;
    expect(mean_abs_iv <= 0.05,
           "mean |I_V| on independent data = " + fmt(mean_abs_iv) + " > 0.05");

    // (c) deterministic balanced linear rule: I_V of at least 0.5 bits
    double det_iv = 0.0;
    {
        SplitMix64 rng(9090);
        const std::size_t n = 2000;
        const std::size_t n_train = 1600;
        Matrix train_x(n_train, 6), test_x(n - n_train, 6);
        TrainTargets train_t;
        train_t.mode = TargetMode::ml;
        train_t.num_classes = 2;
        std::vector<int> test_gold;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> row(6);
            for (double& v : row) v = rng.next_gaussian();
            const int y = row[0] + 0.5 * row[1] - 0.25 * row[2] > 0.0 ? 1 : 0;
            if (i < n_train) {
                for (std::size_t j = 0; j < 6; ++j) train_x.at(i, j) = row[j];
                train_t.labels.push_back(y);
                train_t.gold.push_back(y);
            } else {
                for (std::size_t j = 0; j < 6; ++j) test_x.at(i - n_train, j) = row[j];
                test_gold.push_back(y);
            }
        }
        TrainConfig cfg;
        cfg.seed = 4;
        cfg.epochs = 20;
        const ModelState model = fit(train_x, train_t, cfg).model;
        const ModelState null_model = fit_null(train_t, null_cfg);
        const VInfoReport r =
            compute_vinfo(model, null_model, test_x, test_gold, GoldSource::ml_majority, "test");
        det_iv = r.v_information;
        expect(det_iv >= 0.5, "deterministic-rule I_V = " + fmt(det_iv) + " < 0.5");
    }
    return "identity <= 1e-9, mean |I_V| indep = " + fmt(mean_abs_iv) + ", deterministic I_V = " +
           fmt(det_iv);
}

std::string run_cartography_contracts() {
    SplitMix64 rng(31337);
    int maps_checked = 0, transition_pairs = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + rng.bounded(50);
        const std::size_t e = 2 + rng.bounded(12);
        DynamicsRecord dyn_a{Matrix(n, e)}, dyn_b{Matrix(n, e)};
        for (double& v : dyn_a.gold_prob.data) v = rng.next_double();
        for (double& v : dyn_b.gold_prob.data) v = rng.next_double();
        const RegionRule rule = trial % 2 == 0
                                    ? RegionRule{}
                                    : RegionRule{.mode = RegionRule::Mode::percentile};
        const CartographyMap a = compute_map(dyn_a, rule);
        const CartographyMap b = compute_map(dyn_b, rule);
        for (std::size_t i = 0; i < n; ++i) {
            expect(a.confidence[i] >= 0.0 && a.confidence[i] <= 1.0, "confidence out of [0,1]");
            expect(a.variability[i] >= 0.0 && a.variability[i] <= 0.5, "variability out of [0,0.5]");
            const Region r = a.region[i];
            expect(r == Region::easy || r == Region::ambiguous || r == Region::hard,
                   "region not assigned");
        }
        ++maps_checked;

        const TransitionReport tr = transitions(a, b);
        long long count_sum = 0;
        for (const auto& row : tr.counts) {
            for (long long c : row) count_sum += c;
        }
        expect(count_sum == static_cast<long long>(n), "counts do not sum to N");
        if (!tr.no_transitions) {
            double prop_sum = 0.0;
            for (std::size_t from = 0; from < 3; ++from) {
                for (std::size_t to = 0; to < 3; ++to) prop_sum += tr.proportions[from][to];
            }
            expect(std::abs(prop_sum - 1.0) <= 1e-12,
                   "mover proportions sum to " + fmt(prop_sum));
            ++transition_pairs;
        }
    }
    return std::to_string(maps_checked) + " random maps, " + std::to_string(transition_pairs) +
           " transition pairs";
}

// Shared by criteria 7 and 8: the documented reference generator and sweep.
struct SweepFixture {
    testutil::TempDir tmp;
    ExperimentConfig cfg;
    SweepReport report;
    Dataset ds;

    SweepFixture() {
        // The reference generator documented in the README: fixed gold
        // conditional per instance, annotation noise only.
        SyntheticSpec spec{.num_instances = 2000, .num_classes = 3, .feature_dim = 16,
                           .annotators = 50, .noise = 0.3, .separation = 3.0, .seed = 42};
        spec.name = "reference";
        ds = make_synthetic(spec);

        cfg.name = "acceptance";
        cfg.ks = {1, 2, 3, 4, 5, 6, 8, 10, 13, 16, 20, 25, 30, 35, 40, 45, 50};
        cfg.replicates = 10;
        cfg.base_seed = 7;
        cfg.eval_modes = {EvalMode::ld};
        cfg.transition_ks = {1, 50};
        // A learning rate this high lets noisy small-k targets visibly
        // destabilize the per-epoch dynamics; the soft k=50 targets
        // stabilize them again, which is what criterion 8 measures.
        cfg.train.learning_rate = 0.15;
        cfg.train.epochs = 8;
        cfg.output_dir = tmp / "sweep";
        report = run_sweep(cfg, ds);
    }
};

SweepFixture* g_fixture = nullptr;

std::string run_sweep_saturation() {
    g_fixture = new SweepFixture();
    const ModeSummary& ld = g_fixture->report.modes.at("ld");

    std::map<int, double> mean_by_k;
    for (const KStat& s : ld.accuracy_per_k) mean_by_k[s.k] = s.mean;

    const double rise = mean_by_k.at(50) - mean_by_k.at(1);
    expect(rise >= 0.05, "accuracy rise k=1 -> k=50 is " + fmt(rise) + " < 0.05");

    // saturation: the tail of the curve hugs the k=50 level
    double max_tail_gap = 0.0;
    for (const auto& [k, mean] : mean_by_k) {
        if (k >= 20) max_tail_gap = std::max(max_tail_gap, std::abs(mean - mean_by_k.at(50)));
    }
    expect(max_tail_gap <= 0.02, "tail gap " + fmt(max_tail_gap) + " > 0.02 (no saturation)");

    // not monotone-smooth: some adjacent pair dips
    bool dips = false;
    for (std::size_t i = 0; i + 1 < ld.accuracy_per_k.size(); ++i) {
        if (ld.accuracy_per_k[i + 1].mean < ld.accuracy_per_k[i].mean) dips = true;
    }
    expect(dips, "curve is strictly non-decreasing everywhere");

    return "rise " + fmt(rise) + ", tail gap " + fmt(max_tail_gap);
}

std::string run_transition_direction() {
    expect(g_fixture != nullptr, "sweep fixture missing (criterion 7 did not run)");
    const ExperimentConfig& cfg = g_fixture->cfg;

    int a_to_e_wins = 0;
    for (int r = 0; r < cfg.replicates; ++r) {
        const auto load = [&](int k) {
            const auto path = cfg.output_dir / "cells" / cell_file_name(k, r);
            return CellResult::from_json(json::parse(read_text(path)));
        };
        const CellResult low = load(1);
        const CellResult high = load(50);
        const auto& map_low = low.modes.at("ld").map;
        const auto& map_high = high.modes.at("ld").map;
        expect(map_low.has_value() && map_high.has_value(), "milestone maps missing");
        const TransitionReport tr = transitions(*map_low, *map_high);
        const double a_to_e = tr.proportions[static_cast<int>(Region::ambiguous)]
                                            [static_cast<int>(Region::easy)];
        const double e_to_a = tr.proportions[static_cast<int>(Region::easy)]
                                            [static_cast<int>(Region::ambiguous)];
        if (!tr.no_transitions && a_to_e > e_to_a) ++a_to_e_wins;
    }
    expect(a_to_e_wins >= 8,
           "a->e exceeded e->a in only " + std::to_string(a_to_e_wins) + "/10 replicates");
    delete g_fixture;
    g_fixture = nullptr;
    return "a->e dominated in " + std::to_string(a_to_e_wins) + "/10 replicates";
}

int run_cli(const std::string& args, std::string* output = nullptr) {
    const char* bin = std::getenv("ANNOSIM_BIN");
    expect(bin != nullptr, "ANNOSIM_BIN is not set");
    const std::string cmd = std::string(bin) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    expect(pipe != nullptr, "popen failed");
    std::string captured;
    char buf[512];
    while (fgets(buf, sizeof buf, pipe)) captured += buf;
    const int status = pclose(pipe);
    if (output) *output = captured;
    return WEXITSTATUS(status);
}

std::string run_cli_determinism() {
    testutil::TempDir tmp;
    const std::string ds = (tmp / "ds.jsonl").string();
    expect(run_cli("synth --out " + ds +
                   " --n 400 --classes 3 --features 8 --annotators 20 --noise 0.3 --seed 9") == 0,
           "synth failed");

    json cfg{{"dataset", ds},
             {"name", "determinism"},
             {"ks", {1, 5, 10}},
             {"replicates", 3},
             {"base_seed", 3},
             {"eval_modes", {"ml", "ld", "absolute_gt"}},
             {"train", {{"epochs", 4}}},
             {"null_train", {{"epochs", 150}}}};
    const std::string cfg_path = (tmp / "cfg.json").string();
    write_text_atomic(cfg_path, cfg.dump(2) + "\n");

    const auto sweep_into = [&](const std::string& dir, int jobs) {
        const int rc = run_cli("sweep --config " + cfg_path + " --out " + (tmp / dir).string() +
                               " --jobs " + std::to_string(jobs));
        expect(rc == 0, "sweep into " + dir + " exited " + std::to_string(rc));
    };
    sweep_into("run_a", 1);
    sweep_into("run_b", 1);
    sweep_into("run_p", 8);

    const std::vector<std::string> artifacts{"report.json", "accuracy_long.csv",
                                             "transitions_long.csv", "config.json"};
    for (const std::string& name : artifacts) {
        const std::string a = read_text(tmp / "run_a" / name);
        expect(a == read_text(tmp / "run_b" / name), name + " differs between identical runs");
        expect(a == read_text(tmp / "run_p" / name), name + " differs between jobs=1 and jobs=8");
    }
    for (int k : {1, 5, 10}) {
        for (int r = 0; r < 3; ++r) {
            const std::string cell = "cells/" + cell_file_name(k, r);
            const std::string a = read_text(tmp / "run_a" / cell);
            expect(a == read_text(tmp / "run_b" / cell), cell + " differs between runs");
            expect(a == read_text(tmp / "run_p" / cell), cell + " differs with jobs=8");
        }
    }
    return "3 sweeps, all reports and 9 cells byte-identical";
}

}  // namespace

int main() {
    criterion(1, "hypergeometric correctness of the subset sampler", 5.0, run_hypergeometric);
    criterion(2, "prefix nesting and determinism", 5.0, run_nesting_determinism);
    criterion(3, "trainer gradients and full-batch descent", 0.0, run_trainer_correctness);
    criterion(4, "null-model closed form", 0.0, run_null_closed_form);
    criterion(5, "v-information identities and bounds", 120.0, run_vinfo_identities);
    criterion(6, "cartography contracts", 0.0, run_cartography_contracts);
    criterion(7, "sweep accuracy rise and saturation", 300.0, run_sweep_saturation);
    criterion(8, "ambiguous-to-easy transition dominance", 0.0, run_transition_direction);
    criterion(9, "end-to-end CLI determinism", 0.0, run_cli_determinism);

    if (g_failures == 0) {
        std::printf("all 9 acceptance criteria passed\n");
        return 0;
    }
    std::printf("%d acceptance criteria FAILED\n", g_failures);
    return 1;
}
