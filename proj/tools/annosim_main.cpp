// annosim: simulate multi-annotator datasets from label-count distributions,
// train the reference classifier under ML/LD objectives, and report how the
// annotation budget k moves accuracy, V-information, and cartography regions.
//
// Exit codes: 0 success, 1 I/O failure, 2 validation/usage failure,
// 3 sweep cell failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "annosim/cartography.hpp"
#include "annosim/data.hpp"
#include "annosim/error.hpp"
#include "annosim/experiment.hpp"
#include "annosim/io.hpp"
#include "annosim/model.hpp"
#include "annosim/rng.hpp"
#include "annosim/simulate.hpp"
#include "annosim/synthetic.hpp"
#include "annosim/targets.hpp"
#include "annosim/vinfo.hpp"

namespace {

using namespace annosim;
using nlohmann::json;

TargetMode parse_mode(const std::string& s) {
    if (s == "ml") return TargetMode::ml;
    if (s == "ld") return TargetMode::ld;
    throw ValidationError("mode must be ml or ld, got: " + s);
}

FeatureConfig auto_features(const Dataset& ds, const std::string& source, int dim,
                            std::uint64_t base_seed) {
    FeatureConfig fc;
    fc.hash_seed = stream_seed({seed_tag::hashed_bow, base_seed});
    if (source == "provided_vectors" || (source == "auto" && ds.feature_dim())) {
        fc.source = FeatureSource::provided_vectors;
        fc.dimension = dim;
    } else {
        fc.source = FeatureSource::hashed_bow;
        fc.dimension = dim > 0 ? dim : 512;
    }
    return fc;
}

// Shared single-run pipeline behind `train` and `vinfo`: split, simulate one
// subset, fit the model (and the null model when asked).
struct SingleRun {
    Split parts;
    AnnotatorSubset train_sub, dev_sub, test_sub;
    TrainTargets train_targets;
    Matrix train_x, dev_x, test_x;
    FitResult fitted;
    ModelState null_model;
    int num_classes = 0;
};

struct SingleRunArgs {
    std::string data_path;
    std::string mode = "ld";
    int k = 0;  // 0 = full M
    int replicate = 0;
    std::uint64_t seed = 1;
    std::string feature_source = "auto";
    int feature_dim = 0;
    TrainConfig train;
    bool want_null = false;
};

SingleRun run_single(const SingleRunArgs& args) {
    SingleRun run;
    const Dataset ds = load_dataset(args.data_path);
    run.num_classes = ds.num_classes();
    const int k = args.k > 0 ? args.k : ds.annotator_count;
    const TargetMode mode = parse_mode(args.mode);

    SplitSpec split_spec;
    split_spec.seed = stream_seed({seed_tag::split, args.seed});
    run.parts = split(ds, split_spec);

    run.train_sub = build_subset(run.parts.train, k, args.seed, args.replicate);
    run.dev_sub = build_subset(run.parts.dev, k, args.seed, args.replicate);
    run.test_sub = build_subset(run.parts.test, k, args.seed, args.replicate);

    const FeatureConfig fc = auto_features(ds, args.feature_source, args.feature_dim, args.seed);
    run.train_x = featurize(run.parts.train, fc);
    run.dev_x = featurize(run.parts.dev, fc);
    run.test_x = featurize(run.parts.test, fc);

    run.train_targets = make_train_targets(run.train_sub, run.num_classes, mode);

    TrainConfig tc = args.train;
    tc.seed = stream_seed({seed_tag::train, args.seed, static_cast<std::uint64_t>(k),
                           static_cast<std::uint64_t>(args.replicate), fnv1a64(args.mode)});
    run.fitted = fit(run.train_x, run.train_targets, tc, &run.train_targets.gold);

    if (args.want_null) {
        TrainConfig nc;
        nc.learning_rate = 0.05;
        nc.epochs = 400;
        nc.batch_size = 1 << 30;
        nc.seed = stream_seed({seed_tag::null_train, args.seed, static_cast<std::uint64_t>(k),
                               static_cast<std::uint64_t>(args.replicate), fnv1a64(args.mode)});
        run.null_model = fit_null(run.train_targets, nc);
    }
    return run;
}

void add_train_flags(CLI::App* cmd, TrainConfig& tc) {
    cmd->add_option("--lr", tc.learning_rate, "learning rate");
    cmd->add_option("--weight-decay", tc.weight_decay, "decoupled weight decay");
    cmd->add_option("--epochs", tc.epochs, "training epochs");
    cmd->add_option("--batch-size", tc.batch_size, "mini-batch size");
    cmd->add_option("--beta1", tc.adam_beta1, "adam beta1");
    cmd->add_option("--beta2", tc.adam_beta2, "adam beta2");
    cmd->add_option("--eps", tc.adam_epsilon, "adam epsilon");
}

int cmd_synth(const SyntheticSpec& spec, const std::string& out) {
    Dataset ds = make_synthetic(spec);
    save_dataset(ds, out);
    std::cout << "wrote " << out << ": N=" << ds.size() << " C=" << ds.num_classes()
              << " M=" << ds.annotator_count << "\n";
    return 0;
}

int cmd_simulate(const std::string& data, int k, std::uint64_t seed, int replicate,
                 const std::string& out) {
    const Dataset ds = load_dataset(data);
    const AnnotatorSubset subset = build_subset(ds, k, seed, replicate);
    save_subset(subset, out);

    std::vector<long long> drawn(static_cast<std::size_t>(ds.num_classes()), 0);
    for (const auto& ann : subset.annotations) {
        for (int a : ann) ++drawn[static_cast<std::size_t>(a)];
    }
    std::cout << "wrote " << out << ": " << subset.size() << " instances, k=" << k << "\n";
    std::cout << "drawn annotations per class:";
    for (std::size_t c = 0; c < drawn.size(); ++c) {
        std::cout << ' ' << ds.class_labels[c] << '=' << drawn[c];
    }
    std::cout << "\n";
    return 0;
}

int cmd_train(const SingleRunArgs& args, const std::string& out_dir) {
    SingleRun run = run_single(args);
    const std::filesystem::path out(out_dir);

    save_model(run.fitted.model, out / "model.json");
    write_dynamics_csv(out / "dynamics.csv", run.train_sub.ids, *run.fitted.dynamics);

    const TargetMode mode = parse_mode(args.mode);
    const EvalMode eval_mode = mode == TargetMode::ml ? EvalMode::ml : EvalMode::ld;
    const EvalTargets dev_targets = make_eval_targets(run.dev_sub, run.num_classes, eval_mode);
    const EvalTargets test_targets = make_eval_targets(run.test_sub, run.num_classes, eval_mode);
    const Matrix dev_preds = predict_proba(run.fitted.model, run.dev_x);
    const Matrix test_preds = predict_proba(run.fitted.model, run.test_x);
    const double dev_acc = mode == TargetMode::ml ? accuracy_ml(dev_preds, dev_targets)
                                                  : accuracy_ld(dev_preds, dev_targets);
    const double test_acc = mode == TargetMode::ml ? accuracy_ml(test_preds, test_targets)
                                                   : accuracy_ld(test_preds, test_targets);

    json metrics{{"mode", args.mode},
                 {"k", run.train_sub.k},
                 {"replicate", args.replicate},
                 {"final_loss", run.fitted.model.final_loss},
                 {"epoch_losses", run.fitted.epoch_losses},
                 {"dev_accuracy", dev_acc},
                 {"test_accuracy", test_acc},
                 {"train_tie_count", run.train_targets.tie_count}};
    write_text_atomic(out / "metrics.json", metrics.dump(2) + "\n");

    std::cout << "k=" << run.train_sub.k << " mode=" << args.mode << " final_loss="
              << run.fitted.model.final_loss << " dev_acc=" << dev_acc << " test_acc=" << test_acc
              << "\n";
    std::cout << "wrote " << (out / "model.json").string() << ", dynamics.csv, metrics.json\n";
    return 0;
}

int cmd_vinfo(const SingleRunArgs& args_in, const std::string& out_dir) {
    SingleRunArgs args = args_in;
    args.want_null = true;
    SingleRun run = run_single(args);
    const std::filesystem::path out(out_dir);

    const TargetMode mode = parse_mode(args.mode);
    const EvalMode eval_mode = mode == TargetMode::ml ? EvalMode::ml : EvalMode::ld;
    const EvalTargets test_targets = make_eval_targets(run.test_sub, run.num_classes, eval_mode);
    const GoldSource source =
        mode == TargetMode::ml ? GoldSource::ml_majority : GoldSource::ld_argmax;
    const VInfoReport report = compute_vinfo(run.fitted.model, run.null_model, run.test_x,
                                             test_targets.gold, source, "test");

    json j{{"h_y", report.h_y},
           {"h_y_given_x", report.h_y_given_x},
           {"v_information", report.v_information},
           {"gold_source", gold_source_name(report.gold_source)},
           {"eval_split", report.eval_split},
           {"clamped", report.clamped},
           {"negative", report.negative}};
    write_text_atomic(out / "vinfo.json", j.dump(2) + "\n");
    write_pvi_csv(out / "pvi.csv", run.test_sub.ids, report);

    std::cout << "h_y=" << report.h_y << " h_y|x=" << report.h_y_given_x
              << " v_information=" << report.v_information << " bits"
              << (report.negative ? " (negative: overfit/misfit)" : "") << "\n";
    std::cout << "wrote " << (out / "vinfo.json").string() << ", pvi.csv\n";
    return 0;
}

int cmd_cartography(const std::string& dynamics_path, const std::string& compare_path,
                    const RegionRule& rule, const std::string& out,
                    const std::string& transitions_out) {
    std::vector<std::string> ids;
    const DynamicsRecord dyn = read_dynamics_csv(dynamics_path, &ids);
    const CartographyMap map = compute_map(dyn, rule, ids);
    write_map_csv(out, map);
    std::cout << "wrote " << out << ": " << map.size() << " instances\n";

    if (!compare_path.empty()) {
        std::vector<std::string> ids_b;
        const DynamicsRecord dyn_b = read_dynamics_csv(compare_path, &ids_b);
        const CartographyMap map_b = compute_map(dyn_b, rule, ids_b);
        const TransitionReport tr = transitions(map, map_b);
        json j{{"movers", tr.movers},
               {"stayers", tr.stayers},
               {"no_transitions", tr.no_transitions}};
        json props = json::object();
        json counts = json::object();
        const Region regions[3] = {Region::easy, Region::ambiguous, Region::hard};
        for (Region from : regions) {
            for (Region to : regions) {
                const auto f = static_cast<std::size_t>(from);
                const auto t = static_cast<std::size_t>(to);
                counts[std::string(region_letter(from)) + "->" + region_letter(to)] =
                    tr.counts[f][t];
                if (from != to) {
                    props[std::string(region_letter(from)) + "->" + region_letter(to)] =
                        tr.proportions[f][t];
                }
            }
        }
        j["proportions"] = props;
        j["counts"] = counts;
        const std::string tpath = transitions_out.empty() ? "transitions.json" : transitions_out;
        write_text_atomic(tpath, j.dump(2) + "\n");
        if (tr.no_transitions) std::cout << "no transitions between the two maps\n";
        std::cout << "wrote " << tpath << "\n";
    }
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_override,
              std::uint64_t seed_override, bool seed_set, int jobs_override, bool jobs_set,
              bool resume) {
    ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (seed_set) cfg.base_seed = seed_override;
    if (jobs_set) cfg.jobs = jobs_override;
    const SweepReport report = run_sweep(cfg, resume);
    std::cout << report.format_table();
    std::cout << "report: " << (cfg.output_dir / "report.json").string() << "\n";
    return 0;
}

int cmd_report(const std::string& dir) {
    const std::filesystem::path out_dir(dir);
    const std::filesystem::path config_path = out_dir / "config.json";
    if (!std::filesystem::exists(config_path)) {
        throw ValidationError("no sweep results under " + dir + " (missing config.json)");
    }
    json echo;
    try {
        echo = json::parse(read_text(config_path));
    } catch (const json::exception& e) {
        throw ValidationError("config.json: " + std::string(e.what()));
    }
    ExperimentConfig cfg = ExperimentConfig::from_json(echo);
    cfg.output_dir = out_dir;
    const std::string dataset_name = echo.value("dataset_name", std::string("dataset"));
    const SweepReport report = summarize_directory(cfg, dataset_name);
    std::cout << report.format_table();
    std::cout << "rewrote report.json, accuracy_long.csv, transitions_long.csv under " << dir
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"annosim: multi-annotator budget simulation and analysis toolkit"};
    app.require_subcommand(1);

    int exit_code = 0;
    std::function<int()> action;

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic multi-annotator dataset");
    SyntheticSpec spec;
    spec.num_instances = 2000;
    spec.num_classes = 3;
    spec.feature_dim = 16;
    spec.annotators = 50;
    spec.noise = 0.3;
    spec.seed = 1;
    std::string synth_out = "synthetic.jsonl";
    synth->add_option("--out", synth_out, "output dataset JSONL")->required();
    synth->add_option("--n", spec.num_instances, "number of instances");
    synth->add_option("--classes", spec.num_classes, "number of classes C");
    synth->add_option("--features", spec.feature_dim, "feature dimension F (>= C)");
    synth->add_option("--annotators", spec.annotators, "annotations per instance M");
    synth->add_option("--noise", spec.noise, "annotation noise in [0,1]");
    synth->add_option("--separation", spec.separation, "class centroid separation");
    synth->add_option("--seed", spec.seed, "generator seed");
    synth->add_option("--name", spec.name, "dataset name");
    synth->callback([&]() { action = [&]() { return cmd_synth(spec, synth_out); }; });

    // simulate
    auto* simulate = app.add_subcommand("simulate", "draw a k-annotation subset (Algorithm 1)");
    std::string sim_data, sim_out;
    int sim_k = 1, sim_replicate = 0;
    std::uint64_t sim_seed = 1;
    simulate->add_option("--data", sim_data, "input dataset JSONL")->required();
    simulate->add_option("--k", sim_k, "annotations per instance")->required();
    simulate->add_option("--seed", sim_seed, "base seed");
    simulate->add_option("--replicate", sim_replicate, "replicate index");
    simulate->add_option("--out", sim_out, "output subset JSONL")->required();
    simulate->callback([&]() {
        action = [&]() { return cmd_simulate(sim_data, sim_k, sim_seed, sim_replicate, sim_out); };
    });

    // train
    auto* train = app.add_subcommand("train", "train one model on a simulated subset");
    SingleRunArgs train_args;
    std::string train_out = "train_out";
    train->add_option("--data", train_args.data_path, "input dataset JSONL")->required();
    train->add_option("--mode", train_args.mode, "training objective: ml or ld");
    train->add_option("--k", train_args.k, "annotations per instance (default: all M)");
    train->add_option("--replicate", train_args.replicate, "replicate index");
    train->add_option("--seed", train_args.seed, "base seed (drives split, subset, batches)");
    train->add_option("--feature-source", train_args.feature_source,
                      "auto, provided_vectors, or hashed_bow");
    train->add_option("--feature-dim", train_args.feature_dim, "hashed_bow dimension");
    train->add_option("--out", train_out, "output directory");
    add_train_flags(train, train_args.train);
    train->callback([&]() { action = [&]() { return cmd_train(train_args, train_out); }; });

    // vinfo
    auto* vinfo = app.add_subcommand("vinfo", "V-information and per-instance PVI for one run");
    SingleRunArgs vinfo_args;
    std::string vinfo_out = "vinfo_out";
    vinfo->add_option("--data", vinfo_args.data_path, "input dataset JSONL")->required();
    vinfo->add_option("--mode", vinfo_args.mode, "training objective: ml or ld");
    vinfo->add_option("--k", vinfo_args.k, "annotations per instance (default: all M)");
    vinfo->add_option("--replicate", vinfo_args.replicate, "replicate index");
    vinfo->add_option("--seed", vinfo_args.seed, "base seed");
    vinfo->add_option("--feature-source", vinfo_args.feature_source,
                      "auto, provided_vectors, or hashed_bow");
    vinfo->add_option("--feature-dim", vinfo_args.feature_dim, "hashed_bow dimension");
    vinfo->add_option("--out", vinfo_out, "output directory");
    add_train_flags(vinfo, vinfo_args.train);
    vinfo->callback([&]() { action = [&]() { return cmd_vinfo(vinfo_args, vinfo_out); }; });

    // cartography
    auto* carto = app.add_subcommand("cartography", "confidence/variability map from dynamics");
    std::string carto_dynamics, carto_compare, carto_out = "map.csv", carto_transitions;
    RegionRule rule;
    bool percentile = false;
    carto->add_option("--dynamics", carto_dynamics, "dynamics CSV from train")->required();
    carto->add_option("--compare", carto_compare, "second dynamics CSV for transitions");
    carto->add_option("--tau-v", rule.tau_variability, "ambiguous variability threshold");
    carto->add_option("--tau-c", rule.tau_confidence, "easy confidence threshold");
    carto->add_flag("--percentile", percentile, "use the percentile region rule");
    carto->add_option("--out", carto_out, "output map CSV");
    carto->add_option("--transitions-out", carto_transitions, "transition report JSON");
    carto->callback([&]() {
        action = [&]() {
            if (percentile) rule.mode = RegionRule::Mode::percentile;
            return cmd_cartography(carto_dynamics, carto_compare, rule, carto_out, carto_transitions);
        };
    });

    // sweep
    auto* sweep = app.add_subcommand("sweep", "run the full k-sweep protocol from a config file");
    std::string sweep_config, sweep_out;
    std::uint64_t sweep_seed = 0;
    int sweep_jobs = 0;
    bool sweep_resume = false;
    auto* seed_opt = sweep->add_option("--seed", sweep_seed, "override base_seed");
    auto* jobs_opt = sweep->add_option("--jobs", sweep_jobs, "worker count (default: cores)");
    sweep->add_option("--config", sweep_config, "experiment config JSON")->required();
    sweep->add_option("--out", sweep_out, "override output directory");
    sweep->add_flag("--resume", sweep_resume, "reuse existing cell artifacts");
    sweep->callback([&]() {
        action = [&]() {
            return cmd_sweep(sweep_config, sweep_out, sweep_seed, seed_opt->count() > 0, sweep_jobs,
                             jobs_opt->count() > 0, sweep_resume);
        };
    });

    // report
    auto* report = app.add_subcommand("report", "re-render tables and plot CSVs from a sweep dir");
    std::string report_dir;
    report->add_option("--dir", report_dir, "sweep output directory")->required();
    report->callback([&]() { action = [&]() { return cmd_report(report_dir); }; });

    try {
        app.parse(argc, argv);
        exit_code = action ? action() : 2;
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const CellError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return exit_code;
}
