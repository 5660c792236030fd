#include "annosim/targets.hpp"

#include "annosim/error.hpp"

namespace annosim {

const char* target_mode_name(TargetMode mode) {
    return mode == TargetMode::ml ? "ml" : "ld";
}

const char* eval_mode_name(EvalMode mode) {
    switch (mode) {
        case EvalMode::ml: return "ml";
        case EvalMode::ld: return "ld";
        case EvalMode::absolute_gt: return "absolute_gt";
    }
    return "?";
}

int argmax_lowest(std::span<const double> values, bool* tie_out) {
    int best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
    }
    if (tie_out) {
        int hits = 0;
        for (double v : values) {
            if (v == values[static_cast<std::size_t>(best)]) ++hits;
        }
        *tie_out = hits > 1;
    }
    return best;
}

namespace {

std::vector<int> count_classes(std::span<const int> annotations, int num_classes) {
    std::vector<int> counts(static_cast<std::size_t>(num_classes), 0);
    for (int a : annotations) {
        if (a < 0 || a >= num_classes) {
            throw ValidationError("annotation class index " + std::to_string(a) +
                                  " outside [0, " + std::to_string(num_classes) + ")");
        }
        ++counts[static_cast<std::size_t>(a)];
    }
    return counts;
}

int majority_of_counts(std::span<const int> counts, bool* tie_out) {
    int best = 0;
    for (std::size_t i = 1; i < counts.size(); ++i) {
        if (counts[i] > counts[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
    }
    if (tie_out) {
        int hits = 0;
        for (int c : counts) {
            if (c == counts[static_cast<std::size_t>(best)]) ++hits;
        }
        *tie_out = hits > 1;
    }
    return best;
}

}  // namespace

std::vector<double> label_distribution(std::span<const int> annotations, int num_classes) {
    if (annotations.empty()) throw ValidationError("label_distribution: empty annotation list");
    const std::vector<int> counts = count_classes(annotations, num_classes);
    std::vector<double> dist(counts.size());
    const double k = static_cast<double>(annotations.size());
    for (std::size_t i = 0; i < counts.size(); ++i) dist[i] = static_cast<double>(counts[i]) / k;
    return dist;
}

int majority_label(std::span<const int> annotations, int num_classes) {
    if (annotations.empty()) throw ValidationError("majority_label: empty annotation list");
    const std::vector<int> counts = count_classes(annotations, num_classes);
    return majority_of_counts(counts, nullptr);
}

namespace {

double accuracy_against_gold(const Matrix& pred_probs, const EvalTargets& targets) {
    if (pred_probs.rows != targets.size()) {
        throw ValidationError("accuracy: " + std::to_string(pred_probs.rows) +
                              " predictions vs " + std::to_string(targets.size()) + " targets");
    }
    if (static_cast<int>(pred_probs.cols) != targets.num_classes) {
        throw ValidationError("accuracy: class count mismatch");
    }
    if (targets.size() == 0) throw ValidationError("accuracy: empty target set");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred_probs.rows; ++i) {
        if (argmax_lowest(pred_probs.row(i)) == targets.gold[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(targets.size());
}

}  // namespace

double accuracy_ml(const Matrix& pred_probs, const EvalTargets& targets) {
    return accuracy_against_gold(pred_probs, targets);
}

double accuracy_ld(const Matrix& pred_probs, const EvalTargets& targets) {
    if (targets.dists.rows != targets.size()) {
        throw ValidationError("accuracy_ld: targets carry no distributions");
    }
    return accuracy_against_gold(pred_probs, targets);
}

TrainTargets make_train_targets(const AnnotatorSubset& subset, int num_classes, TargetMode mode) {
    TrainTargets t;
    t.mode = mode;
    t.num_classes = num_classes;
    const std::size_t n = subset.size();
    t.gold.reserve(n);
    if (mode == TargetMode::ml) {
        t.labels.reserve(n);
        for (const auto& ann : subset.annotations) {
            const std::vector<int> counts = count_classes(ann, num_classes);
            bool tie = false;
            const int maj = majority_of_counts(counts, &tie);
            if (tie) ++t.tie_count;
            t.labels.push_back(maj);
            t.gold.push_back(maj);
        }
    } else {
        t.dists = Matrix(n, static_cast<std::size_t>(num_classes));
        for (std::size_t i = 0; i < n; ++i) {
            const std::vector<double> dist = label_distribution(subset.annotations[i], num_classes);
            for (std::size_t c = 0; c < dist.size(); ++c) t.dists.at(i, c) = dist[c];
            bool tie = false;
            t.gold.push_back(argmax_lowest(dist, &tie));
            if (tie) ++t.tie_count;
        }
    }
    return t;
}

EvalTargets make_eval_targets(const AnnotatorSubset& subset, int num_classes, EvalMode mode) {
    if (mode == EvalMode::absolute_gt) {
        throw ValidationError("absolute_gt eval targets come from the full dataset, not a subset");
    }
    EvalTargets t;
    t.mode = mode;
    t.num_classes = num_classes;
    const std::size_t n = subset.size();
    t.gold.reserve(n);
    if (mode == EvalMode::ld) t.dists = Matrix(n, static_cast<std::size_t>(num_classes));
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<int> counts = count_classes(subset.annotations[i], num_classes);
        bool tie = false;
        const int maj = majority_of_counts(counts, &tie);
        if (tie) ++t.tie_count;
        t.gold.push_back(maj);
        if (mode == EvalMode::ld) {
            const double k = static_cast<double>(subset.annotations[i].size());
            for (std::size_t c = 0; c < counts.size(); ++c) {
                t.dists.at(i, c) = static_cast<double>(counts[c]) / k;
            }
        }
    }
    return t;
}

EvalTargets absolute_gt_targets(const Dataset& ds) {
    ds.validate();
    EvalTargets t;
    t.mode = EvalMode::absolute_gt;
    t.num_classes = ds.num_classes();
    const std::size_t n = ds.size();
    t.gold.reserve(n);
    t.dists = Matrix(n, static_cast<std::size_t>(t.num_classes));
    const double m = static_cast<double>(ds.annotator_count);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& counts = ds.instances[i].label_counts;
        bool tie = false;
        const int maj = majority_of_counts(counts, &tie);
        if (tie) ++t.tie_count;
        t.gold.push_back(maj);
        for (std::size_t c = 0; c < counts.size(); ++c) {
            t.dists.at(i, c) = static_cast<double>(counts[c]) / m;
        }
    }
    return t;
}

}  // namespace annosim
