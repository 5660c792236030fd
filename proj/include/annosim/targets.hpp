#pragma once

#include <span>
#include <string>
#include <vector>

#include "annosim/data.hpp"
#include "annosim/matrix.hpp"
#include "annosim/simulate.hpp"

namespace annosim {

enum class TargetMode { ml, ld };

const char* target_mode_name(TargetMode mode);  // "ml" / "ld"

// Per-instance training targets aggregated from annotation lists.
// ML: the majority class id. LD: the empirical label distribution.
// `gold` is always populated (ML: the label itself; LD: argmax of the
// distribution) and is what dynamics recording and PVI use as y*.
struct TrainTargets {
    TargetMode mode = TargetMode::ml;
    int num_classes = 0;
    std::vector<int> labels;  // ml only
    Matrix dists;             // ld only, n x C
    std::vector<int> gold;
    std::size_t tie_count = 0;  // instances whose majority/argmax was a tie

    std::size_t size() const { return gold.size(); }
};

enum class EvalMode { ml, ld, absolute_gt };

const char* eval_mode_name(EvalMode mode);

struct EvalTargets {
    EvalMode mode = EvalMode::ml;
    int num_classes = 0;
    std::vector<int> gold;  // class to compare the prediction argmax against
    Matrix dists;           // populated for ld and absolute_gt
    std::size_t tie_count = 0;

    std::size_t size() const { return gold.size(); }
};

// Relative frequency of each class among the annotations; entries sum to 1.
std::vector<double> label_distribution(std::span<const int> annotations, int num_classes);

// Most frequent class; ties broken toward the lowest class index.
int majority_label(std::span<const int> annotations, int num_classes);

// Fraction of instances whose prediction argmax equals the majority label.
// Prediction argmax ties also break toward the lowest index.
double accuracy_ml(const Matrix& pred_probs, const EvalTargets& targets);

// Same, against the argmax of the target label distribution.
double accuracy_ld(const Matrix& pred_probs, const EvalTargets& targets);

TrainTargets make_train_targets(const AnnotatorSubset& subset, int num_classes, TargetMode mode);
EvalTargets make_eval_targets(const AnnotatorSubset& subset, int num_classes, EvalMode mode);

// Evaluation targets from the full M-annotation counts, independent of any
// training k: majority label and full-count distribution per instance.
EvalTargets absolute_gt_targets(const Dataset& ds);

// Lowest-index argmax; tie_out (optional) reports whether the max was tied.
int argmax_lowest(std::span<const double> values, bool* tie_out = nullptr);

}  // namespace annosim
