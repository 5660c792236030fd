#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "annosim/data.hpp"
#include "annosim/matrix.hpp"
#include "annosim/targets.hpp"

namespace annosim {

enum class FeatureSource { provided_vectors, hashed_bow };

struct FeatureConfig {
    FeatureSource source = FeatureSource::provided_vectors;
    // Required for hashed_bow; for provided_vectors 0 means "infer from data".
    int dimension = 0;
    std::uint64_t hash_seed = 0;
    bool lowercase = true;
};

struct TrainConfig {
    double learning_rate = 0.05;
    double weight_decay = 0.0;
    int epochs = 6;
    int batch_size = 32;  // clamped to the training-set size
    std::uint64_t seed = 0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;

    void validate() const;

    bool operator==(const TrainConfig&) const = default;
};

// Multinomial softmax regression: logits = W x + b. The null (input-free)
// model is the same state with feature_dim = 0, so its logits are just b.
struct ModelState {
    int num_classes = 0;
    int feature_dim = 0;
    Matrix weights;            // C x F
    std::vector<double> bias;  // C
    TrainConfig config;
    double final_loss = 0.0;

    bool operator==(const ModelState&) const = default;
};

// Softmax probability of each training instance's gold label, recorded
// after every epoch. Rows follow the training-set order, columns epochs.
struct DynamicsRecord {
    Matrix gold_prob;  // N x E

    std::size_t num_instances() const { return gold_prob.rows; }
    std::size_t num_epochs() const { return gold_prob.cols; }
};

struct FitResult {
    ModelState model;
    std::optional<DynamicsRecord> dynamics;
    std::vector<double> epoch_losses;  // full-set mean cross-entropy after each epoch
};

// Mean cross-entropy (natural log) and its gradient over the given rows.
struct LossGrad {
    double loss = 0.0;
    Matrix grad_weights;
    std::vector<double> grad_bias;
};

// Feature matrix per the config. hashed_bow splits text into maximal
// alphanumeric runs, hashes each token into one of F columns, and
// L2-normalizes every row (all-zero rows stay zero).
Matrix featurize(const Dataset& ds, const FeatureConfig& cfg);

std::vector<std::string> tokenize(std::string_view text, bool lowercase);

// Minimizes the mean cross-entropy between softmax(Wx+b) and the targets
// (one-hot majority for ML, the label distribution for LD) with mini-batch
// AdamW from a zero initialization. Deterministic given (features, targets,
// cfg). When record_gold is given, the probability assigned to each
// instance's gold label is recorded after every epoch.
FitResult fit(const Matrix& features, const TrainTargets& targets, const TrainConfig& cfg,
              const std::vector<int>* record_gold = nullptr);

// Bias-only fit on the same objective (weights stay absent); at the optimum
// the predictive distribution equals the empirical mean target distribution.
ModelState fit_null(const TrainTargets& targets, const TrainConfig& cfg);

// Row-wise softmax(Wx+b); every row sums to 1.
Matrix predict_proba(const ModelState& model, const Matrix& features);

// The constant distribution a feature-free model predicts for any input.
std::vector<double> null_distribution(const ModelState& model);

double mean_cross_entropy(const ModelState& model, const Matrix& features,
                          const TrainTargets& targets);

LossGrad loss_and_grad(const ModelState& model, const Matrix& features,
                       const TrainTargets& targets, std::span<const std::size_t> batch);

void save_model(const ModelState& model, const std::filesystem::path& path);
ModelState load_model(const std::filesystem::path& path);

// CSV columns: instance_id, epoch, gold_prob.
void write_dynamics_csv(const std::filesystem::path& path, std::span<const std::string> ids,
                        const DynamicsRecord& dynamics);
DynamicsRecord read_dynamics_csv(const std::filesystem::path& path,
                                 std::vector<std::string>* ids_out = nullptr);

}  // namespace annosim
