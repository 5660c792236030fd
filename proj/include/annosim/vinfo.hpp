#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "annosim/matrix.hpp"
#include "annosim/model.hpp"

namespace annosim {

enum class GoldSource { ml_majority, ld_argmax };

const char* gold_source_name(GoldSource source);

// Everything computed from one (conditional model, null model) pair on one
// set of instances. All quantities are in bits. The invariant
// v_information == h_y - h_y_given_x and mean(pvi) == v_information hold by
// construction when the fields come from compute_vinfo.
struct VInfoReport {
    double h_y = 0.0;
    double h_y_given_x = 0.0;
    double v_information = 0.0;
    std::vector<double> pvi;
    std::vector<double> p_null;   // null-model probability of the gold label
    std::vector<double> p_model;  // conditional-model probability of the gold label
    std::vector<int> gold;
    GoldSource gold_source = GoldSource::ml_majority;
    std::string eval_split = "test";
    int clamped = 0;        // probabilities floored at 1e-12 before the log
    bool negative = false;  // v_information < 0 (overfit / misfit signal)
};

// Mean over instances of -log2 p_null(y*).
double v_entropy(const ModelState& null_model, std::span<const int> gold, int* clamped = nullptr);

// Mean over instances of -log2 p_model(y* | x).
double conditional_v_entropy(const ModelState& model, const Matrix& features,
                             std::span<const int> gold, int* clamped = nullptr);

double v_information(double h_y, double h_y_given_x);

// Pointwise difference -log2 p_null(y*) + log2 p_model(y*|x); negative when
// the input-free model predicts the instance better than the conditional one.
double pvi(const ModelState& model, const ModelState& null_model,
           std::span<const double> feature, int gold_label);

VInfoReport compute_vinfo(const ModelState& model, const ModelState& null_model,
                          const Matrix& features, std::span<const int> gold,
                          GoldSource gold_source, std::string eval_split);

// CSV columns: instance_id, pvi, gold, p_null, p_model.
void write_pvi_csv(const std::filesystem::path& path, std::span<const std::string> ids,
                   const VInfoReport& report);

}  // namespace annosim
