#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "annosim/data.hpp"

namespace annosim {

// Synthetic multi-annotator dataset with a known generating process, so the
// Bayes-optimal decision rule is available as a test oracle. Each instance
// draws a true class uniformly, Gaussian features around that class's
// centroid, and M annotations from a fixed conditional
//   pi(j | z) = (1 - noise) * [j == z] + noise / C.
// noise = 0 makes every instance unanimous; noise = 1 makes the conditional
// uniform.
struct SyntheticSpec {
    std::string name = "synthetic";
    int num_instances = 0;  // N
    int num_classes = 0;    // C
    int feature_dim = 0;    // F, must be >= C so centroids stay distinct
    int annotators = 0;     // M
    double noise = 0.0;
    double separation = 2.0;
    std::uint64_t seed = 0;

    void validate() const;

    std::vector<double> centroid(int cls) const;
    std::vector<double> conditional(int true_cls) const;

    // Nearest-centroid rule: Bayes-optimal for the true class under equal
    // priors and isotropic unit-variance features.
    int bayes_class(std::span<const double> features) const;
};

Dataset make_synthetic(const SyntheticSpec& spec, std::vector<int>* true_class_out = nullptr);

}  // namespace annosim
