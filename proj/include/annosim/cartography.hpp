#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "annosim/model.hpp"

namespace annosim {

enum class Region { easy = 0, ambiguous = 1, hard = 2 };

const char* region_name(Region r);    // "easy" / "ambiguous" / "hard"
const char* region_letter(Region r);  // "e" / "a" / "h"
Region region_from_letter(const std::string& s);

// How (confidence, variability) pairs map to regions. The absolute rule is
// the default: high variability wins first, then confidence splits the rest.
// The percentile rule assigns the top third by variability to ambiguous and
// splits the remainder at the median confidence.
struct RegionRule {
    enum class Mode { absolute, percentile };
    Mode mode = Mode::absolute;
    double tau_variability = 0.25;
    double tau_confidence = 0.5;
};

// Per training instance: mean gold-label probability across epochs
// (confidence), the population standard deviation of that series
// (variability), and the assigned difficulty region.
struct CartographyMap {
    std::vector<std::string> ids;  // may be empty when built from a bare matrix
    std::vector<double> confidence;
    std::vector<double> variability;
    std::vector<Region> region;
    int k = 0;
    int replicate_index = 0;

    std::size_t size() const { return confidence.size(); }
};

// Region movement between two maps over the same instances. counts[from][to]
// includes the diagonal (stayers); proportions cover only the six
// off-diagonal cells and are normalized by the number of movers, so they sum
// to 1 whenever any instance changed region.
struct TransitionReport {
    std::array<std::array<std::int64_t, 3>, 3> counts{};
    std::array<std::array<double, 3>, 3> proportions{};
    std::int64_t movers = 0;
    std::int64_t stayers = 0;
    bool no_transitions = false;
};

CartographyMap compute_map(const DynamicsRecord& dynamics, const RegionRule& rule,
                           std::vector<std::string> ids = {}, int k = 0, int replicate_index = 0);

TransitionReport transitions(const CartographyMap& map_a, const CartographyMap& map_b);

// CSV columns: instance_id, confidence, variability, region, k, replicate.
void write_map_csv(const std::filesystem::path& path, const CartographyMap& map);

}  // namespace annosim
