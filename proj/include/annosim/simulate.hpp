#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "annosim/data.hpp"

namespace annosim {

// A dataset restricted to the first k simulated annotations per instance.
// Rows align with `ids`; each row holds exactly k class indices.
struct AnnotatorSubset {
    std::string source_name;
    int k = 0;
    int replicate_index = 0;
    std::uint64_t base_seed = 0;
    std::vector<std::string> ids;
    std::vector<std::vector<int>> annotations;

    std::size_t size() const { return ids.size(); }

    bool operator==(const AnnotatorSubset&) const = default;
};

// Canonical expansion of a count vector into an annotation list:
// class 0 repeated counts[0] times, then class 1, and so on.
std::vector<int> expand_counts(std::span<const int> counts);

// Expands each instance's counts, shuffles the list with a Fisher-Yates
// permutation, and keeps the first k entries. The shuffle stream is seeded
// per instance from (base_seed, replicate_index, id) — never from k — so
// within a replicate the k-subset is always a prefix of the (k+1)-subset:
// growing the budget adds annotators, it never resamples the old ones.
AnnotatorSubset build_subset(const Dataset& ds, int k, std::uint64_t base_seed,
                             int replicate_index);

// All (k, replicate) combinations, replicate-major: replicate r of every k
// shares replicate_index = r, so prefix nesting holds across k within r.
std::vector<AnnotatorSubset> build_sweep(const Dataset& ds, const std::vector<int>& ks,
                                         int replicates, std::uint64_t base_seed);

// JSONL: a header line {"header":true,"k":..,"replicate_index":..,
// "base_seed":..,"source_name":..} followed by {"id":..,"annotations":[..]}.
void save_subset(const AnnotatorSubset& subset, const std::filesystem::path& path);
AnnotatorSubset load_subset(const std::filesystem::path& path);

}  // namespace annosim
