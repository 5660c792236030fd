#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace annosim {

// One row of a multi-annotator dataset: the instance payload plus its
// label-count vector (how many of the M annotators picked each class).
struct Instance {
    std::string id;
    std::optional<std::string> text;
    std::optional<std::vector<double>> features;
    std::vector<int> label_counts;

    bool operator==(const Instance&) const = default;
};

struct Dataset {
    std::string name;
    std::vector<std::string> class_labels;
    int annotator_count = 0;  // M: every instance's counts sum to this
    std::vector<Instance> instances;

    int num_classes() const { return static_cast<int>(class_labels.size()); }
    std::size_t size() const { return instances.size(); }

    // Common feature dimension, or nullopt when no instance carries vectors.
    std::optional<std::size_t> feature_dim() const;

    // Throws ValidationError on any broken invariant (counts not summing
    // to M, duplicate ids, inconsistent feature dimensions, ...).
    void validate() const;

    bool operator==(const Dataset&) const = default;
};

struct SplitSpec {
    double train_fraction = 0.8;
    double dev_fraction = 0.1;
    double test_fraction = 0.1;
    std::uint64_t seed = 0;

    void validate() const;
};

struct Split {
    Dataset train;
    Dataset dev;
    Dataset test;
};

enum class DataFormat { jsonl };

// JSONL loader: one record per line
//   {"id": str, "text": str?, "features": [float]?, "label_counts": [int]}
// with an optional first header line
//   {"header": true, "class_labels": [str], "annotators": int}.
// M is inferred as the common sum of label_counts and cross-checked against
// a declared header value. Unknown header keys are ignored.
Dataset load_dataset(const std::filesystem::path& path, DataFormat format = DataFormat::jsonl);

void save_dataset(const Dataset& ds, const std::filesystem::path& path,
                  DataFormat format = DataFormat::jsonl);

// Deterministic disjoint partition. Membership depends only on the instance
// ids and the seed: ids are ranked by a per-id hash, so shuffling the file
// on disk never changes which split an instance lands in. Rounded-down dev
// and test sizes; the remainder goes to train.
Split split(const Dataset& ds, const SplitSpec& spec);

}  // namespace annosim
