#include "annosim/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "annosim/error.hpp"
#include "annosim/io.hpp"
#include "annosim/rng.hpp"

namespace annosim {

using nlohmann::json;

std::optional<std::size_t> Dataset::feature_dim() const {
    for (const auto& inst : instances) {
        if (inst.features) return inst.features->size();
    }
    return std::nullopt;
}

void Dataset::validate() const {
    if (num_classes() < 2) throw ValidationError("dataset needs at least 2 classes");
    if (annotator_count < 1) throw ValidationError("annotator count M must be >= 1");
    if (instances.empty()) throw ValidationError("dataset is empty");

    const std::optional<std::size_t> fdim = feature_dim();
    std::set<std::string> seen;
    for (const auto& inst : instances) {
        if (inst.id.empty()) throw ValidationError("instance with empty id");
        if (!seen.insert(inst.id).second) throw ValidationError("duplicate id: " + inst.id);
        if (!inst.text && !inst.features) {
            throw ValidationError("instance " + inst.id + " has neither text nor features");
        }
        if (inst.features && fdim && inst.features->size() != *fdim) {
            throw ValidationError("inconsistent feature dimension at instance " + inst.id);
        }
        if (static_cast<int>(inst.label_counts.size()) != num_classes()) {
            throw ValidationError("instance " + inst.id + " has " +
                                  std::to_string(inst.label_counts.size()) +
                                  " label counts, expected " + std::to_string(num_classes()));
        }
        long long sum = 0;
        for (int c : inst.label_counts) {
            if (c < 0) throw ValidationError("negative label count at instance " + inst.id);
            sum += c;
        }
        if (sum != annotator_count) {
            throw ValidationError("inconsistent annotation count at instance " + inst.id +
                                  ": sum " + std::to_string(sum) + ", expected " +
                                  std::to_string(annotator_count));
        }
    }
}

void SplitSpec::validate() const {
    if (train_fraction <= 0 || dev_fraction <= 0 || test_fraction <= 0) {
        throw ValidationError("split fractions must all be > 0");
    }
    const double sum = train_fraction + dev_fraction + test_fraction;
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ValidationError("split fractions must sum to 1");
    }
}

namespace {

std::vector<std::string> default_class_labels(std::size_t c) {
    std::vector<std::string> labels;
    labels.reserve(c);
    for (std::size_t i = 0; i < c; ++i) labels.push_back("class_" + std::to_string(i));
    return labels;
}

[[noreturn]] void line_error(std::size_t line_no, const std::string& what) {
    throw ValidationError("line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& path, DataFormat format) {
    (void)format;  // jsonl is the only format
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset file: " + path.string());

    Dataset ds;
    ds.name = path.stem().string();

    std::optional<int> declared_m;
    bool have_header_labels = false;

    std::string line;
    std::size_t line_no = 0;
    bool first_record = true;
    long long expected_sum = -1;
    std::set<std::string> seen_ids;
    std::optional<std::size_t> fdim;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            line_error(line_no, std::string("malformed record: ") + e.what());
        }
        if (!rec.is_object()) line_error(line_no, "record is not a JSON object");

        if (rec.value("header", false)) {
            if (!first_record || !ds.instances.empty()) line_error(line_no, "header must be the first line");
            if (rec.contains("class_labels")) {
                if (!rec["class_labels"].is_array()) line_error(line_no, "class_labels must be an array");
                ds.class_labels = rec["class_labels"].get<std::vector<std::string>>();
                have_header_labels = true;
            }
            if (rec.contains("annotators")) {
                if (!rec["annotators"].is_number_integer()) line_error(line_no, "annotators must be an integer");
                declared_m = rec["annotators"].get<int>();
            }
            first_record = false;
            continue;
        }
        first_record = false;

        Instance inst;
        if (!rec.contains("id") || !rec["id"].is_string()) line_error(line_no, "missing string field \"id\"");
        inst.id = rec["id"].get<std::string>();
        if (!seen_ids.insert(inst.id).second) line_error(line_no, "duplicate id: " + inst.id);

        if (rec.contains("text")) {
            if (!rec["text"].is_string()) line_error(line_no, "text must be a string");
            inst.text = rec["text"].get<std::string>();
        }
        if (rec.contains("features")) {
            if (!rec["features"].is_array()) line_error(line_no, "features must be an array");
            try {
                inst.features = rec["features"].get<std::vector<double>>();
            } catch (const json::exception&) {
                line_error(line_no, "features must be numbers");
            }
            if (!fdim) fdim = inst.features->size();
            else if (inst.features->size() != *fdim) line_error(line_no, "inconsistent feature dimension");
        }
        if (!inst.text && !inst.features) line_error(line_no, "instance needs text or features");

        if (!rec.contains("label_counts") || !rec["label_counts"].is_array()) {
            line_error(line_no, "missing array field \"label_counts\"");
        }
        for (const auto& v : rec["label_counts"]) {
            if (!v.is_number_integer() || v.get<long long>() < 0) {
                line_error(line_no, "label_counts must be non-negative integers");
            }
            inst.label_counts.push_back(v.get<int>());
        }
        if (inst.label_counts.empty()) line_error(line_no, "label_counts is empty");

        if (have_header_labels && inst.label_counts.size() != ds.class_labels.size()) {
            line_error(line_no, "label_counts length does not match class_labels");
        }
        if (!ds.instances.empty() && inst.label_counts.size() != ds.instances.front().label_counts.size()) {
            line_error(line_no, "label_counts length differs from previous records");
        }

        long long sum = 0;
        for (int c : inst.label_counts) sum += c;
        if (expected_sum < 0) {
            expected_sum = sum;
        } else if (sum != expected_sum) {
            line_error(line_no, "inconsistent annotation count: sum " + std::to_string(sum) +
                                    ", expected " + std::to_string(expected_sum));
        }

        ds.instances.push_back(std::move(inst));
    }

    if (ds.instances.empty()) throw ValidationError("dataset file has no instances: " + path.string());
    if (!have_header_labels) ds.class_labels = default_class_labels(ds.instances.front().label_counts.size());

    ds.annotator_count = static_cast<int>(expected_sum);
    if (declared_m && *declared_m != ds.annotator_count) {
        throw ValidationError("header declares annotators=" + std::to_string(*declared_m) +
                              " but counts sum to " + std::to_string(ds.annotator_count));
    }

    ds.validate();
    return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path, DataFormat format) {
    (void)format;
    std::string out;
    {
        json header{{"header", true},
                    {"class_labels", ds.class_labels},
                    {"annotators", ds.annotator_count}};
        out += header.dump();
        out += '\n';
    }
    for (const auto& inst : ds.instances) {
        json rec{{"id", inst.id}, {"label_counts", inst.label_counts}};
        if (inst.text) rec["text"] = *inst.text;
        if (inst.features) rec["features"] = *inst.features;
        out += rec.dump();
        out += '\n';
    }
    write_text_atomic(path, out);
}

Split split(const Dataset& ds, const SplitSpec& spec) {
    spec.validate();
    ds.validate();

    const std::size_t n = ds.size();
    const auto n_dev = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.dev_fraction));
    const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.test_fraction));
    if (n_dev == 0 || n_test == 0 || n_dev + n_test >= n) {
        throw ValidationError("split would produce an empty part (N=" + std::to_string(n) + ")");
    }
    const std::size_t n_train = n - n_dev - n_test;

    struct Ranked {
        std::uint64_t rank;
        std::size_t index;
    };
    std::vector<Ranked> ranked;
    ranked.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t h = stream_seed({seed_tag::split, spec.seed, fnv1a64(ds.instances[i].id)});
        ranked.push_back({h, i});
    }
    std::sort(ranked.begin(), ranked.end(), [&](const Ranked& a, const Ranked& b) {
        if (a.rank != b.rank) return a.rank < b.rank;
        return ds.instances[a.index].id < ds.instances[b.index].id;
    });

    auto make_part = [&](std::size_t begin, std::size_t count, const char* suffix) {
        Dataset part;
        part.name = ds.name + "." + suffix;
        part.class_labels = ds.class_labels;
        part.annotator_count = ds.annotator_count;
        part.instances.reserve(count);
        for (std::size_t i = begin; i < begin + count; ++i) {
            part.instances.push_back(ds.instances[ranked[i].index]);
        }
        return part;
    };

    Split result;
    result.train = make_part(0, n_train, "train");
    result.dev = make_part(n_train, n_dev, "dev");
    result.test = make_part(n_train + n_dev, n_test, "test");
    return result;
}

}  // namespace annosim
