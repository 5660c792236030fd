#include "annosim/simulate.hpp"

#include <fstream>

#include <json.hpp>

#include "annosim/error.hpp"
#include "annosim/io.hpp"
#include "annosim/rng.hpp"

namespace annosim {

using nlohmann::json;

std::vector<int> expand_counts(std::span<const int> counts) {
    std::vector<int> out;
    std::size_t total = 0;
    for (int c : counts) total += static_cast<std::size_t>(c);
    out.reserve(total);
    for (std::size_t cls = 0; cls < counts.size(); ++cls) {
        for (int i = 0; i < counts[cls]; ++i) out.push_back(static_cast<int>(cls));
    }
    return out;
}

namespace {

std::vector<int> draw_annotations(const Instance& inst, int k, std::uint64_t base_seed,
                                  int replicate_index) {
    std::vector<int> list = expand_counts(inst.label_counts);
    SplitMix64 rng(stream_seed({seed_tag::subset_shuffle, base_seed,
                                static_cast<std::uint64_t>(replicate_index), fnv1a64(inst.id)}));
    fisher_yates(list, rng);
    list.resize(static_cast<std::size_t>(k));
    return list;
}

}  // namespace

AnnotatorSubset build_subset(const Dataset& ds, int k, std::uint64_t base_seed,
                             int replicate_index) {
    if (k < 1 || k > ds.annotator_count) {
        throw ValidationError("k must satisfy 1 <= k <= M (got k=" + std::to_string(k) +
                              ", M=" + std::to_string(ds.annotator_count) + ")");
    }
    if (replicate_index < 0) throw ValidationError("replicate_index must be >= 0");

    AnnotatorSubset subset;
    subset.source_name = ds.name;
    subset.k = k;
    subset.replicate_index = replicate_index;
    subset.base_seed = base_seed;
    subset.ids.reserve(ds.size());
    subset.annotations.reserve(ds.size());
    for (const auto& inst : ds.instances) {
        subset.ids.push_back(inst.id);
        subset.annotations.push_back(draw_annotations(inst, k, base_seed, replicate_index));
    }
    return subset;
}

std::vector<AnnotatorSubset> build_sweep(const Dataset& ds, const std::vector<int>& ks,
                                         int replicates, std::uint64_t base_seed) {
    if (ks.empty()) throw ValidationError("ks must not be empty");
    if (replicates < 1) throw ValidationError("replicates must be >= 1");
    for (int k : ks) {
        if (k < 1 || k > ds.annotator_count) {
            throw ValidationError("k=" + std::to_string(k) + " outside [1, M=" +
                                  std::to_string(ds.annotator_count) + "]");
        }
    }

    std::vector<AnnotatorSubset> out;
    out.reserve(static_cast<std::size_t>(replicates) * ks.size());
    for (int r = 0; r < replicates; ++r) {
        // One shuffle of the full list per (instance, replicate); every k
        // slices a prefix of it. Identical to calling build_subset per k.
        std::vector<std::vector<int>> full;
        full.reserve(ds.size());
        for (const auto& inst : ds.instances) {
            full.push_back(draw_annotations(inst, ds.annotator_count, base_seed, r));
        }
        for (int k : ks) {
            AnnotatorSubset subset;
            subset.source_name = ds.name;
            subset.k = k;
            subset.replicate_index = r;
            subset.base_seed = base_seed;
            subset.ids.reserve(ds.size());
            subset.annotations.reserve(ds.size());
            for (std::size_t i = 0; i < ds.size(); ++i) {
                subset.ids.push_back(ds.instances[i].id);
                subset.annotations.emplace_back(full[i].begin(), full[i].begin() + k);
            }
            out.push_back(std::move(subset));
        }
    }
    return out;
}

void save_subset(const AnnotatorSubset& subset, const std::filesystem::path& path) {
    std::string out;
    {
        json header{{"header", true},
                    {"k", subset.k},
                    {"replicate_index", subset.replicate_index},
                    {"base_seed", subset.base_seed},
                    {"source_name", subset.source_name}};
        out += header.dump();
        out += '\n';
    }
    for (std::size_t i = 0; i < subset.size(); ++i) {
        json rec{{"id", subset.ids[i]}, {"annotations", subset.annotations[i]}};
        out += rec.dump();
        out += '\n';
    }
    write_text_atomic(path, out);
}

AnnotatorSubset load_subset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open subset file: " + path.string());

    AnnotatorSubset subset;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw ValidationError("line " + std::to_string(line_no) + ": malformed record: " + e.what());
        }
        if (rec.value("header", false)) {
            if (have_header || !subset.ids.empty()) {
                throw ValidationError("line " + std::to_string(line_no) + ": unexpected header");
            }
            subset.k = rec.at("k").get<int>();
            subset.replicate_index = rec.at("replicate_index").get<int>();
            subset.base_seed = rec.at("base_seed").get<std::uint64_t>();
            subset.source_name = rec.value("source_name", std::string{});
            have_header = true;
            continue;
        }
        subset.ids.push_back(rec.at("id").get<std::string>());
        subset.annotations.push_back(rec.at("annotations").get<std::vector<int>>());
    }
    if (!have_header) throw ValidationError("subset file lacks a header line: " + path.string());
    for (std::size_t i = 0; i < subset.size(); ++i) {
        if (static_cast<int>(subset.annotations[i].size()) != subset.k) {
            throw ValidationError("subset row " + subset.ids[i] + " has " +
                                  std::to_string(subset.annotations[i].size()) +
                                  " annotations, expected k=" + std::to_string(subset.k));
        }
    }
    return subset;
}

}  // namespace annosim
