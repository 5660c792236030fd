#include "annosim/cartography.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "annosim/error.hpp"
#include "annosim/io.hpp"

namespace annosim {

const char* region_name(Region r) {
    switch (r) {
        case Region::easy: return "easy";
        case Region::ambiguous: return "ambiguous";
        case Region::hard: return "hard";
    }
    return "?";
}

const char* region_letter(Region r) {
    switch (r) {
        case Region::easy: return "e";
        case Region::ambiguous: return "a";
        case Region::hard: return "h";
    }
    return "?";
}

Region region_from_letter(const std::string& s) {
    if (s == "e") return Region::easy;
    if (s == "a") return Region::ambiguous;
    if (s == "h") return Region::hard;
    throw ValidationError("unknown region letter: " + s);
}

namespace {

void assign_absolute(CartographyMap& map, const RegionRule& rule) {
    map.region.reserve(map.size());
    for (std::size_t i = 0; i < map.size(); ++i) {
        if (map.variability[i] >= rule.tau_variability) {
            map.region.push_back(Region::ambiguous);
        } else if (map.confidence[i] >= rule.tau_confidence) {
            map.region.push_back(Region::easy);
        } else {
            map.region.push_back(Region::hard);
        }
    }
}

void assign_percentile(CartographyMap& map) {
    const std::size_t n = map.size();
    map.region.assign(n, Region::hard);

    std::vector<std::size_t> by_var(n);
    std::iota(by_var.begin(), by_var.end(), std::size_t{0});
    std::sort(by_var.begin(), by_var.end(), [&](std::size_t a, std::size_t b) {
        if (map.variability[a] != map.variability[b]) return map.variability[a] > map.variability[b];
        return a < b;
    });
    const std::size_t n_ambiguous = (n + 2) / 3;
    for (std::size_t i = 0; i < n_ambiguous; ++i) map.region[by_var[i]] = Region::ambiguous;

    std::vector<std::size_t> rest(by_var.begin() + static_cast<std::ptrdiff_t>(n_ambiguous),
                                  by_var.end());
    std::sort(rest.begin(), rest.end(), [&](std::size_t a, std::size_t b) {
        if (map.confidence[a] != map.confidence[b]) return map.confidence[a] > map.confidence[b];
        return a < b;
    });
    const std::size_t n_easy = (rest.size() + 1) / 2;
    for (std::size_t i = 0; i < rest.size(); ++i) {
        map.region[rest[i]] = i < n_easy ? Region::easy : Region::hard;
    }
}

}  // namespace

CartographyMap compute_map(const DynamicsRecord& dynamics, const RegionRule& rule,
                           std::vector<std::string> ids, int k, int replicate_index) {
    const std::size_t n = dynamics.num_instances();
    const std::size_t e = dynamics.num_epochs();
    if (e < 2) throw ValidationError("compute_map: need at least 2 epochs of dynamics");
    if (!ids.empty() && ids.size() != n) throw ValidationError("compute_map: id count mismatch");

    CartographyMap map;
    map.ids = std::move(ids);
    map.k = k;
    map.replicate_index = replicate_index;
    map.confidence.reserve(n);
    map.variability.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        bool constant = true;
        double mean = 0.0;
        for (std::size_t j = 0; j < e; ++j) {
            mean += dynamics.gold_prob.at(i, j);
            if (dynamics.gold_prob.at(i, j) != dynamics.gold_prob.at(i, 0)) constant = false;
        }
        mean /= static_cast<double>(e);
        double var = 0.0;
        if (!constant) {
            for (std::size_t j = 0; j < e; ++j) {
                const double d = dynamics.gold_prob.at(i, j) - mean;
                var += d * d;
            }
            var /= static_cast<double>(e);
        }
        map.confidence.push_back(constant ? dynamics.gold_prob.at(i, 0) : mean);
        map.variability.push_back(std::sqrt(std::max(var, 0.0)));
    }

    if (rule.mode == RegionRule::Mode::absolute) {
        assign_absolute(map, rule);
    } else {
        assign_percentile(map);
    }
    return map;
}

TransitionReport transitions(const CartographyMap& map_a, const CartographyMap& map_b) {
    if (map_a.size() != map_b.size()) {
        throw ValidationError("transitions: maps cover different instance counts");
    }
    if (!map_a.ids.empty() && !map_b.ids.empty() && map_a.ids != map_b.ids) {
        throw ValidationError("transitions: maps cover different instances");
    }

    TransitionReport report;
    for (std::size_t i = 0; i < map_a.size(); ++i) {
        const auto from = static_cast<std::size_t>(map_a.region[i]);
        const auto to = static_cast<std::size_t>(map_b.region[i]);
        ++report.counts[from][to];
        if (from == to) ++report.stayers;
        else ++report.movers;
    }
    if (report.movers == 0) {
        report.no_transitions = true;
        return report;
    }
    for (std::size_t from = 0; from < 3; ++from) {
        for (std::size_t to = 0; to < 3; ++to) {
            if (from == to) continue;
            report.proportions[from][to] = static_cast<double>(report.counts[from][to]) /
                                           static_cast<double>(report.movers);
        }
    }
    return report;
}

void write_map_csv(const std::filesystem::path& path, const CartographyMap& map) {
    std::string out = "instance_id,confidence,variability,region,k,replicate\n";
    for (std::size_t i = 0; i < map.size(); ++i) {
        out += csv_escape(map.ids.empty() ? std::to_string(i) : map.ids[i]);
        out += ',';
        out += format_double(map.confidence[i]);
        out += ',';
        out += format_double(map.variability[i]);
        out += ',';
        out += region_name(map.region[i]);
        out += ',';
        out += std::to_string(map.k);
        out += ',';
        out += std::to_string(map.replicate_index);
        out += '\n';
    }
    write_text_atomic(path, out);
}

}  // namespace annosim
