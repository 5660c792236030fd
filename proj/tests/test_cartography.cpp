#include <doctest.h>

#include <cmath>

#include "annosim/cartography.hpp"
#include "annosim/error.hpp"
#include "annosim/io.hpp"
#include "annosim/rng.hpp"
#include "test_util.hpp"

using namespace annosim;

namespace {

DynamicsRecord dynamics_from_rows(const std::vector<std::vector<double>>& rows) {
    DynamicsRecord dyn{Matrix(rows.size(), rows.front().size())};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) dyn.gold_prob.at(i, j) = rows[i][j];
    }
    return dyn;
}

CartographyMap map_with_regions(const std::vector<Region>& regions) {
    CartographyMap map;
    map.region = regions;
    map.confidence.assign(regions.size(), 0.5);
    map.variability.assign(regions.size(), 0.1);
    return map;
}

}  // namespace

TEST_CASE("compute_map matches the worked examples") {
    const RegionRule rule;
    const CartographyMap map = compute_map(dynamics_from_rows({{1, 1, 1}, {0, 0, 0}}), rule);
    // constant high series
    CHECK(map.confidence[0] == doctest::Approx(1.0));
    CHECK(map.variability[0] == doctest::Approx(0.0));
    CHECK(map.region[0] == Region::easy);
    // constant low series
    CHECK(map.confidence[1] == doctest::Approx(0.0));
    CHECK(map.variability[1] == doctest::Approx(0.0));
    CHECK(map.region[1] == Region::hard);
    // swinging two-epoch series
    const CartographyMap swing = compute_map(dynamics_from_rows({{0.1, 0.9}}), rule);
    CHECK(swing.confidence[0] == doctest::Approx(0.5));
    CHECK(swing.variability[0] == doctest::Approx(0.4));
    CHECK(swing.region[0] == Region::ambiguous);
}

TEST_CASE("compute_map needs at least two epochs") {
    CHECK_THROWS_AS(compute_map(dynamics_from_rows({{0.5}}), RegionRule{}), ValidationError);
}

TEST_CASE("confidence and variability respect their bounds on random dynamics") {
    SplitMix64 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.bounded(40);
        const std::size_t e = 2 + rng.bounded(10);
        DynamicsRecord dyn{Matrix(n, e)};
        for (double& v : dyn.gold_prob.data) v = rng.next_double();
        const RegionRule rule = trial % 2 == 0
                                    ? RegionRule{}
                                    : RegionRule{.mode = RegionRule::Mode::percentile};
        const CartographyMap map = compute_map(dyn, rule);
        REQUIRE(map.size() == n);
        REQUIRE(map.region.size() == n);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(map.confidence[i] >= 0.0);
            CHECK(map.confidence[i] <= 1.0);
            CHECK(map.variability[i] >= 0.0);
            CHECK(map.variability[i] <= 0.5);
            // total assignment: one of the three regions
            const Region r = map.region[i];
            CHECK((r == Region::easy || r == Region::ambiguous || r == Region::hard));
        }
    }
}

TEST_CASE("variability is zero exactly for constant series") {
    const CartographyMap map =
        compute_map(dynamics_from_rows({{0.4, 0.4, 0.4}, {0.4, 0.5, 0.4}}), RegionRule{});
    CHECK(map.variability[0] == 0.0);
    CHECK(map.variability[1] > 0.0);
}

TEST_CASE("transition proportions follow the worked example") {
    // 6 movers e->a, 4 movers a->e, everything else stays
    std::vector<Region> from, to;
    for (int i = 0; i < 6; ++i) {
        from.push_back(Region::easy);
        to.push_back(Region::ambiguous);
    }
    for (int i = 0; i < 4; ++i) {
        from.push_back(Region::ambiguous);
        to.push_back(Region::easy);
    }
    for (int i = 0; i < 10; ++i) {
        from.push_back(Region::hard);
        to.push_back(Region::hard);
    }
    const TransitionReport r = transitions(map_with_regions(from), map_with_regions(to));
    CHECK(r.movers == 10);
    CHECK(r.stayers == 10);
    CHECK_FALSE(r.no_transitions);
    CHECK(r.proportions[static_cast<int>(Region::easy)][static_cast<int>(Region::ambiguous)] ==
          doctest::Approx(0.6));
    CHECK(r.proportions[static_cast<int>(Region::ambiguous)][static_cast<int>(Region::easy)] ==
          doctest::Approx(0.4));

    long long count_sum = 0;
    for (const auto& row : r.counts) {
        for (long long c : row) count_sum += c;
    }
    CHECK(count_sum == 20);
}

TEST_CASE("identical maps yield a flagged empty transition report") {
    const CartographyMap map = map_with_regions({Region::easy, Region::hard, Region::ambiguous});
    const TransitionReport r = transitions(map, map);
    CHECK(r.no_transitions);
    CHECK(r.movers == 0);
    for (const auto& row : r.proportions) {
        for (double p : row) CHECK(p == 0.0);
    }
}

TEST_CASE("off-diagonal proportions sum to one whenever anything moved") {
    SplitMix64 rng(29);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.bounded(60);
        std::vector<Region> a, b;
        for (std::size_t i = 0; i < n; ++i) {
            a.push_back(static_cast<Region>(rng.bounded(3)));
            b.push_back(static_cast<Region>(rng.bounded(3)));
        }
        const TransitionReport r = transitions(map_with_regions(a), map_with_regions(b));
        CHECK(r.movers + r.stayers == static_cast<std::int64_t>(n));
        if (r.no_transitions) continue;
        double sum = 0.0;
        for (std::size_t from = 0; from < 3; ++from) {
            for (std::size_t to = 0; to < 3; ++to) sum += r.proportions[from][to];
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("transitions reject mismatched instance sets") {
    const CartographyMap a = map_with_regions({Region::easy, Region::hard});
    const CartographyMap b = map_with_regions({Region::easy});
    CHECK_THROWS_AS(transitions(a, b), ValidationError);

    CartographyMap named_a = map_with_regions({Region::easy, Region::hard});
    named_a.ids = {"x", "y"};
    CartographyMap named_b = map_with_regions({Region::easy, Region::hard});
    named_b.ids = {"x", "z"};
    CHECK_THROWS_AS(transitions(named_a, named_b), ValidationError);
}

TEST_CASE("percentile rule assigns the top variability third to ambiguous") {
    std::vector<std::vector<double>> rows;
    // three low-variability high-confidence, three low-variability low-confidence,
    // three swinging series
    for (int i = 0; i < 3; ++i) rows.push_back({0.9, 0.9, 0.9});
    for (int i = 0; i < 3; ++i) rows.push_back({0.1, 0.1, 0.1});
    for (int i = 0; i < 3; ++i) rows.push_back({0.1, 0.9, 0.1});
    const CartographyMap map = compute_map(dynamics_from_rows(rows),
                                           RegionRule{.mode = RegionRule::Mode::percentile});
    for (int i = 0; i < 3; ++i) CHECK(map.region[static_cast<std::size_t>(i)] == Region::easy);
    for (int i = 3; i < 6; ++i) CHECK(map.region[static_cast<std::size_t>(i)] == Region::hard);
    for (int i = 6; i < 9; ++i) CHECK(map.region[static_cast<std::size_t>(i)] == Region::ambiguous);
}

TEST_CASE("map CSV export includes provenance columns") {
    testutil::TempDir tmp;
    CartographyMap map = map_with_regions({Region::easy});
    map.ids = {"inst"};
    map.k = 5;
    map.replicate_index = 2;
    write_map_csv(tmp / "map.csv", map);
    const std::string text = read_text(tmp / "map.csv");
    CHECK(text.find("instance_id,confidence,variability,region,k,replicate") == 0);
    CHECK(text.find("inst,0.5,0.1,easy,5,2") != std::string::npos);
}
