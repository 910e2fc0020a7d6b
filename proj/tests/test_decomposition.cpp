#include <doctest.h>

#include <cmath>

#include "moenas/decomposition.hpp"
#include "moenas/error.hpp"
#include "moenas/rng.hpp"
#include "support/oracles.hpp"

using namespace moenas;

namespace {

EvaluationRecord rec(double f1, double f2, int id = 0) {
    EvaluationRecord r;
    r.objectives = {f1, f2};
    r.attempt_id = id;
    r.genome = genome_from_rank(static_cast<std::uint64_t>(id) % kSpaceSize);
    return r;
}

} // namespace

TEST_CASE("weights lie on the simplex") {
    const auto w2 = init_weights(2);
    CHECK(w2 == std::vector<Weight>{{0.0, 1.0}, {1.0, 0.0}});
    const auto w10 = init_weights(10);
    CHECK(w10[3][0] == doctest::Approx(1.0 / 3.0));
    CHECK(w10[3][1] == doctest::Approx(2.0 / 3.0));
    for (const auto& w : w10) {
        CHECK(std::abs(w[0] + w[1] - 1.0) < 1e-15);
        CHECK(w[0] >= 0.0);
        CHECK(w[1] >= 0.0);
    }
    CHECK_THROWS_AS(init_weights(1), RangeError);
}

TEST_CASE("neighborhoods are the T nearest weights, self included") {
    const auto w = init_weights(10);
    const auto nb = neighborhoods(w, 4);
    for (std::size_t i = 0; i < nb.size(); ++i) {
        CHECK(nb[i].size() == 4);
        CHECK(std::find(nb[i].begin(), nb[i].end(), static_cast<int>(i)) != nb[i].end());
    }
    CHECK(nb[0] == std::vector<int>{0, 1, 2, 3});
    CHECK(nb[9] == std::vector<int>{9, 8, 7, 6});
    // Equidistant neighbors 4 and 6 of subproblem 5 resolve to the lower index first.
    CHECK(nb[5] == std::vector<int>{5, 4, 6, 3});
}

TEST_CASE("pbi on the weight ray equals the projected length") {
    const Point ideal{0.0, 0.0};
    const Point nadir{1.0, 1.0};
    const double expected = 0.2 * std::sqrt(2.0);
    for (double theta : {0.0, 1.0, 5.0, 100.0}) {
        CHECK(std::abs(pbi({0.2, 0.2}, {0.5, 0.5}, ideal, nadir, theta) - expected) < 1e-9);
        CHECK(std::abs(pbi({0.2, 0.2}, {0.5, 0.5}, ideal, nadir, theta) - 0.28284271247) < 1e-9);
    }
    CHECK(pbi({0.0, 0.0}, {0.3, 0.7}, ideal, nadir, 5.0) == 0.0);
}

TEST_CASE("pbi off the ray adds the penalty") {
    // F' = (1, 0), lambda = (0, 1): d1 = 0, d2 = 1.
    CHECK(std::abs(pbi({1.0, 0.0}, {0.0, 1.0}, {0.0, 0.0}, {1.0, 1.0}, 5.0) - 5.0) < 1e-9);
}

TEST_CASE("pbi is invariant to joint rescaling of the objective box") {
    Rng rng(11);
    for (int k = 0; k < 100; ++k) {
        const ObjectiveVector f{rng.uniform01(), rng.uniform01()};
        const Weight w{rng.uniform01(), 0.0};
        const Weight lw{w[0], 1.0 - w[0]};
        const double s = 0.5 + 3.0 * rng.uniform01();
        const double a = pbi(f, lw, {0.0, 0.0}, {1.0, 1.0}, 5.0);
        const double b = pbi({f.f1 * s + 2.0, f.f2 * s - 1.0}, lw, {2.0, -1.0}, {2.0 + s, -1.0 + s}, 5.0);
        CHECK(std::abs(a - b) < 1e-9);
    }
}

TEST_CASE("dominance") {
    CHECK(dominates({1, 1}, {2, 2}));
    CHECK_FALSE(dominates({1, 2}, {2, 1}));
    CHECK_FALSE(dominates({2, 1}, {1, 2}));
    CHECK_FALSE(dominates({1, 2}, {1, 2}));
    CHECK(dominates({1, 2}, {1, 3}));
}

TEST_CASE("update_nds examples") {
    DecompositionState s(3, 2, 5.0, std::vector<EvaluationRecord>{rec(1, 1)});
    CHECK(s.update_nds(rec(1, 1)));
    CHECK_FALSE(s.update_nds(rec(2, 2)));
    CHECK_FALSE(s.update_nds(rec(1, 1, 5)));

    DecompositionState t(3, 2, 5.0, std::vector<EvaluationRecord>{rec(1, 3), rec(3, 1)});
    CHECK(t.update_nds(rec(1, 3)));
    CHECK(t.update_nds(rec(3, 1)));
    CHECK(t.update_nds(rec(2, 2)));
    CHECK(t.nds().size() == 3);
    CHECK(t.update_nds(rec(0.5, 0.5)));
    CHECK(t.nds().size() == 1);
}

TEST_CASE("NDS equals the pairwise filter of everything offered") {
    Rng rng(2024);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<EvaluationRecord> offered;
        offered.push_back(rec(1.0, 1.0));
        DecompositionState s(4, 2, 5.0, offered);
        std::vector<ObjectiveVector> all;
        for (int k = 0; k < 600; ++k) {
            // Coarse grid so equal and weakly dominated points occur.
            const double f1 = static_cast<double>(rng.uniform_index(40)) / 4.0;
            const double f2 = static_cast<double>(rng.uniform_index(40)) / 4.0;
            s.update_nds(rec(f1, f2, k));
            all.push_back({f1, f2});
        }
        std::vector<ObjectiveVector> got;
        for (const auto& r : s.nds()) {
            got.push_back(r.objectives);
        }
        CHECK(oracle::same_points(got, oracle::pareto_filter(all)));
        for (const auto& a : s.nds()) {
            for (const auto& b : s.nds()) {
                CHECK_FALSE(dominates(a.objectives, b.objectives));
            }
        }
    }
}

TEST_CASE("initial PNS assignment takes the PBI-minimizing record") {
    const std::vector<EvaluationRecord> init{rec(0, 10, 0), rec(5, 5, 1), rec(10, 0, 2)};
    DecompositionState s(3, 2, 5.0, init);
    CHECK(s.ideal() == Point{0, 0});
    CHECK(s.nadir() == Point{10, 10});
    for (const auto& sp : s.subproblems()) {
        double best = 1e300;
        int arg = -1;
        for (std::size_t k = 0; k < init.size(); ++k) {
            const double v = pbi(init[k].objectives, sp.weight, s.ideal(), s.nadir(), 5.0);
            if (v < best) {
                best = v;
                arg = static_cast<int>(k);
            }
        }
        CHECK(sp.current.attempt_id == arg);
    }
    CHECK(s.nds().empty());
}

TEST_CASE("update_pns replaces every improving neighbor") {
    const std::vector<EvaluationRecord> init{rec(4, 10, 0), rec(6, 6, 1), rec(10, 4, 2)};
    DecompositionState s(3, 3, 5.0, init);
    // Componentwise minimum so far: pbi becomes 0 under every weight.
    CHECK(s.would_replace({1, 1}, 1) == 3);
    CHECK(s.update_pns(rec(1, 1, 9), 1) == 3);
    for (const auto& sp : s.subproblems()) {
        CHECK(sp.current.attempt_id == 9);
    }
    CHECK(s.ideal() == Point{1, 1});
    // Dominated by every current solution.
    CHECK(s.update_pns(rec(20, 20, 10), 0) == 0);
    CHECK(s.nadir() == Point{20, 20});
}

TEST_CASE("replacement count is bounded by T and ideal/nadir are exact extremes") {
    Rng rng(5);
    std::vector<EvaluationRecord> init;
    for (int k = 0; k < 10; ++k) {
        init.push_back(rec(rng.uniform01() * 5, 10 + rng.uniform01() * 8, k));
    }
    DecompositionState s(10, 4, 5.0, init);
    Point lo{1e300, 1e300};
    Point hi{-1e300, -1e300};
    for (const auto& r : init) {
        lo = {std::min(lo[0], r.objectives.f1), std::min(lo[1], r.objectives.f2)};
        hi = {std::max(hi[0], r.objectives.f1), std::max(hi[1], r.objectives.f2)};
    }
    for (int k = 0; k < 300; ++k) {
        const auto r = rec(rng.uniform01() * 5, 10 + rng.uniform01() * 8, 100 + k);
        const int origin = static_cast<int>(rng.uniform_index(10));
        const int predicted = s.would_replace(r.objectives, origin);
        const Point ideal_before = s.ideal();
        const Point nadir_before = s.nadir();
        const int n = s.update_pns(r, origin);
        CHECK(n == predicted);
        CHECK(n <= 4);
        lo = {std::min(lo[0], r.objectives.f1), std::min(lo[1], r.objectives.f2)};
        hi = {std::max(hi[0], r.objectives.f1), std::max(hi[1], r.objectives.f2)};
        CHECK(s.ideal() == lo);
        CHECK(s.nadir() == hi);
        CHECK(s.ideal()[0] <= ideal_before[0]);
        CHECK(s.nadir()[1] >= nadir_before[1]);
    }
}

TEST_CASE("state JSON round-trip") {
    const std::vector<EvaluationRecord> init{rec(4, 10, 0), rec(6, 6, 1), rec(10, 4, 2)};
    DecompositionState s(3, 2, 5.0, init);
    s.update_nds(init[0]);
    s.update_nds(init[2]);
    const auto back = DecompositionState::from_json(s.to_json());
    CHECK(back.to_json() == s.to_json());
    CHECK(back.nds() == s.nds());
}
