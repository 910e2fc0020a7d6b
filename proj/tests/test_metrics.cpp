#include <doctest.h>

#include <cmath>

#include "moenas/error.hpp"
#include "moenas/metrics.hpp"
#include "moenas/rng.hpp"
#include "support/oracles.hpp"

using namespace moenas;

TEST_CASE("hypervolume examples") {
    const std::vector<ObjectiveVector> front{{1, 2}, {2, 1}};
    CHECK(hypervolume(front, {3, 3}) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(hypervolume(std::vector<ObjectiveVector>{{0.5, 1.5}}, {4, 3}) == doctest::Approx(3.5 * 1.5));
    const std::vector<ObjectiveVector> with_dominated{{1, 2}, {2, 1}, {2.5, 2.5}, {1, 2}};
    CHECK(hypervolume(with_dominated, {3, 3}) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(hypervolume(std::vector<ObjectiveVector>{}, {3, 3}) == 0.0);
    CHECK_THROWS_WITH_AS(hypervolume(std::vector<ObjectiveVector>{{3, 1}}, {3, 3}),
                         doctest::Contains("point-not-dominating-ref"), Error);
}

TEST_CASE("hypervolume equals a grid-count oracle and is monotone") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<ObjectiveVector> pts;
        for (int k = 0; k < 8; ++k) {
            pts.push_back({static_cast<double>(rng.uniform_index(20)), static_cast<double>(rng.uniform_index(20))});
        }
        const Point ref{20, 20};
        // Unit cells [x, x+1) x [y, y+1) dominated by some point.
        int cells = 0;
        for (int x = 0; x < 20; ++x) {
            for (int y = 0; y < 20; ++y) {
                bool covered = false;
                for (const auto& p : pts) {
                    covered = covered || (p.f1 <= x && p.f2 <= y);
                }
                cells += covered ? 1 : 0;
            }
        }
        CHECK(hypervolume(pts, ref) == doctest::Approx(cells));
        auto more = pts;
        more.push_back({rng.uniform01() * 19, rng.uniform01() * 19});
        CHECK(hypervolume(more, ref) >= hypervolume(pts, ref));
    }
}

TEST_CASE("igd examples") {
    const std::vector<ObjectiveVector> ref{{0, 1}, {1, 0}};
    CHECK(igd(ref, ref) == 0.0);
    const std::vector<ObjectiveVector> missing{{0, 1}, {1, 1}};
    CHECK(std::abs(igd(missing, ref) - 0.5) < 1e-12);
    CHECK(igd(std::vector<ObjectiveVector>{{5, 5}}, ref) >= 0.0);
    CHECK_THROWS_AS(igd(std::vector<ObjectiveVector>{}, ref), Error);
}

TEST_CASE("nondominated matches the pairwise filter") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<ObjectiveVector> pts;
        for (int k = 0; k < 200; ++k) {
            pts.push_back({static_cast<double>(rng.uniform_index(30)), static_cast<double>(rng.uniform_index(30))});
        }
        CHECK(oracle::same_points(nondominated(pts), oracle::pareto_filter(pts)));
    }
}

TEST_CASE("true_front on a restricted space equals the pairwise filter") {
    SyntheticEvaluator ev;
    const ObjectiveConfig cfg;
    Restriction r;
    r.allow("n_c", {2}).allow("lr_level", {4});
    const auto front = true_front(ev, cfg, r);
    std::vector<ObjectiveVector> all;
    for (const auto& g : enumerate_space(r)) {
        all.push_back(objectives(synthetic_metrics(g, cfg), decode(g).param_count, cfg));
    }
    CHECK(front.enumerated == all.size());
    CHECK(oracle::same_points(front.points, oracle::pareto_filter(all)));
    for (std::size_t k = 0; k < front.points.size(); ++k) {
        CHECK(front.records[k].objectives == front.points[k]);
    }
}

TEST_CASE("full synthetic front is a genuine trade-off and dominates restricted fronts") {
    SyntheticEvaluator ev;
    const ObjectiveConfig cfg;
    const auto full = true_front(ev, cfg);
    CHECK(full.enumerated == kSpaceSize);
    CHECK(full.cardinality() >= 2);
    const auto again = true_front(ev, cfg);
    CHECK(again.points == full.points);
    Restriction r;
    r.allow("n_f", {4}).allow_ops("o2", {Op::P3D});
    const auto part = true_front(ev, cfg, r);
    for (const auto& p : part.points) {
        bool covered = false;
        for (const auto& q : full.points) {
            covered = covered || q == p || oracle::dominates(q, p);
        }
        CHECK(covered);
    }
    const auto ref = full.reference_point();
    CHECK(ref[0] == doctest::Approx(full.max_point[0] * 1.1));
    CHECK(hypervolume(full.points, ref) > 0.0);
}
