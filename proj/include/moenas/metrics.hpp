#pragma once

#include <span>
#include <vector>

#include "moenas/decomposition.hpp"
#include "moenas/evaluators.hpp"
#include "moenas/genome.hpp"

namespace moenas {

// Non-dominated subset of pts; equal points are kept once (first occurrence).
// Result is sorted by f1 ascending (f2 strictly descending). O(n log n).
std::vector<ObjectiveVector> nondominated(std::span<const ObjectiveVector> pts);

// 2-D area dominated by the front and bounded by ref. Every point must strictly
// dominate ref, otherwise Error("point-not-dominating-ref ...").
double hypervolume(std::span<const ObjectiveVector> front, const Point& ref);

// Mean distance from each reference point to its nearest front point, with both
// objectives scaled by the reference front's range (unit scale when a range is 0).
double igd(std::span<const ObjectiveVector> front, std::span<const ObjectiveVector> reference);

struct FrontSummary {
    std::vector<ObjectiveVector> points;
    std::vector<EvaluationRecord> records; // one representative per point, same order
    Point max_point{};                     // componentwise maximum over everything enumerated
    std::uint64_t enumerated = 0;

    [[nodiscard]] std::size_t cardinality() const noexcept { return points.size(); }
    // max_point * 1.1 (the acceptance reference point convention).
    [[nodiscard]] Point reference_point() const noexcept { return {max_point[0] * 1.1, max_point[1] * 1.1}; }
};

// Enumerates the (restricted) space through the evaluator and returns the exact
// non-dominated set. Requires evaluator.enumerable(). Representatives are the
// first genome in canonical order reaching each front point.
FrontSummary true_front(Evaluator& evaluator, const ObjectiveConfig& cfg, const Restriction& restriction = {});

} // namespace moenas
