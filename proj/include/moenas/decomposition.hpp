#pragma once

#include <array>
#include <span>
#include <vector>

#include "moenas/evaluators.hpp"
#include "moenas/objectives.hpp"

namespace moenas {

using Weight = std::array<double, 2>;
using Point = std::array<double, 2>;

inline constexpr double kPbiDelta = 1e-12;

inline Point as_point(const ObjectiveVector& v) noexcept { return {v.f1, v.f2}; }

// lambda_i = (i/(N-1), 1 - i/(N-1)). Throws RangeError for N < 2.
std::vector<Weight> init_weights(int n);

// T nearest weights (Euclidean) for every weight, self included; ties by index.
std::vector<std::vector<int>> neighborhoods(std::span<const Weight> weights, int t);

// Penalty-based boundary intersection on objectives normalized by the
// observed ideal/nadir range.
double pbi(const ObjectiveVector& f, const Weight& w, const Point& ideal, const Point& nadir, double theta);

// Minimization dominance: a <= b componentwise and a != b.
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) noexcept;

struct Subproblem {
    int index = 0;
    Weight weight{};
    std::vector<int> neighborhood;
    EvaluationRecord current;
};

// Per-subproblem current solutions (PNS), non-dominated archive (NDS) and
// the observed ideal / nadir points.
class DecompositionState {
public:
    DecompositionState() = default;

    // Seeds the ideal/nadir from all initial records, then lets each
    // subproblem adopt the PBI-minimizing initial record (ties -> lowest index).
    // The archive is left empty; offer records through update_nds.
    DecompositionState(int n, int t, double theta, std::span<const EvaluationRecord> initial);

    // Monotone: ideal never increases, nadir never decreases.
    void observe(const ObjectiveVector& f);

    // Replaces every neighbor of origin whose current solution has a larger
    // PBI value than the new record. Updates ideal/nadir first.
    int update_pns(const EvaluationRecord& rec, int origin);

    // Number of neighbors of origin that f would replace, without mutating anything.
    [[nodiscard]] int would_replace(const ObjectiveVector& f, int origin) const;

    // Inserts rec if no member dominates it and no member has equal objectives;
    // drops members rec dominates.
    bool update_nds(const EvaluationRecord& rec);

    // True if no archive member dominates f.
    [[nodiscard]] bool nondominated_by_archive(const ObjectiveVector& f) const;

    [[nodiscard]] const std::vector<Subproblem>& subproblems() const noexcept { return subproblems_; }
    [[nodiscard]] const std::vector<EvaluationRecord>& nds() const noexcept { return nds_; }
    [[nodiscard]] const Point& ideal() const noexcept { return ideal_; }
    [[nodiscard]] const Point& nadir() const noexcept { return nadir_; }
    [[nodiscard]] double theta() const noexcept { return theta_; }
    [[nodiscard]] int size() const noexcept { return static_cast<int>(subproblems_.size()); }

    [[nodiscard]] Json to_json() const;
    static DecompositionState from_json(const Json& j);

private:
    std::vector<Subproblem> subproblems_;
    std::vector<EvaluationRecord> nds_;
    Point ideal_{};
    Point nadir_{};
    bool observed_ = false;
    double theta_ = 5.0;
};

} // namespace moenas
