#include "moenas/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "moenas/error.hpp"

namespace moenas {

namespace {

// Indices of the non-dominated points, first occurrence of duplicates, sorted by (f1, f2).
std::vector<std::size_t> nondominated_indices(std::span<const ObjectiveVector> pts) {
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (pts[a].f1 != pts[b].f1) {
            return pts[a].f1 < pts[b].f1;
        }
        return pts[a].f2 < pts[b].f2;
    });
    std::vector<std::size_t> out;
    double best_f2 = std::numeric_limits<double>::infinity();
    for (std::size_t k : order) {
        if (pts[k].f2 < best_f2) {
            out.push_back(k);
            best_f2 = pts[k].f2;
        }
    }
    return out;
}

} // namespace

std::vector<ObjectiveVector> nondominated(std::span<const ObjectiveVector> pts) {
    std::vector<ObjectiveVector> out;
    for (std::size_t k : nondominated_indices(pts)) {
        out.push_back(pts[k]);
    }
    return out;
}

double hypervolume(std::span<const ObjectiveVector> front, const Point& ref) {
    for (const auto& p : front) {
        if (!(p.f1 < ref[0] && p.f2 < ref[1])) {
            throw Error("point-not-dominating-ref: (" + std::to_string(p.f1) + ", " + std::to_string(p.f2) + ")");
        }
    }
    const auto nd = nondominated(front);
    double area = 0.0;
    for (std::size_t k = 0; k < nd.size(); ++k) {
        const double next_x = k + 1 < nd.size() ? nd[k + 1].f1 : ref[0];
        area += (next_x - nd[k].f1) * (ref[1] - nd[k].f2);
    }
    return area;
}

double igd(std::span<const ObjectiveVector> front, std::span<const ObjectiveVector> reference) {
    if (front.empty() || reference.empty()) {
        throw Error("igd needs nonempty front and reference");
    }
    double lo0 = reference[0].f1;
    double hi0 = lo0;
    double lo1 = reference[0].f2;
    double hi1 = lo1;
    for (const auto& r : reference) {
        lo0 = std::min(lo0, r.f1);
        hi0 = std::max(hi0, r.f1);
        lo1 = std::min(lo1, r.f2);
        hi1 = std::max(hi1, r.f2);
    }
    const double s0 = hi0 > lo0 ? hi0 - lo0 : 1.0;
    const double s1 = hi1 > lo1 ? hi1 - lo1 : 1.0;
    double total = 0.0;
    for (const auto& r : reference) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : front) {
            best = std::min(best, std::hypot((p.f1 - r.f1) / s0, (p.f2 - r.f2) / s1));
        }
        total += best;
    }
    return total / static_cast<double>(reference.size());
}

FrontSummary true_front(Evaluator& evaluator, const ObjectiveConfig& cfg, const Restriction& restriction) {
    if (!evaluator.enumerable()) {
        throw Error("true_front needs an enumerable evaluator (synthetic or tabular)");
    }
    std::vector<ObjectiveVector> objs;
    std::vector<Genome> genomes;
    FrontSummary summary;
    summary.max_point = {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for_each_genome(restriction, [&](const Genome& g) {
        const auto m = evaluator.evaluate(g, cfg);
        const auto pc = decode(g, cfg.num_classes).param_count;
        const auto f = objectives(m, pc, cfg);
        summary.max_point[0] = std::max(summary.max_point[0], f.f1);
        summary.max_point[1] = std::max(summary.max_point[1], f.f2);
        objs.push_back(f);
        genomes.push_back(g);
    });
    summary.enumerated = objs.size();
    for (std::size_t k : nondominated_indices(objs)) {
        summary.points.push_back(objs[k]);
        summary.records.push_back(make_record(genomes[k], evaluator.evaluate(genomes[k], cfg), cfg, 0, Phase::Init,
                                              static_cast<std::int64_t>(k)));
    }
    return summary;
}

} // namespace moenas
