#include "moenas/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "moenas/error.hpp"

namespace moenas {

std::vector<Weight> init_weights(int n) {
    if (n < 2) {
        throw RangeError("init_weights needs N >= 2");
    }
    std::vector<Weight> w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double a = static_cast<double>(i) / (n - 1);
        w[static_cast<std::size_t>(i)] = {a, 1.0 - a};
    }
    return w;
}

std::vector<std::vector<int>> neighborhoods(std::span<const Weight> weights, int t) {
    const int n = static_cast<int>(weights.size());
    if (t < 1 || t > n) {
        throw RangeError("neighborhood size must be in [1, N]");
    }
    std::vector<std::vector<int>> out(weights.size());
    for (int i = 0; i < n; ++i) {
        std::vector<std::pair<double, int>> dist;
        dist.reserve(weights.size());
        for (int k = 0; k < n; ++k) {
            const double dx = weights[static_cast<std::size_t>(i)][0] - weights[static_cast<std::size_t>(k)][0];
            const double dy = weights[static_cast<std::size_t>(i)][1] - weights[static_cast<std::size_t>(k)][1];
            // Quantized so mathematically equal distances tie exactly and fall back to the index.
            dist.emplace_back(std::round((dx * dx + dy * dy) * 1e12), k);
        }
        std::sort(dist.begin(), dist.end());
        auto& nb = out[static_cast<std::size_t>(i)];
        for (int k = 0; k < t; ++k) {
            nb.push_back(dist[static_cast<std::size_t>(k)].second);
        }
    }
    return out;
}

double pbi(const ObjectiveVector& f, const Weight& w, const Point& ideal, const Point& nadir, double theta) {
    const double x = (f.f1 - ideal[0]) / (nadir[0] - ideal[0] + kPbiDelta);
    const double y = (f.f2 - ideal[1]) / (nadir[1] - ideal[1] + kPbiDelta);
    const double norm = std::hypot(w[0], w[1]);
    const double d1 = std::abs(x * w[0] + y * w[1]) / norm;
    const double px = x - d1 * w[0] / norm;
    const double py = y - d1 * w[1] / norm;
    const double d2 = std::hypot(px, py);
    return d1 + theta * d2;
}

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) noexcept {
    return a.f1 <= b.f1 && a.f2 <= b.f2 && (a.f1 < b.f1 || a.f2 < b.f2);
}

DecompositionState::DecompositionState(int n, int t, double theta, std::span<const EvaluationRecord> initial)
    : theta_(theta) {
    if (initial.empty()) {
        throw Error("decomposition needs at least one initial record");
    }
    const auto weights = init_weights(n);
    const auto nb = neighborhoods(weights, t);
    for (const auto& r : initial) {
        observe(r.objectives);
    }
    subproblems_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto& sp = subproblems_[static_cast<std::size_t>(i)];
        sp.index = i;
        sp.weight = weights[static_cast<std::size_t>(i)];
        sp.neighborhood = nb[static_cast<std::size_t>(i)];
        std::size_t best = 0;
        double best_value = pbi(initial[0].objectives, sp.weight, ideal_, nadir_, theta_);
        for (std::size_t k = 1; k < initial.size(); ++k) {
            const double v = pbi(initial[k].objectives, sp.weight, ideal_, nadir_, theta_);
            if (v < best_value) {
                best_value = v;
                best = k;
            }
        }
        sp.current = initial[best];
    }
}

void DecompositionState::observe(const ObjectiveVector& f) {
    const Point p = as_point(f);
    if (!observed_) {
        ideal_ = p;
        nadir_ = p;
        observed_ = true;
        return;
    }
    for (std::size_t k = 0; k < 2; ++k) {
        ideal_[k] = std::min(ideal_[k], p[k]);
        nadir_[k] = std::max(nadir_[k], p[k]);
    }
}

int DecompositionState::update_pns(const EvaluationRecord& rec, int origin) {
    observe(rec.objectives);
    int replaced = 0;
    for (int k : subproblems_.at(static_cast<std::size_t>(origin)).neighborhood) {
        auto& sp = subproblems_[static_cast<std::size_t>(k)];
        const double candidate = pbi(rec.objectives, sp.weight, ideal_, nadir_, theta_);
        const double incumbent = pbi(sp.current.objectives, sp.weight, ideal_, nadir_, theta_);
        if (candidate < incumbent) {
            sp.current = rec;
            ++replaced;
        }
    }
    return replaced;
}

int DecompositionState::would_replace(const ObjectiveVector& f, int origin) const {
    Point ideal = ideal_;
    Point nadir = nadir_;
    const Point p = as_point(f);
    for (std::size_t k = 0; k < 2; ++k) {
        ideal[k] = std::min(ideal[k], p[k]);
        nadir[k] = std::max(nadir[k], p[k]);
    }
    int replaced = 0;
    for (int k : subproblems_.at(static_cast<std::size_t>(origin)).neighborhood) {
        const auto& sp = subproblems_[static_cast<std::size_t>(k)];
        if (pbi(f, sp.weight, ideal, nadir, theta_) < pbi(sp.current.objectives, sp.weight, ideal, nadir, theta_)) {
            ++replaced;
        }
    }
    return replaced;
}

bool DecompositionState::update_nds(const EvaluationRecord& rec) {
    for (const auto& m : nds_) {
        if (dominates(m.objectives, rec.objectives) || m.objectives == rec.objectives) {
            return false;
        }
    }
    std::erase_if(nds_, [&](const EvaluationRecord& m) { return dominates(rec.objectives, m.objectives); });
    nds_.push_back(rec);
    return true;
}

bool DecompositionState::nondominated_by_archive(const ObjectiveVector& f) const {
    return std::none_of(nds_.begin(), nds_.end(),
                        [&](const EvaluationRecord& m) { return dominates(m.objectives, f); });
}

Json DecompositionState::to_json() const {
    Json j;
    j["theta"] = theta_;
    j["observed"] = observed_;
    j["ideal"] = ideal_;
    j["nadir"] = nadir_;
    Json sps = Json::array();
    for (const auto& sp : subproblems_) {
        sps.push_back(Json{{"index", sp.index},
                           {"weight", sp.weight},
                           {"neighborhood", sp.neighborhood},
                           {"current", sp.current}});
    }
    j["subproblems"] = std::move(sps);
    j["nds"] = nds_;
    return j;
}

DecompositionState DecompositionState::from_json(const Json& j) {
    DecompositionState s;
    s.theta_ = j.at("theta").get<double>();
    s.observed_ = j.at("observed").get<bool>();
    s.ideal_ = j.at("ideal").get<Point>();
    s.nadir_ = j.at("nadir").get<Point>();
    for (const auto& e : j.at("subproblems")) {
        Subproblem sp;
        sp.index = e.at("index").get<int>();
        sp.weight = e.at("weight").get<Weight>();
        sp.neighborhood = e.at("neighborhood").get<std::vector<int>>();
        sp.current = e.at("current").get<EvaluationRecord>();
        s.subproblems_.push_back(std::move(sp));
    }
    s.nds_ = j.at("nds").get<std::vector<EvaluationRecord>>();
    return s;
}

} // namespace moenas
