#include "moenas/adaptive.hpp"

#include "moenas/error.hpp"

namespace moenas {

ValueScoreTable::ValueScoreTable() {
    for (std::size_t i = 0; i < kGeneCount; ++i) {
        sum_[i].assign(static_cast<std::size_t>(kGeneCardinality[i]), 0.0);
        count_[i].assign(static_cast<std::size_t>(kGeneCardinality[i]), 0);
    }
}

void ValueScoreTable::record_trained(const Genome& g, double ese_value, const ObjectiveConfig& cfg) {
    const double top = ese_max(cfg);
    if (!(ese_value >= 0.0 && ese_value <= top)) {
        throw RangeError("ese value out of [0, ESE_max]: " + std::to_string(ese_value));
    }
    for (std::size_t i = 0; i < kGeneCount; ++i) {
        const auto j = static_cast<std::size_t>(gene_index(g, i));
        sum_[i][j] += top - ese_value;
        count_[i][j] += 1;
    }
}

double ValueScoreTable::score(std::size_t gene, std::size_t value) const {
    const auto n = count_.at(gene).at(value);
    return n == 0 ? 0.0 : sum_[gene][value] / static_cast<double>(n);
}

Json ValueScoreTable::to_json() const {
    return Json{{"sum_score", sum_}, {"use_count", count_}};
}

ValueScoreTable ValueScoreTable::from_json(const Json& j) {
    ValueScoreTable t;
    t.sum_ = j.at("sum_score").get<std::array<std::vector<double>, kGeneCount>>();
    t.count_ = j.at("use_count").get<std::array<std::vector<std::int64_t>, kGeneCount>>();
    for (std::size_t i = 0; i < kGeneCount; ++i) {
        if (t.sum_[i].size() != static_cast<std::size_t>(kGeneCardinality[i]) ||
            t.count_[i].size() != static_cast<std::size_t>(kGeneCardinality[i])) {
            throw CheckpointError("score table has the wrong shape");
        }
    }
    return t;
}

std::vector<double> mutation_probs(const ValueScoreTable& table, std::size_t gene, double eps) {
    if (!(eps > 0.0)) {
        throw RangeError("epsilon must be > 0");
    }
    const auto k = static_cast<std::size_t>(kGeneCardinality.at(gene));
    std::vector<double> s(k);
    double total = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        s[j] = table.score(gene, j);
        total += s[j];
    }
    std::vector<double> ps(k);
    double ps_total = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        ps[j] = (total > 0.0 ? s[j] / total : 0.0) + eps;
        ps_total += ps[j];
    }
    for (auto& p : ps) {
        p /= ps_total;
    }
    return ps;
}

GeneDistributions mutation_distributions(const ValueScoreTable& table, double eps) {
    GeneDistributions d;
    for (std::size_t i = 0; i < kGeneCount; ++i) {
        d[i] = mutation_probs(table, i, eps);
    }
    return d;
}

GeneDistributions uniform_distributions() {
    GeneDistributions d;
    for (std::size_t i = 0; i < kGeneCount; ++i) {
        const auto k = static_cast<std::size_t>(kGeneCardinality[i]);
        d[i].assign(k, 1.0 / static_cast<double>(k));
    }
    return d;
}

void SubproblemUtility::record_contribution(std::size_t i, bool contributed, double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        throw RangeError("gamma must be in (0, 1]");
    }
    u_.at(i) = gamma * u_[i] + (contributed ? 1.0 : 0.0);
}

SubproblemUtility SubproblemUtility::from_json(const Json& j) {
    SubproblemUtility u;
    u.u_ = j.get<std::vector<double>>();
    return u;
}

std::vector<double> subproblem_probs(const SubproblemUtility& util, double eps) {
    if (!(eps > 0.0)) {
        throw RangeError("epsilon must be > 0");
    }
    std::vector<double> p(util.values());
    double total = 0.0;
    for (auto& v : p) {
        v += eps;
        total += v;
    }
    for (auto& v : p) {
        v /= total;
    }
    return p;
}

} // namespace moenas
