#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "moenas/genome.hpp"
#include "moenas/json.hpp"
#include "moenas/objectives.hpp"

namespace moenas {

using GeneDistributions = std::array<std::vector<double>, kGeneCount>;

// Accumulated ESE-based scores for every (hyperparameter, value) pair.
class ValueScoreTable {
public:
    ValueScoreTable();

    // Adds (ese_max - ese_value) to the score of each value the genome uses.
    void record_trained(const Genome& g, double ese_value, const ObjectiveConfig& cfg);

    // Mean score of value j for gene i; 0 if the value was never used.
    [[nodiscard]] double score(std::size_t gene, std::size_t value) const;

    [[nodiscard]] double sum_score(std::size_t gene, std::size_t value) const { return sum_[gene][value]; }
    [[nodiscard]] std::int64_t use_count(std::size_t gene, std::size_t value) const { return count_[gene][value]; }

    [[nodiscard]] Json to_json() const;
    static ValueScoreTable from_json(const Json& j);

    bool operator==(const ValueScoreTable&) const = default;

private:
    std::array<std::vector<double>, kGeneCount> sum_;
    std::array<std::vector<std::int64_t>, kGeneCount> count_;
};

// P_j = PS_j / sum PS with PS_j = S_j / sum S + eps (PS_j = eps when sum S = 0).
std::vector<double> mutation_probs(const ValueScoreTable& table, std::size_t gene, double eps);
GeneDistributions mutation_distributions(const ValueScoreTable& table, double eps);
GeneDistributions uniform_distributions();

// Exponentially decayed count of generations in which a subproblem contributed.
class SubproblemUtility {
public:
    explicit SubproblemUtility(std::size_t n = 0) : u_(n, 0.0) {}

    // u_i <- gamma * u_i + [contributed]
    void record_contribution(std::size_t i, bool contributed, double gamma);

    [[nodiscard]] const std::vector<double>& values() const noexcept { return u_; }
    [[nodiscard]] std::size_t size() const noexcept { return u_.size(); }

    [[nodiscard]] Json to_json() const { return Json(u_); }
    static SubproblemUtility from_json(const Json& j);

private:
    std::vector<double> u_;
};

// P_i = (u_i + eps) / sum_k (u_k + eps)
std::vector<double> subproblem_probs(const SubproblemUtility& util, double eps);

} // namespace moenas
