#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "moenas/adaptive.hpp"
#include "moenas/decomposition.hpp"
#include "moenas/evaluators.hpp"
#include "moenas/genome.hpp"
#include "moenas/json.hpp"
#include "moenas/rng.hpp"
#include "moenas/surrogate.hpp"

namespace moenas {

// samea: full algorithm. mea: uniform mutation and round-robin subproblems in
// every generation, no surrogate. random: uniformly random genomes after the
// shared initial population.
enum class Variant : std::uint8_t { Samea, Mea, Random };

std::string_view variant_name(Variant v) noexcept;
Variant parse_variant(std::string_view name);

struct EngineConfig {
    int population = 10;
    int neighborhood = 4;
    int generations = 40;
    int learning_generations = 10;
    double epsilon = 0.002;            // mutation-probability floor
    double epsilon_subproblem = 0.002; // subproblem-probability floor
    double theta_pbi = 5.0;
    double gamma = 0.9; // utility decay
    double mutation_rate = 0.2;
    int max_attempts = 10;
    std::uint64_t seed = 0;
    Variant variant = Variant::Samea;
    ObjectiveConfig objective;
    ForestConfig forest; // forest.seed is ignored; per-fit seeds derive from `seed`
    EvaluatorKind evaluator = SyntheticSpec{};

    bool operator==(const EngineConfig&) const = default;
};

void validate(const EngineConfig& cfg);
void to_json(Json& j, const EngineConfig& c);
void from_json(const Json& j, EngineConfig& c);

struct BudgetCounters {
    std::int64_t proposed = 0;
    std::int64_t trained = 0;
    std::int64_t cache_hits = 0;
    std::int64_t discarded = 0; // rejected by the surrogate filter and never trained
    std::int64_t forced = 0;
    std::int64_t failures = 0;
    std::int64_t surrogate_fits = 0;
    std::int64_t surrogate_predictions = 0;

    bool operator==(const BudgetCounters&) const = default;
};

void to_json(Json& j, const BudgetCounters& c);
void from_json(const Json& j, BudgetCounters& c);

// Latin hypercube over [0,1]^10 with N strata per dimension, each coordinate
// mapped to its gene by equal-width binning.
std::vector<Genome> lhs_init(int n, std::uint64_t seed);

// Uniform crossover, then each gene is resampled from `mutation[gene]` with
// probability mutation_rate.
Genome make_child(const Genome& a, const Genome& b, const GeneDistributions& mutation, double mutation_rate, Rng& rng);

// Phase-aware overload: uniform distributions in LEARN, score-guided in EXPLOIT.
Genome make_child(const Genome& a, const Genome& b, Phase phase, const ValueScoreTable& table, double epsilon,
                  double mutation_rate, Rng& rng);

enum class Criterion : std::uint8_t { None, PnsUpdate, PredictedNonDominated, MinPredictedEse, MaxDispersion };

std::string_view criterion_name(Criterion c) noexcept;

// Predictions already seen in the current generation.
struct GenerationHistory {
    double min_predicted = std::numeric_limits<double>::infinity();
    double max_dispersion = -std::numeric_limits<double>::infinity();
    int count = 0;

    void add(double predicted, double dispersion);
};

struct AcceptDecision {
    bool accepted = false;
    Criterion criterion = Criterion::None;
};

// predicted.f1 is the surrogate ESE, predicted.f2 the exact log size.
// Criteria, first match wins: would replace a neighbor of origin under PBI;
// not dominated by the archive; lowest predicted ESE so far this generation;
// highest dispersion so far this generation.
AcceptDecision accept_candidate(const DecompositionState& state, int origin, const ObjectiveVector& predicted,
                                double dispersion, const GenerationHistory& history);

using LogSink = std::function<void(const std::string&)>;

struct RunResult {
    std::vector<EvaluationRecord> nds;
    std::vector<EvaluationRecord> records; // every trained record, in training order
    BudgetCounters counters;
};

class Engine {
public:
    // When evaluator is null one is built from cfg.evaluator.
    explicit Engine(EngineConfig cfg, std::unique_ptr<Evaluator> evaluator = nullptr, LogSink sink = {});

    // Restores a generation-boundary checkpoint.
    static Engine from_checkpoint(const Json& checkpoint, std::unique_ptr<Evaluator> evaluator = nullptr,
                                  LogSink sink = {});

    // Runs the next generation. Generation 1 is the initial population.
    void step();
    [[nodiscard]] bool finished() const noexcept { return generation_ >= cfg_.generations; }
    RunResult run();

    [[nodiscard]] Json checkpoint() const;

    [[nodiscard]] int generation() const noexcept { return generation_; }
    [[nodiscard]] const EngineConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] const DecompositionState& decomposition() const noexcept { return state_; }
    [[nodiscard]] const ValueScoreTable& score_table() const noexcept { return table_; }
    [[nodiscard]] const SubproblemUtility& utility() const noexcept { return utility_; }
    [[nodiscard]] const SurrogateTrainingPopulation& stp() const noexcept { return stp_; }
    [[nodiscard]] const std::vector<EvaluationRecord>& records() const noexcept { return records_; }
    [[nodiscard]] const BudgetCounters& counters() const noexcept { return counters_; }
    [[nodiscard]] RunResult result() const;

    // Lines and bytes (newline included) handed to the sink so far.
    [[nodiscard]] std::uint64_t log_lines() const noexcept { return log_lines_; }
    [[nodiscard]] std::uint64_t log_bytes() const noexcept { return log_bytes_; }

private:
    struct Outcome {
        bool ok = false;
        bool cache_hit = false;
        int replaced = 0;
        bool entered_nds = false;
    };

    struct Proposal {
        Genome genome;
        int subproblem = 0;
        std::int64_t seq = 0;
        Prediction prediction;
        bool predicted = false;
    };

    void run_init();
    void run_learning_generation(Phase label);
    void run_exploit_generation();
    void run_random_generation();

    Proposal propose(int subproblem, const GeneDistributions& dists);
    Outcome commit(const Proposal& p, Phase phase, bool forced);
    void log_generation(Phase phase, const GeneDistributions& dists, const std::vector<double>& sub_probs);
    void emit(const Json& line);
    const RandomForest& forest();
    std::pair<Genome, Genome> pick_parents(int subproblem);

    EngineConfig cfg_;
    std::unique_ptr<Evaluator> evaluator_;
    LogSink sink_;

    int generation_ = 0;
    std::int64_t seq_ = 0;
    Rng rng_;
    DecompositionState state_;
    ValueScoreTable table_;
    SubproblemUtility utility_;
    SurrogateTrainingPopulation stp_;
    std::vector<EvaluationRecord> records_;
    std::unordered_map<Genome, std::size_t, GenomeHash> cache_;
    BudgetCounters counters_;

    std::optional<RandomForest> forest_;
    std::size_t forest_size_ = 0;

    std::uint64_t log_lines_ = 0;
    std::uint64_t log_bytes_ = 0;
};

} // namespace moenas
