#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "moenas/genome.hpp"
#include "moenas/json.hpp"
#include "moenas/objectives.hpp"

namespace moenas {

enum class Phase : std::uint8_t { Init, Learn, Exploit };

std::string_view phase_name(Phase p) noexcept;
Phase parse_phase(std::string_view name);

// One trained genome together with its objectives.
struct EvaluationRecord {
    Genome genome;
    TrainingMetrics metrics;
    ObjectiveVector objectives;
    std::int64_t param_count = 0;
    int generation = 1;
    Phase phase = Phase::Init;
    std::int64_t attempt_id = 0;

    bool operator==(const EvaluationRecord&) const = default;
};

void to_json(Json& j, const EvaluationRecord& r);
void from_json(const Json& j, EvaluationRecord& r);

// Builds a record, computing param_count and objectives from the genome and metrics.
EvaluationRecord make_record(const Genome& g, const TrainingMetrics& m, const ObjectiveConfig& cfg,
                             int generation, Phase phase, std::int64_t attempt_id);

struct SyntheticSpec {
    double noise_sigma = 0.0; // additive Gaussian noise on Dice; 0 disables
    std::uint64_t noise_seed = 0;

    bool operator==(const SyntheticSpec&) const = default;
};

struct TabularSpec {
    std::filesystem::path path;

    bool operator==(const TabularSpec&) const = default;
};

struct ExternalSpec {
    std::string command;
    std::vector<std::string> args;
    double timeout_seconds = 600.0;

    bool operator==(const ExternalSpec&) const = default;
};

using EvaluatorKind = std::variant<SyntheticSpec, TabularSpec, ExternalSpec>;

void to_json(Json& j, const EvaluatorKind& k);
void from_json(const Json& j, EvaluatorKind& k);

class Evaluator {
public:
    virtual ~Evaluator() = default;

    // Throws an EvaluationError subclass on failure.
    virtual TrainingMetrics evaluate(const Genome& g, const ObjectiveConfig& cfg) = 0;

    // Results in input order. The default evaluates one at a time.
    virtual std::vector<TrainingMetrics> evaluate_batch(std::span<const Genome> genomes, const ObjectiveConfig& cfg);

    // True when every genome can be evaluated deterministically (oracle-capable).
    [[nodiscard]] virtual bool enumerable() const noexcept { return false; }
    [[nodiscard]] virtual std::string name() const = 0;
};

// Desk-scale stand-in for partial training. The formula is frozen:
//   cap  = ln(count_params(decode(g), C))
//   qbar = mean of q(op): CONV3D 1.00, P3D 0.92, CONV2D 0.80
//   conn = 0.9 + 0.025 * longest_path
//   pen  = 1 - 0.02 * |lr_level - 4|
//   val  = clip(C * (1 - exp(-cap/12)) * qbar * conn * pen, 0, C)
//   train = min(C, 1.05 * val)
//   e_max = clip(round(E * (0.5 + 0.5 * (1 - exp(-cap/12)))), 1, E)
// round() is half away from zero.
TrainingMetrics synthetic_metrics(const Genome& g, const ObjectiveConfig& cfg);

class SyntheticEvaluator final : public Evaluator {
public:
    explicit SyntheticEvaluator(SyntheticSpec spec = {}) : spec_(spec) {}

    TrainingMetrics evaluate(const Genome& g, const ObjectiveConfig& cfg) override;
    [[nodiscard]] bool enumerable() const noexcept override { return true; }
    [[nodiscard]] std::string name() const override { return "synthetic"; }

private:
    SyntheticSpec spec_;
};

// CSV table: header, then one row per genome in canonical field order followed
// by mc_dice_train, mc_dice_val, e_max.
class TabularEvaluator final : public Evaluator {
public:
    explicit TabularEvaluator(const std::filesystem::path& path);
    explicit TabularEvaluator(std::map<Genome, TrainingMetrics> rows) : rows_(std::move(rows)) {}

    TrainingMetrics evaluate(const Genome& g, const ObjectiveConfig& cfg) override;
    [[nodiscard]] bool enumerable() const noexcept override { return true; }
    [[nodiscard]] std::string name() const override { return "tabular"; }

    [[nodiscard]] const std::map<Genome, TrainingMetrics>& rows() const noexcept { return rows_; }

private:
    std::map<Genome, TrainingMetrics> rows_;
};

std::string tabular_header();
void write_table(const std::filesystem::path& path, const std::map<Genome, TrainingMetrics>& rows);

// Line-delimited JSON over a child's stdin/stdout.
//   request:  {"id":int,"genome":{...},"epochs":E,"num_classes":C}
//   response: {"id":int,"mc_dice_train":float,"mc_dice_val":float,"e_max":int}
// Responses may arrive in any order. A malformed line, an error response or a
// dead child raises ProtocolError; a late reply raises EvaluationTimeout. In
// both cases the child is restarted on the next request.
class ExternalEvaluator final : public Evaluator {
public:
    explicit ExternalEvaluator(ExternalSpec spec);
    ~ExternalEvaluator() override;

    ExternalEvaluator(const ExternalEvaluator&) = delete;
    ExternalEvaluator& operator=(const ExternalEvaluator&) = delete;

    TrainingMetrics evaluate(const Genome& g, const ObjectiveConfig& cfg) override;
    std::vector<TrainingMetrics> evaluate_batch(std::span<const Genome> genomes, const ObjectiveConfig& cfg) override;
    [[nodiscard]] std::string name() const override { return "external"; }

    // Number of times a child process was launched.
    [[nodiscard]] int launches() const noexcept { return launches_; }

private:
    void ensure_running();
    void stop();
    void send_line(const std::string& line);
    // Reads one line, waiting until deadline.
    std::string read_line(std::chrono::steady_clock::time_point deadline);

    ExternalSpec spec_;
    std::mutex mutex_;
    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
    std::int64_t next_id_ = 1;
    int launches_ = 0;
};

// Wire-format helpers, shared by the evaluator and protocol tests.
Json make_request(std::int64_t id, const Genome& g, const ObjectiveConfig& cfg);
// Parses and validates a response line. Throws ProtocolError.
std::pair<std::int64_t, TrainingMetrics> parse_response(const std::string& line, const ObjectiveConfig& cfg);
Json make_response(std::int64_t id, const TrainingMetrics& m);

std::unique_ptr<Evaluator> make_evaluator(const EvaluatorKind& kind);

} // namespace moenas
