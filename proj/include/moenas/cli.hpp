#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "moenas/engine.hpp"
#include "moenas/metrics.hpp"

namespace moenas {

// Exit statuses shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;   // bad arguments or configuration
inline constexpr int kExitRuntime = 2; // evaluation, IO or checkpoint failures

// File names inside a run directory.
inline constexpr std::string_view kRunLogFile = "run_log.jsonl";
inline constexpr std::string_view kCheckpointFile = "checkpoint.json";
inline constexpr std::string_view kNdsFile = "nds.csv";
inline constexpr std::string_view kSummaryFile = "summary.json";
inline constexpr std::string_view kConfigFile = "config.toml";
inline constexpr std::string_view kOracleFrontFile = "oracle_front.csv";
inline constexpr std::string_view kOracleSummaryFile = "oracle_summary.json";
inline constexpr std::string_view kBenchFile = "bench.csv";

// True front of the configured evaluator, or nothing if it is not enumerable.
std::optional<FrontSummary> oracle_for(const EngineConfig& cfg);

// Hypervolume / IGD of a final archive against an oracle front.
struct FrontQuality {
    double hypervolume = 0.0;
    double oracle_hypervolume = 0.0;
    double ratio = 0.0;
    double igd = 0.0;
    Point reference{};
};

FrontQuality assess(const std::vector<EvaluationRecord>& nds, const FrontSummary& oracle);

// Runs cfg to completion (or through generation stop_after) inside out_dir,
// writing the run log, a checkpoint per generation boundary, the final NDS CSV
// and summary.json. The oracle is used for the summary when given.
RunResult execute_run(const EngineConfig& cfg, const std::filesystem::path& out_dir,
                      const FrontSummary* oracle = nullptr, std::optional<int> stop_after = std::nullopt);

// Continues the run whose checkpoint is at checkpoint_path, in the same directory.
RunResult resume_run(const std::filesystem::path& checkpoint_path, const FrontSummary* oracle = nullptr);

// "0..4" or "0,3,7"
std::vector<std::uint64_t> parse_seed_list(std::string_view text);
// "samea,mea,random"
std::vector<Variant> parse_variant_list(std::string_view text);

int cmd_run(const std::filesystem::path& config_path, std::optional<std::uint64_t> seed,
            const std::filesystem::path& out_dir, std::optional<int> stop_after, std::ostream& out,
            std::ostream& err);
int cmd_oracle(const std::filesystem::path& config_path, const std::filesystem::path& out_dir, std::ostream& out,
               std::ostream& err);
int cmd_bench(const std::filesystem::path& config_path, const std::vector<Variant>& variants,
              const std::vector<std::uint64_t>& seeds, const std::filesystem::path& out_dir, std::ostream& out,
              std::ostream& err);
int cmd_resume(const std::filesystem::path& checkpoint_path, std::ostream& out, std::ostream& err);

} // namespace moenas
