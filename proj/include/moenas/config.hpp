#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "moenas/engine.hpp"

namespace moenas {

// Reads the TOML-style run configuration. Sections and keys:
//
//   [engine]     population, neighborhood, generations, learning_generations,
//                epsilon, epsilon_subproblem, theta_pbi, gamma, mutation_rate,
//                max_attempts, seed, variant ("samea" | "mea" | "random")
//   [objective]  alpha, beta, num_classes, total_epochs
//   [forest]     num_trees, min_samples_split, mtry
//   [evaluator]  kind ("synthetic" | "tabular" | "external")
//                synthetic: noise_sigma, noise_seed
//                tabular:   path (relative paths resolve against base_dir)
//                external:  command, args (array of strings), timeout_seconds
//
// Every key is optional; omitted keys keep the EngineConfig defaults. Values
// are integers, floats, booleans, double-quoted strings or arrays of strings.
// Unknown sections or keys, wrong value types and out-of-range values raise
// ConfigError naming the key as "section.key".
EngineConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});

// Throws ConfigError("", ...) if the file cannot be read.
EngineConfig load_config(const std::filesystem::path& path);

// Serializes cfg in the same format; parse_config(format_config(c)) == c.
std::string format_config(const EngineConfig& cfg);

} // namespace moenas
