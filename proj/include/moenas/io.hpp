#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "moenas/evaluators.hpp"

namespace moenas {

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

// Strict full-string parse; throws Error on trailing garbage.
double parse_double(std::string_view s);

std::string nds_csv_header();

// One row per record: genome fields, f1, f2, metrics, param_count, generation,
// phase. Rows are written in the given order.
std::string format_nds_csv(const std::vector<EvaluationRecord>& records);
void write_nds_csv(const std::filesystem::path& path, const std::vector<EvaluationRecord>& records);

// Inverse of write_nds_csv; throws Error on malformed content.
std::vector<EvaluationRecord> parse_nds_csv(std::string_view text);
std::vector<EvaluationRecord> read_nds_csv(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

} // namespace moenas
