#pragma once

#include "crashnav/bench/bench.hpp"

#include <json.hpp>

namespace crashnav::bench {

inline constexpr int kBenchFormatVersion = 1;

nlohmann::json config_to_json(const BenchmarkConfig& cfg);
/// Missing keys keep their defaults; unknown methods or malformed values
/// throw ConfigError.
BenchmarkConfig config_from_json(const nlohmann::json& doc);
BenchmarkConfig load_config(const std::filesystem::path& path);

nlohmann::json results_to_json(const BenchmarkResult& result, const BenchmarkConfig& cfg);
BenchmarkTable table_from_json(const nlohmann::json& doc);

/// Human-readable table: methods as rows, environments as column pairs of
/// average distance and time, in two blocks of three environments, followed
/// by the published reference values for the same cells.
std::string render_table(const BenchmarkTable& table);

/// Published reference (distance m, time s) for a shipped environment and
/// method, when one exists.
std::optional<std::pair<double, double>> reference_value(const std::string& env, const std::string& method);

/// Writes <stem>.json and <stem>.txt. Cells of method "Human" already
/// present in an existing <stem>.json are carried over.
void write_results(const std::filesystem::path& stem, const BenchmarkResult& result, const BenchmarkConfig& cfg);

/// Appends one operator trial to <stem>.json (creating it if needed) under
/// method "Human" and rewrites <stem>.txt. Practice runs are not recorded.
void record_human_trial(const std::filesystem::path& stem, const std::string& env, const RunSummary& run);

}  // namespace crashnav::bench
