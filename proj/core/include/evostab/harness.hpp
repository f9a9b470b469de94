#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace evostab {

inline constexpr std::string_view kVersion = "0.1.0";

/// Scenario kinds understood by run_scenario.
const std::vector<std::string>& scenario_kinds();

/// CSV header of each kind.
const std::vector<std::string>& csv_columns(std::string_view kind);

struct RunOverrides {
    std::optional<std::string> kind;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
};

struct Report {
    std::string kind;
    nlohmann::json scenario;
    std::vector<std::string> columns;
    /// Pre-formatted CSV cells.
    std::vector<std::vector<std::string>> rows;
    std::vector<bool> row_passed;
    nlohmann::json summary = nlohmann::json::object();
    nlohmann::json thresholds = nlohmann::json::object();
    nlohmann::json provenance = nlohmann::json::object();
    bool passed = true;
    /// Module error that aborted the computation, if any.
    std::optional<std::string> error;
    double runtime_seconds = 0.0;
};

/// Validates the configuration (throwing ValidationError listing every
/// offending field) and runs it. Computational failures are recorded in
/// Report::error rather than thrown.
Report run_scenario(const nlohmann::json& config, const RunOverrides& overrides = {});

/// Parses JSON text first; parse errors surface as ValidationError.
Report run_scenario_text(std::string_view text, const RunOverrides& overrides = {});

/// rows.csv contents: header plus one line per row.
std::string csv_text(const Report& r);

/// summary.json contents.
nlohmann::json summary_json(const Report& r);

/// Writes summary.json and rows.csv into `dir`, creating it if needed.
/// Throws std::runtime_error on I/O failure.
void emit_report(const Report& r, const std::filesystem::path& dir);

/// 0 iff the run completed and every row passed.
int exit_code(const Report& r);

} // namespace evostab
