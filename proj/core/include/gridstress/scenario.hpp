#pragma once

#include "gridstress/case_io.hpp"
#include "gridstress/error.hpp"
#include "gridstress/report_io.hpp"
#include "gridstress/stress_metrics.hpp"
#include "gridstress/switching.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gridstress {

/// One loading condition: every bus load times `uniform`, except buses in
/// `overrides`, whose base load is multiplied by the given factor instead.
struct LoadScenario {
    std::string label;
    double uniform = 1.0;
    std::map<BusId, double> overrides;

    friend bool operator==(const LoadScenario&, const LoadScenario&) = default;
};

/// The four loadings of the 118-bus study: 97%, 105%, 106% with extra load at
/// buses 40 and 41, and 110%.
std::vector<LoadScenario> standard_loading_preset();

enum class RunMode { Analyze, Preventive, Corrective };
enum class OutputFormat { Csv, Json };

std::string_view to_string(RunMode mode) noexcept;
std::string_view to_string(OutputFormat format) noexcept;

struct ScenarioConfig {
    std::filesystem::path case_path;
    std::vector<LoadScenario> scenarios;
    LimitSet limits;
    double sparsity_threshold = 0.0;
    MonitorSets monitors;
    RunMode mode = RunMode::Analyze;
    /// Branch id or "FROM-TO" reference; corrective mode only.
    std::optional<std::string> contingency;
    StressPolicy policy;
    SearchOptions search;
    ParseOptions parse;

    std::optional<std::filesystem::path> out_path;
    OutputFormat format = OutputFormat::Csv;
    std::optional<std::filesystem::path> chart_path;
    std::optional<std::filesystem::path> ptdf_path;
    std::optional<std::filesystem::path> lodf_path;
    bool include_timestamp = true;

    /// Throws Error(Config) on missing mode fields, non-positive factors or duplicate labels.
    void validate() const;
};

struct ScenarioResult {
    LoadScenario scenario;
    double total_load_mw = 0.0;
    StressReport report;
    std::optional<SwitchingRecommendation> recommendation;
};

struct Provenance {
    std::string input_sha256;
    std::string tool_version;
    std::optional<std::string> timestamp;  ///< UTC, ISO 8601
};

struct TimingBreakdown {
    double parse_ms = 0.0;
    std::vector<double> scenario_ms;  ///< analysis plus search, per scenario
};

struct RunReport {
    ScenarioConfig config;
    Network network;  ///< the case as parsed, before any scaling
    Provenance provenance;
    std::vector<ScenarioResult> results;
    TimingBreakdown timing;
};

/// Parse, scale, analyze and (per mode) search every scenario in config order.
/// Does not write files; see write_outputs.
RunReport run(const ScenarioConfig& config);

/// Summary rows in output order. Preventive runs add "<label> (PTS)" after each
/// scenario with an action; corrective runs add "<label> N-1 <id>" and, with an
/// action, "<label> (CTS)".
std::vector<StressSummary> table_rows(const RunReport& report);

/// CSV: the summary table. JSON: schema "gridstress.run", version 1, with the
/// full reports, recommendations and provenance; timing and timestamp are
/// present only when the config asks for a timestamp.
void emit(const RunReport& report, OutputFormat format, std::ostream& out);

/// Stress reports of every table row of a JSON run document, in table order.
/// Throws ParseError if the document is not a version 1 run.
std::vector<StressReport> reports_from_run_json(std::string_view text);

/// Tidy chart data with header "scenario,metric,value".
void write_chart_data(const RunReport& report, std::ostream& out);

/// Writes every output path named in the config. Throws Error(Io) if a file cannot be written.
void write_outputs(const RunReport& report);

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitParse = 3;
inline constexpr int kExitInfeasible = 4;
inline constexpr int kExitNoCandidate = 5;
inline constexpr int kExitListDepleted = 6;
inline constexpr int kExitIo = 7;

int exit_code(ErrorKind kind) noexcept;
/// kExitNoCandidate or kExitListDepleted if any triggered search ended that way, else kExitOk.
int exit_code(const RunReport& report) noexcept;

/// Lowercase hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);

std::string tool_version();

}  // namespace gridstress
