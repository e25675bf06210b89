#pragma once

#include "gridstress/stress_metrics.hpp"
#include "gridstress/switching.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace gridstress {

/// One row of the summary table: per-branch maxima plus the system scalars.
struct StressSummary {
    std::string label;
    double v_rank_pct = 0.0;
    int v_degree = 0;
    int v_system = 0;
    double c_rank_pct = 0.0;
    int c_degree = 0;
    int c_system = 0;
    int emergency_violations = 0;
    int contingency_violations = 0;

    friend bool operator==(const StressSummary&, const StressSummary&) = default;
};

StressSummary summarize(const StressReport& report);

/// Column order: loading, V_rank, V_degree, V_N, C_rank, C_degree, C_N,
/// emergency violations, contingency violations. Ranks as "123.45%".
inline constexpr std::string_view kTableHeader =
    "loading,v_rank,v_degree,v_n,c_rank,c_degree,c_n,emergency_violations,contingency_violations";

void write_table_csv(std::ostream& out, const std::vector<StressSummary>& rows);
/// Inverse of write_table_csv. Throws ParseError on malformed input.
std::vector<StressSummary> read_table_csv(std::istream& in);

/// Percent with two decimals and a trailing '%'.
std::string format_percent(double pct);

std::string stress_report_to_json(const StressReport& report);
StressReport stress_report_from_json(std::string_view text);

std::string recommendation_to_json(const SwitchingRecommendation& rec);

}  // namespace gridstress
