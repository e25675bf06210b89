#pragma once

#include "gridstress/dc_engine.hpp"
#include "gridstress/network.hpp"
#include "gridstress/topology.hpp"

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gridstress {

/// How limit violations are tallied.
enum class ViolationCounting {
    PerLine,  ///< a monitored branch counts once however many outages overload it
    PerCell,  ///< every (branch, outage) pair above the limit counts
};

/// Loading limits as fractions of each branch's normal rating.
struct LimitSet {
    double normal_fraction = 1.0;
    double contingency_fraction = 1.2;
    double contingency_duration_hours = 4.0;
    double emergency_fraction = 1.35;
    double emergency_duration_minutes = 15.0;
    /// Threshold_i for vulnerability/criticality degrees, unless overridden per branch.
    double degree_threshold_fraction = 1.0;
    std::map<BranchId, double> degree_threshold_overrides;
    /// Rank threshold for the system vulnerability and criticality degrees.
    double system_threshold_fraction = 1.0;
    ViolationCounting counting = ViolationCounting::PerLine;

    /// Throws Error(Config) unless 0 < normal <= contingency <= emergency and all thresholds > 0.
    void validate() const;
    [[nodiscard]] double degree_threshold(BranchId branch) const;
};

/// Post-contingency loading |f_i| / f_i^rated for every (monitored i, outage j).
/// Columns whose outage is invalid hold NaN and are skipped by every reduction.
struct PostContingencyTable {
    std::vector<BranchId> monitored;
    std::vector<BranchId> outages;
    std::vector<bool> column_valid;
    Eigen::MatrixXd loading;  ///< monitored x outages, per unit of rating

    [[nodiscard]] std::size_t valid_columns() const;
};

/// Builds the table from base flows and distribution factors.
PostContingencyTable build_table(const FlowState& flow, const LodfMatrix& lodf, const ResolvedMonitors& monitors,
                                 const Network& net);
PostContingencyTable build_table(const FlowState& flow, const LodfMatrix& lodf, const MonitorSets& monitors,
                                 const Network& net);

/// V_i^rank in percent. Throws Error(Config) "no contingencies evaluated" if no column is valid.
std::vector<double> vulnerability_rank(const PostContingencyTable& table);
/// V_i^degree: count of valid outages loading row i above its threshold.
std::vector<int> vulnerability_degree(const PostContingencyTable& table, const LimitSet& limits);
std::vector<int> vulnerability_degree(const PostContingencyTable& table, double threshold_fraction);
/// V_System: non-radial monitored branches with V_i^rank above the threshold.
int system_vulnerability_degree(const PostContingencyTable& table, const std::vector<double>& v_rank,
                                const TopologyClassification& topology, double threshold_fraction);

/// C_j^rank in percent; nullopt for invalid outages.
std::vector<std::optional<double>> criticality_rank(const PostContingencyTable& table);
std::vector<std::optional<int>> criticality_degree(const PostContingencyTable& table, const LimitSet& limits);
std::vector<std::optional<int>> criticality_degree(const PostContingencyTable& table, double threshold_fraction);
/// C_System: non-radial valid outages with C_j^rank above the threshold.
int system_criticality_degree(const PostContingencyTable& table, const std::vector<std::optional<double>>& c_rank,
                              const TopologyClassification& topology, double threshold_fraction);

struct ViolationCounts {
    int emergency = 0;
    int contingency = 0;
};

ViolationCounts violation_counts(const PostContingencyTable& table, const LimitSet& limits);

/// All stress metrics for one operating point.
struct StressReport {
    std::string label;
    std::vector<BranchId> monitored;
    std::vector<BranchId> outages;
    std::vector<double> v_rank;  ///< percent
    std::vector<int> v_degree;
    int v_system = 0;
    std::vector<std::optional<double>> c_rank;  ///< percent, nullopt for invalid outages
    std::vector<std::optional<int>> c_degree;
    int c_system = 0;
    int emergency_violations = 0;
    int contingency_violations = 0;
    std::vector<BranchId> invalid_outages;

    [[nodiscard]] double max_v_rank() const;
    [[nodiscard]] int max_v_degree() const;
    [[nodiscard]] double max_c_rank() const;
    [[nodiscard]] int max_c_degree() const;
    /// Highest post-contingency loading anywhere, per unit of rating.
    [[nodiscard]] double peak_loading() const { return max_v_rank() / 100.0; }

    friend bool operator==(const StressReport&, const StressReport&) = default;
};

/// Every metric of `table` (counts against `limits`, radial exclusion from `topology`).
StressReport make_report(const PostContingencyTable& table, const TopologyClassification& topology,
                         const LimitSet& limits, std::string label = {});

/// Intermediate products of one full N-1 stress assessment.
struct StressAnalysis {
    TopologyClassification topology;
    FlowState base;
    LodfMatrix lodf;
    PostContingencyTable table;
    StressReport report;
};

/// Parse-free pipeline: topology, DC flows, PTDF, LODF, table and metrics.
StressAnalysis analyze_stress(const Network& net, const MonitorSets& monitors, const LimitSet& limits,
                              double sparsity_threshold = 0.0, std::string label = {});

}  // namespace gridstress
