#include "gridstress/stress_metrics.hpp"

#include "gridstress/error.hpp"

#include <algorithm>
#include <cmath>

namespace gridstress {

void LimitSet::validate() const
{
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!positive(normal_fraction) || !positive(contingency_fraction) || !positive(emergency_fraction)) {
        throw Error(ErrorKind::Config, "limit fractions must be positive");
    }
    if (!(normal_fraction <= contingency_fraction && contingency_fraction <= emergency_fraction)) {
        throw Error(ErrorKind::Config, "limits must satisfy normal <= contingency <= emergency");
    }
    if (!positive(degree_threshold_fraction) || !positive(system_threshold_fraction)) {
        throw Error(ErrorKind::Config, "degree thresholds must be positive");
    }
    for (const auto& [branch, fraction] : degree_threshold_overrides) {
        if (!positive(fraction)) {
            throw Error(ErrorKind::Config, "degree threshold for branch " + std::to_string(branch.value) +
                                               " must be positive");
        }
    }
}

double LimitSet::degree_threshold(BranchId branch) const
{
    auto it = degree_threshold_overrides.find(branch);
    return it != degree_threshold_overrides.end() ? it->second : degree_threshold_fraction;
}

std::size_t PostContingencyTable::valid_columns() const
{
    return static_cast<std::size_t>(std::count(column_valid.begin(), column_valid.end(), true));
}

PostContingencyTable build_table(const FlowState& flow, const LodfMatrix& lodf, const ResolvedMonitors& monitors,
                                 const Network& net)
{
    if (flow.flows_mw.size() != net.branches.size() || lodf.branch_ids.size() != net.branches.size()) {
        throw Error(ErrorKind::Config, "flow state and LODF matrix do not match the network");
    }
    PostContingencyTable table;
    const auto rows = static_cast<Eigen::Index>(monitors.monitored.size());
    const auto cols = static_cast<Eigen::Index>(monitors.outages.size());
    table.loading.resize(rows, cols);
    for (std::size_t i : monitors.monitored) {
        table.monitored.push_back(net.branches[i].id);
    }
    for (std::size_t j : monitors.outages) {
        table.outages.push_back(net.branches[j].id);
        table.column_valid.push_back(lodf.valid_outage(j));
    }

    for (Eigen::Index c = 0; c < cols; ++c) {
        const std::size_t j = monitors.outages[static_cast<std::size_t>(c)];
        if (!table.column_valid[static_cast<std::size_t>(c)]) {
            table.loading.col(c).setConstant(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        const double outaged_flow = flow.flows_mw[j];
        for (Eigen::Index r = 0; r < rows; ++r) {
            const std::size_t i = monitors.monitored[static_cast<std::size_t>(r)];
            if (i == j) {
                table.loading(r, c) = 0.0;
                continue;
            }
            const double post = flow.flows_mw[i] +
                                lodf.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * outaged_flow;
            table.loading(r, c) = std::abs(post) / net.branches[i].rating_mw;
        }
    }
    return table;
}

PostContingencyTable build_table(const FlowState& flow, const LodfMatrix& lodf, const MonitorSets& monitors,
                                 const Network& net)
{
    return build_table(flow, lodf, resolve_monitors(monitors, net), net);
}

namespace {

// Row maxima over valid columns as fractions; 0 when nothing is valid.
std::vector<double> row_max(const PostContingencyTable& table)
{
    std::vector<double> out(table.monitored.size(), 0.0);
    for (Eigen::Index c = 0; c < table.loading.cols(); ++c) {
        if (!table.column_valid[static_cast<std::size_t>(c)]) {
            continue;
        }
        for (Eigen::Index r = 0; r < table.loading.rows(); ++r) {
            out[static_cast<std::size_t>(r)] = std::max(out[static_cast<std::size_t>(r)], table.loading(r, c));
        }
    }
    return out;
}

template <class ThresholdOf>
std::vector<int> row_counts(const PostContingencyTable& table, ThresholdOf threshold_of)
{
    std::vector<int> out(table.monitored.size(), 0);
    for (Eigen::Index r = 0; r < table.loading.rows(); ++r) {
        const double threshold = threshold_of(table.monitored[static_cast<std::size_t>(r)]);
        for (Eigen::Index c = 0; c < table.loading.cols(); ++c) {
            if (table.column_valid[static_cast<std::size_t>(c)] && table.loading(r, c) > threshold) {
                ++out[static_cast<std::size_t>(r)];
            }
        }
    }
    return out;
}

template <class ThresholdOf>
std::vector<std::optional<int>> column_counts(const PostContingencyTable& table, ThresholdOf threshold_of)
{
    std::vector<std::optional<int>> out(table.outages.size());
    for (Eigen::Index c = 0; c < table.loading.cols(); ++c) {
        if (!table.column_valid[static_cast<std::size_t>(c)]) {
            continue;
        }
        int count = 0;
        for (Eigen::Index r = 0; r < table.loading.rows(); ++r) {
            if (table.loading(r, c) > threshold_of(table.monitored[static_cast<std::size_t>(r)])) {
                ++count;
            }
        }
        out[static_cast<std::size_t>(c)] = count;
    }
    return out;
}

void require_positive(double threshold_fraction)
{
    if (!(threshold_fraction > 0.0)) {
        throw Error(ErrorKind::Config, "threshold fraction must be positive");
    }
}

}  // namespace

std::vector<double> vulnerability_rank(const PostContingencyTable& table)
{
    if (table.valid_columns() == 0) {
        throw Error(ErrorKind::Config, "no contingencies evaluated");
    }
    auto out = row_max(table);
    for (double& v : out) {
        v *= 100.0;
    }
    return out;
}

std::vector<int> vulnerability_degree(const PostContingencyTable& table, const LimitSet& limits)
{
    return row_counts(table, [&](BranchId id) { return limits.degree_threshold(id); });
}

std::vector<int> vulnerability_degree(const PostContingencyTable& table, double threshold_fraction)
{
    require_positive(threshold_fraction);
    return row_counts(table, [=](BranchId) { return threshold_fraction; });
}

int system_vulnerability_degree(const PostContingencyTable& table, const std::vector<double>& v_rank,
                                const TopologyClassification& topology, double threshold_fraction)
{
    int count = 0;
    for (std::size_t r = 0; r < table.monitored.size(); ++r) {
        if (!topology.is_radial(table.monitored[r]) && v_rank.at(r) > 100.0 * threshold_fraction) {
            ++count;
        }
    }
    return count;
}

std::vector<std::optional<double>> criticality_rank(const PostContingencyTable& table)
{
    std::vector<std::optional<double>> out(table.outages.size());
    for (Eigen::Index c = 0; c < table.loading.cols(); ++c) {
        if (!table.column_valid[static_cast<std::size_t>(c)]) {
            continue;
        }
        const double peak = table.loading.rows() > 0 ? table.loading.col(c).maxCoeff() : 0.0;
        out[static_cast<std::size_t>(c)] = 100.0 * peak;
    }
    return out;
}

std::vector<std::optional<int>> criticality_degree(const PostContingencyTable& table, const LimitSet& limits)
{
    return column_counts(table, [&](BranchId id) { return limits.degree_threshold(id); });
}

std::vector<std::optional<int>> criticality_degree(const PostContingencyTable& table, double threshold_fraction)
{
    require_positive(threshold_fraction);
    return column_counts(table, [=](BranchId) { return threshold_fraction; });
}

int system_criticality_degree(const PostContingencyTable& table, const std::vector<std::optional<double>>& c_rank,
                              const TopologyClassification& topology, double threshold_fraction)
{
    int count = 0;
    for (std::size_t c = 0; c < table.outages.size(); ++c) {
        const auto& rank = c_rank.at(c);
        if (rank && !topology.is_radial(table.outages[c]) && *rank > 100.0 * threshold_fraction) {
            ++count;
        }
    }
    return count;
}

ViolationCounts violation_counts(const PostContingencyTable& table, const LimitSet& limits)
{
    ViolationCounts out;
    for (Eigen::Index r = 0; r < table.loading.rows(); ++r) {
        int emergency_cells = 0;
        int contingency_cells = 0;
        for (Eigen::Index c = 0; c < table.loading.cols(); ++c) {
            if (!table.column_valid[static_cast<std::size_t>(c)]) {
                continue;
            }
            const double v = table.loading(r, c);
            emergency_cells += v > limits.emergency_fraction ? 1 : 0;
            contingency_cells += v > limits.contingency_fraction ? 1 : 0;
        }
        if (limits.counting == ViolationCounting::PerLine) {
            out.emergency += emergency_cells > 0 ? 1 : 0;
            out.contingency += contingency_cells > 0 ? 1 : 0;
        } else {
            out.emergency += emergency_cells;
            out.contingency += contingency_cells;
        }
    }
    return out;
}

double StressReport::max_v_rank() const
{
    return v_rank.empty() ? 0.0 : *std::max_element(v_rank.begin(), v_rank.end());
}

int StressReport::max_v_degree() const
{
    return v_degree.empty() ? 0 : *std::max_element(v_degree.begin(), v_degree.end());
}

double StressReport::max_c_rank() const
{
    double best = 0.0;
    for (const auto& r : c_rank) {
        if (r) {
            best = std::max(best, *r);
        }
    }
    return best;
}

int StressReport::max_c_degree() const
{
    int best = 0;
    for (const auto& d : c_degree) {
        if (d) {
            best = std::max(best, *d);
        }
    }
    return best;
}

StressReport make_report(const PostContingencyTable& table, const TopologyClassification& topology,
                         const LimitSet& limits, std::string label)
{
    limits.validate();
    StressReport report;
    report.label = std::move(label);
    report.monitored = table.monitored;
    report.outages = table.outages;

    report.v_rank = row_max(table);
    for (double& v : report.v_rank) {
        v *= 100.0;
    }
    report.v_degree = vulnerability_degree(table, limits);
    report.v_system = system_vulnerability_degree(table, report.v_rank, topology, limits.system_threshold_fraction);
    report.c_rank = criticality_rank(table);
    report.c_degree = criticality_degree(table, limits);
    report.c_system = system_criticality_degree(table, report.c_rank, topology, limits.system_threshold_fraction);

    const auto counts = violation_counts(table, limits);
    report.emergency_violations = counts.emergency;
    report.contingency_violations = counts.contingency;
    for (std::size_t c = 0; c < table.outages.size(); ++c) {
        if (!table.column_valid[c]) {
            report.invalid_outages.push_back(table.outages[c]);
        }
    }
    return report;
}

StressAnalysis analyze_stress(const Network& net, const MonitorSets& monitors, const LimitSet& limits,
                              double sparsity_threshold, std::string label)
{
    limits.validate();
    StressAnalysis out;
    out.topology = classify_topology(net);
    const SusceptanceSystem system(net);
    out.base = solve_dc(net, system);
    out.lodf = compute_lodf(compute_ptdf(net, system), net, sparsity_threshold);
    out.table = build_table(out.base, out.lodf, monitors, net);
    out.report = make_report(out.table, out.topology, limits, std::move(label));
    return out;
}

}  // namespace gridstress
