#pragma once

#include "gridstress/network.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace gridstress {

/// Real-power state of a network. Vectors are indexed by position in
/// Network::branches / Network::buses.
struct FlowState {
    std::vector<double> flows_mw;       ///< positive from from_bus to to_bus
    std::vector<double> injections_mw;  ///< generation minus load, sums to zero
    std::vector<double> angles_rad;     ///< empty when derived from distribution factors
};

/// Reduced nodal susceptance matrix (slack row and column removed), factored once.
class SusceptanceSystem {
public:
    /// Throws Error(Singular) if the in-service graph is not connected or the factorization fails.
    explicit SusceptanceSystem(const Network& net);

    /// Bus angles (radians, slack = 0) for per-unit injections at every bus.
    /// The slack entry of `injections_pu` is ignored.
    [[nodiscard]] Eigen::VectorXd solve_angles(const Eigen::VectorXd& injections_pu) const;

    /// Infinity norm of B_reduced * theta - p for a solution returned by solve_angles.
    [[nodiscard]] double residual(const Eigen::VectorXd& angles, const Eigen::VectorXd& injections_pu) const;

    [[nodiscard]] std::size_t slack_position() const noexcept { return slack_; }
    [[nodiscard]] std::size_t bus_count() const noexcept { return n_; }

private:
    std::size_t n_ = 0;
    std::size_t slack_ = 0;
    Eigen::SparseMatrix<double> reduced_;
    std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>> lu_;

    [[nodiscard]] Eigen::VectorXd reduce(const Eigen::VectorXd& full) const;
};

/// DC power flow. Any generation/load mismatch is taken up by the slack bus.
FlowState solve_dc(const Network& net);
FlowState solve_dc(const Network& net, const SusceptanceSystem& system);

/// Net injection per bus (generation minus load), MW, before slack balancing.
std::vector<double> bus_injections(const Network& net);

struct PtdfMatrix {
    /// branch x bus: flow change on a branch per 1 MW injected at a bus and withdrawn at the slack.
    Eigen::MatrixXd entries;
    BusId slack_bus;
    std::vector<BranchId> branch_ids;
    std::vector<BusId> bus_ids;
};

PtdfMatrix compute_ptdf(const Network& net);
PtdfMatrix compute_ptdf(const Network& net, const SusceptanceSystem& system);

enum class OutageValidity : std::uint8_t {
    Valid,
    Radial,        ///< bridge; its outage islands the network
    OutOfService,  ///< not an outage candidate
    Degenerate,    ///< non-radial but 1 - PTDF_jj is numerically zero
};

std::string_view to_string(OutageValidity v) noexcept;

/// Line outage distribution factors over all branches (rows: monitored, columns: outaged).
/// Invalid columns hold NaN and must be checked through valid_outage().
struct LodfMatrix {
    Eigen::MatrixXd entries;
    std::vector<OutageValidity> validity;
    std::vector<std::string> diagnostics;  ///< per column; non-empty only for Degenerate columns
    std::vector<BranchId> branch_ids;
    double sparsity_threshold = 0.0;

    [[nodiscard]] bool valid_outage(std::size_t column) const { return validity.at(column) == OutageValidity::Valid; }
    /// Throws Error(Islanding) for an invalid column.
    [[nodiscard]] double factor(std::size_t row, std::size_t column) const;
    [[nodiscard]] std::optional<std::size_t> position(BranchId id) const;
    /// Off-diagonal nonzeros over valid columns.
    [[nodiscard]] std::size_t stored_nonzeros() const;
};

/// LODF_ij = phi_ij / (1 - phi_jj), phi_kj being the PTDF of branch k for a
/// transfer between branch j's terminals. Diagonal entries are -1. Entries
/// with magnitude below `sparsity_threshold` are stored as zero.
LodfMatrix compute_lodf(const PtdfMatrix& ptdf, const Network& net, double sparsity_threshold = 0.0);

/// f_i = f_i0 + LODF_ij * f_j0 for every branch; the outaged branch carries 0.
/// Throws Error(Islanding) if the outage column is invalid.
FlowState post_outage_flows(const FlowState& flow, const LodfMatrix& lodf, BranchId outage);

/// Which branches are watched for overloads and which are taken out one at a time.
/// An unset list means every in-service branch.
struct MonitorSets {
    std::optional<std::vector<BranchId>> monitored;
    std::optional<std::vector<BranchId>> outages;

    /// The same selection with `id` dropped from any explicit list.
    [[nodiscard]] MonitorSets without(BranchId id) const;
};

struct ResolvedMonitors {
    std::vector<std::size_t> monitored;  ///< branch positions, ascending
    std::vector<std::size_t> outages;    ///< branch positions, ascending
};

/// Throws Error(Config) if a listed branch is unknown or out of service.
ResolvedMonitors resolve_monitors(const MonitorSets& sets, const Network& net);

/// CSV dumps for external validation: one row per branch, one column per bus / outage.
void write_ptdf_csv(std::ostream& out, const PtdfMatrix& ptdf);
void write_lodf_csv(std::ostream& out, const LodfMatrix& lodf);

}  // namespace gridstress
