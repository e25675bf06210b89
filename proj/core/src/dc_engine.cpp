#include "gridstress/dc_engine.hpp"

#include "gridstress/error.hpp"
#include "gridstress/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace gridstress {

namespace {

constexpr double kResidualTolerancePu = 1e-9;
// |1 - phi_jj| below this for a non-bridge branch means the column cannot be trusted.
constexpr double kDegenerateDenominator = 1e-10;

}  // namespace

SusceptanceSystem::SusceptanceSystem(const Network& net) : n_(net.buses.size())
{
    if (n_ == 0) {
        throw Error(ErrorKind::Singular, "network has no buses");
    }
    const auto topo = classify_topology(net);
    if (topo.island_count() != 1) {
        throw Error(ErrorKind::Singular, "in-service network is split into " + std::to_string(topo.island_count()) +
                                             " islands; the susceptance system is singular");
    }
    const NetworkIndex index(net);
    slack_ = index.bus(net.slack_bus);

    // Reduced position: buses after the slack shift down by one.
    auto reduced_pos = [this](std::size_t i) { return i < slack_ ? i : i - 1; };

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(net.branches.size() * 4);
    for (const auto& br : net.branches) {
        if (!br.in_service) {
            continue;
        }
        const double b = 1.0 / br.reactance;
        const auto f = index.bus(br.from_bus);
        const auto t = index.bus(br.to_bus);
        if (f != slack_) {
            triplets.emplace_back(reduced_pos(f), reduced_pos(f), b);
        }
        if (t != slack_) {
            triplets.emplace_back(reduced_pos(t), reduced_pos(t), b);
        }
        if (f != slack_ && t != slack_) {
            triplets.emplace_back(reduced_pos(f), reduced_pos(t), -b);
            triplets.emplace_back(reduced_pos(t), reduced_pos(f), -b);
        }
    }
    const auto m = static_cast<Eigen::Index>(n_ - 1);
    reduced_.resize(m, m);
    reduced_.setFromTriplets(triplets.begin(), triplets.end());
    reduced_.makeCompressed();

    lu_ = std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>>();
    if (m > 0) {
        lu_->compute(reduced_);
        if (lu_->info() != Eigen::Success) {
            throw Error(ErrorKind::Singular, "susceptance factorization failed: " + lu_->lastErrorMessage());
        }
    }
}

Eigen::VectorXd SusceptanceSystem::reduce(const Eigen::VectorXd& full) const
{
    Eigen::VectorXd out(static_cast<Eigen::Index>(n_ - 1));
    for (std::size_t i = 0, r = 0; i < n_; ++i) {
        if (i != slack_) {
            out[static_cast<Eigen::Index>(r++)] = full[static_cast<Eigen::Index>(i)];
        }
    }
    return out;
}

Eigen::VectorXd SusceptanceSystem::solve_angles(const Eigen::VectorXd& injections_pu) const
{
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
    if (n_ <= 1) {
        return theta;
    }
    const Eigen::VectorXd reduced_theta = lu_->solve(reduce(injections_pu));
    for (std::size_t i = 0, r = 0; i < n_; ++i) {
        if (i != slack_) {
            theta[static_cast<Eigen::Index>(i)] = reduced_theta[static_cast<Eigen::Index>(r++)];
        }
    }
    return theta;
}

double SusceptanceSystem::residual(const Eigen::VectorXd& angles, const Eigen::VectorXd& injections_pu) const
{
    if (n_ <= 1) {
        return 0.0;
    }
    return (reduced_ * reduce(angles) - reduce(injections_pu)).lpNorm<Eigen::Infinity>();
}

std::vector<double> bus_injections(const Network& net)
{
    const NetworkIndex index(net);
    std::vector<double> p(net.buses.size(), 0.0);
    for (std::size_t i = 0; i < net.buses.size(); ++i) {
        p[i] = -net.buses[i].load_mw;
    }
    for (const auto& gen : net.generators) {
        p[index.bus(gen.bus)] += gen.output_mw;
    }
    return p;
}

FlowState solve_dc(const Network& net)
{
    return solve_dc(net, SusceptanceSystem(net));
}

FlowState solve_dc(const Network& net, const SusceptanceSystem& system)
{
    const NetworkIndex index(net);
    FlowState state;
    state.injections_mw = bus_injections(net);

    // The slack absorbs any mismatch. Sum the others in position order so the
    // result does not depend on where the slack sits.
    const std::size_t slack = system.slack_position();
    double others = 0.0;
    for (std::size_t i = 0; i < state.injections_mw.size(); ++i) {
        if (i != slack) {
            others += state.injections_mw[i];
        }
    }
    state.injections_mw[slack] = -others;

    Eigen::VectorXd p_pu(static_cast<Eigen::Index>(state.injections_mw.size()));
    for (std::size_t i = 0; i < state.injections_mw.size(); ++i) {
        p_pu[static_cast<Eigen::Index>(i)] = state.injections_mw[i] / net.base_mva;
    }
    const Eigen::VectorXd theta = system.solve_angles(p_pu);
    if (const double r = system.residual(theta, p_pu); !(r < kResidualTolerancePu)) {
        std::ostringstream os;
        os << "DC solve residual " << r << " pu exceeds " << kResidualTolerancePu;
        throw Error(ErrorKind::Singular, os.str());
    }

    state.angles_rad.assign(theta.data(), theta.data() + theta.size());
    state.flows_mw.assign(net.branches.size(), 0.0);
    for (std::size_t k = 0; k < net.branches.size(); ++k) {
        const auto& br = net.branches[k];
        if (!br.in_service) {
            continue;
        }
        const double dtheta = theta[static_cast<Eigen::Index>(index.bus(br.from_bus))] -
                              theta[static_cast<Eigen::Index>(index.bus(br.to_bus))];
        state.flows_mw[k] = net.base_mva * dtheta / br.reactance;
    }
    return state;
}

PtdfMatrix compute_ptdf(const Network& net)
{
    return compute_ptdf(net, SusceptanceSystem(net));
}

PtdfMatrix compute_ptdf(const Network& net, const SusceptanceSystem& system)
{
    const NetworkIndex index(net);
    const auto n = static_cast<Eigen::Index>(net.buses.size());
    const auto m = static_cast<Eigen::Index>(net.branches.size());

    // Column b of `angles` holds bus angles for a 1 pu injection at bus b
    // (withdrawn at the slack). Each column is an independent solve.
    Eigen::MatrixXd angles = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(n);
    for (Eigen::Index b = 0; b < n; ++b) {
        if (static_cast<std::size_t>(b) == system.slack_position()) {
            continue;
        }
        unit[b] = 1.0;
        angles.col(b) = system.solve_angles(unit);
        unit[b] = 0.0;
    }

    PtdfMatrix out;
    out.slack_bus = net.slack_bus;
    out.entries = Eigen::MatrixXd::Zero(m, n);
    for (Eigen::Index k = 0; k < m; ++k) {
        const auto& br = net.branches[static_cast<std::size_t>(k)];
        out.branch_ids.push_back(br.id);
        if (!br.in_service) {
            continue;
        }
        const auto f = static_cast<Eigen::Index>(index.bus(br.from_bus));
        const auto t = static_cast<Eigen::Index>(index.bus(br.to_bus));
        out.entries.row(k) = (angles.row(f) - angles.row(t)) / br.reactance;
    }
    out.entries.col(static_cast<Eigen::Index>(system.slack_position())).setZero();
    for (const auto& bus : net.buses) {
        out.bus_ids.push_back(bus.id);
    }
    return out;
}

std::string_view to_string(OutageValidity v) noexcept
{
    switch (v) {
    case OutageValidity::Valid: return "valid";
    case OutageValidity::Radial: return "radial";
    case OutageValidity::OutOfService: return "out-of-service";
    case OutageValidity::Degenerate: return "degenerate";
    }
    return "unknown";
}

double LodfMatrix::factor(std::size_t row, std::size_t column) const
{
    if (!valid_outage(column)) {
        throw Error(ErrorKind::Islanding, "outage of branch " + std::to_string(branch_ids.at(column).value) +
                                              " has no distribution factors (" +
                                              std::string(to_string(validity[column])) + ")");
    }
    return entries(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(column));
}

std::optional<std::size_t> LodfMatrix::position(BranchId id) const
{
    auto it = std::find(branch_ids.begin(), branch_ids.end(), id);
    if (it == branch_ids.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - branch_ids.begin());
}

std::size_t LodfMatrix::stored_nonzeros() const
{
    std::size_t count = 0;
    for (Eigen::Index j = 0; j < entries.cols(); ++j) {
        if (!valid_outage(static_cast<std::size_t>(j))) {
            continue;
        }
        for (Eigen::Index i = 0; i < entries.rows(); ++i) {
            if (i != j && entries(i, j) != 0.0) {
                ++count;
            }
        }
    }
    return count;
}

LodfMatrix compute_lodf(const PtdfMatrix& ptdf, const Network& net, double sparsity_threshold)
{
    if (!(sparsity_threshold >= 0.0)) {
        throw Error(ErrorKind::Config, "sparsity threshold must be non-negative");
    }
    const NetworkIndex index(net);
    const auto m = static_cast<Eigen::Index>(net.branches.size());
    if (ptdf.entries.rows() != m || ptdf.entries.cols() != static_cast<Eigen::Index>(net.buses.size())) {
        throw Error(ErrorKind::Config, "PTDF matrix does not match the network dimensions");
    }
    const auto topo = classify_topology(net);

    LodfMatrix out;
    out.sparsity_threshold = sparsity_threshold;
    out.branch_ids = ptdf.branch_ids;
    out.entries.resize(m, m);
    out.validity.assign(static_cast<std::size_t>(m), OutageValidity::Valid);
    out.diagnostics.assign(static_cast<std::size_t>(m), std::string{});

    for (Eigen::Index j = 0; j < m; ++j) {
        const auto& outaged = net.branches[static_cast<std::size_t>(j)];
        auto& validity = out.validity[static_cast<std::size_t>(j)];
        if (!outaged.in_service) {
            validity = OutageValidity::OutOfService;
        } else if (topo.is_radial(outaged.id)) {
            validity = OutageValidity::Radial;
        }
        if (validity != OutageValidity::Valid) {
            out.entries.col(j).setConstant(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        const auto f = static_cast<Eigen::Index>(index.bus(outaged.from_bus));
        const auto t = static_cast<Eigen::Index>(index.bus(outaged.to_bus));
        const Eigen::VectorXd phi = ptdf.entries.col(f) - ptdf.entries.col(t);
        const double denominator = 1.0 - phi[j];
        if (std::abs(denominator) < kDegenerateDenominator) {
            validity = OutageValidity::Degenerate;
            std::ostringstream os;
            os << "branch " << outaged.id << ": 1 - PTDF_jj = " << denominator
               << " although the branch is not a bridge";
            out.diagnostics[static_cast<std::size_t>(j)] = os.str();
            out.entries.col(j).setConstant(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        for (Eigen::Index i = 0; i < m; ++i) {
            double v = phi[i] / denominator;
            if (std::abs(v) < sparsity_threshold) {
                v = 0.0;
            }
            out.entries(i, j) = v;
        }
        out.entries(j, j) = -1.0;
    }
    return out;
}

FlowState post_outage_flows(const FlowState& flow, const LodfMatrix& lodf, BranchId outage)
{
    const auto col = lodf.position(outage);
    if (!col) {
        throw Error(ErrorKind::Config, "unknown outage branch " + std::to_string(outage.value));
    }
    if (!lodf.valid_outage(*col)) {
        throw Error(ErrorKind::Islanding, "outage of branch " + std::to_string(outage.value) +
                                              " islands the network or is not in service (" +
                                              std::string(to_string(lodf.validity[*col])) + ")");
    }
    FlowState out;
    out.injections_mw = flow.injections_mw;
    out.flows_mw.resize(flow.flows_mw.size());
    const double pre = flow.flows_mw[*col];
    const auto c = static_cast<Eigen::Index>(*col);
    for (std::size_t i = 0; i < flow.flows_mw.size(); ++i) {
        out.flows_mw[i] = flow.flows_mw[i] + lodf.entries(static_cast<Eigen::Index>(i), c) * pre;
    }
    out.flows_mw[*col] = 0.0;
    return out;
}

MonitorSets MonitorSets::without(BranchId id) const
{
    MonitorSets out = *this;
    for (auto* list : {&out.monitored, &out.outages}) {
        if (*list) {
            std::erase((*list).value(), id);
        }
    }
    return out;
}

ResolvedMonitors resolve_monitors(const MonitorSets& sets, const Network& net)
{
    const NetworkIndex index(net);
    auto resolve = [&](const std::optional<std::vector<BranchId>>& list, const char* what) {
        std::vector<std::size_t> out;
        if (!list) {
            for (std::size_t k = 0; k < net.branches.size(); ++k) {
                if (net.branches[k].in_service) {
                    out.push_back(k);
                }
            }
            return out;
        }
        for (BranchId id : *list) {
            auto pos = index.find_branch(id);
            if (!pos) {
                throw Error(ErrorKind::Config, std::string(what) + " set references unknown branch " +
                                                   std::to_string(id.value));
            }
            if (!net.branches[*pos].in_service) {
                throw Error(ErrorKind::Config, std::string(what) + " set references out-of-service branch " +
                                                   std::to_string(id.value));
            }
            out.push_back(*pos);
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    };
    return {resolve(sets.monitored, "monitored"), resolve(sets.outages, "outage")};
}

namespace {

void write_cell(std::ostream& out, double v)
{
    if (std::isnan(v)) {
        out << "NA";
    } else {
        out << v;
    }
}

}  // namespace

void write_ptdf_csv(std::ostream& out, const PtdfMatrix& ptdf)
{
    const auto old_precision = out.precision(17);
    out << "branch";
    for (BusId b : ptdf.bus_ids) {
        out << ",bus_" << b;
    }
    out << "\n";
    for (Eigen::Index k = 0; k < ptdf.entries.rows(); ++k) {
        out << ptdf.branch_ids[static_cast<std::size_t>(k)];
        for (Eigen::Index b = 0; b < ptdf.entries.cols(); ++b) {
            out << ",";
            write_cell(out, ptdf.entries(k, b));
        }
        out << "\n";
    }
    out.precision(old_precision);
}

void write_lodf_csv(std::ostream& out, const LodfMatrix& lodf)
{
    const auto old_precision = out.precision(17);
    out << "monitored";
    for (BranchId j : lodf.branch_ids) {
        out << ",outage_" << j;
    }
    out << "\n";
    for (Eigen::Index i = 0; i < lodf.entries.rows(); ++i) {
        out << lodf.branch_ids[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < lodf.entries.cols(); ++j) {
            out << ",";
            write_cell(out, lodf.entries(i, j));
        }
        out << "\n";
    }
    out.precision(old_precision);
}

}  // namespace gridstress
