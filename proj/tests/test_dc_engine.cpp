#include "support.hpp"

#include <gridstress/dc_engine.hpp>
#include <gridstress/error.hpp>
#include <gridstress/topology.hpp>

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace gridstress;

namespace {

std::vector<Network> property_networks()
{
    std::vector<Network> nets = {gstest::triangle(), gstest::four_bus_switching(),
                                 gstest::load_data_case("case118_rated.m"), gstest::load_data_case("case30.m"),
                                 gstest::load_data_case("case24_ieee_rts.m")};
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        nets.push_back(gstest::random_network(seed, 12 + static_cast<int>(seed % 10), 6));
    }
    return nets;
}

}  // namespace

TEST_CASE("triangle flows by hand")
{
    const auto flow = solve_dc(gstest::triangle());
    CHECK(flow.flows_mw[0] == doctest::Approx(30.0).epsilon(1e-12));
    CHECK(flow.flows_mw[1] == doctest::Approx(60.0).epsilon(1e-12));
    CHECK(flow.flows_mw[2] == doctest::Approx(30.0).epsilon(1e-12));
}

TEST_CASE("zero injections give zero flows")
{
    auto net = gstest::triangle();
    net.buses[2].load_mw = 0.0;
    net.generators[0].output_mw = 0.0;
    for (double f : solve_dc(net).flows_mw) {
        CHECK(f == 0.0);
    }
}

TEST_CASE("slack absorbs the generation mismatch")
{
    auto net = gstest::triangle();
    net.generators[0].output_mw = 120.0;  // slack at bus 1 takes back 30 MW
    const auto flow = solve_dc(net);
    CHECK(flow.flows_mw[1] == doctest::Approx(60.0));
    double sum = 0.0;
    for (double p : flow.injections_mw) {
        sum += p;
    }
    CHECK(std::abs(sum) < 1e-9);
}

TEST_CASE("118-bus power balance residual")
{
    const auto net = gstest::load_data_case("case118_rated.m");
    const SusceptanceSystem system(net);
    const auto flow = solve_dc(net, system);
    Eigen::VectorXd p(static_cast<Eigen::Index>(net.buses.size()));
    for (std::size_t i = 0; i < net.buses.size(); ++i) {
        p[static_cast<Eigen::Index>(i)] = flow.injections_mw[i] / net.base_mva;
    }
    Eigen::VectorXd theta(static_cast<Eigen::Index>(flow.angles_rad.size()));
    for (std::size_t i = 0; i < flow.angles_rad.size(); ++i) {
        theta[static_cast<Eigen::Index>(i)] = flow.angles_rad[i];
    }
    CHECK(system.residual(theta, p) < 1e-9);
}

TEST_CASE("solve_dc matches the dense elimination oracle")
{
    for (const auto& net : property_networks()) {
        const auto flow = solve_dc(net);
        const auto oracle = *gstest::dense_flows(net);
        for (std::size_t k = 0; k < oracle.size(); ++k) {
            CHECK(std::abs(flow.flows_mw[k] - oracle[k]) / net.base_mva < 1e-9);
        }
    }
}

TEST_CASE("disconnected network is singular")
{
    auto net = gstest::triangle();
    net.branches[1].in_service = false;
    net.branches[2].in_service = false;
    try {
        (void)solve_dc(net);
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Singular);
    }
}

TEST_CASE("triangle PTDF with slack at bus 2")
{
    const auto ptdf = compute_ptdf(gstest::triangle(2));
    // Injection at bus 1, withdrawal at bus 2: direct path L12 takes 2/3, L13-L23 takes 1/3.
    CHECK(ptdf.entries(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(ptdf.entries(1, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(ptdf.entries(2, 0) == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
    for (Eigen::Index k = 0; k < 3; ++k) {
        CHECK(ptdf.entries(k, 1) == 0.0);
    }
}

TEST_CASE("PTDF times injections reproduces solve_dc")
{
    for (const auto& net : property_networks()) {
        const auto ptdf = compute_ptdf(net);
        const auto flow = solve_dc(net);
        Eigen::VectorXd p(static_cast<Eigen::Index>(net.buses.size()));
        for (std::size_t i = 0; i < net.buses.size(); ++i) {
            p[static_cast<Eigen::Index>(i)] = flow.injections_mw[i];
        }
        const Eigen::VectorXd f = ptdf.entries * p;
        for (std::size_t k = 0; k < net.branches.size(); ++k) {
            CHECK(std::abs(f[static_cast<Eigen::Index>(k)] - flow.flows_mw[k]) / net.base_mva < 1e-9);
        }
    }
}

TEST_CASE("triangle LODF for the L12 outage")
{
    const auto net = gstest::triangle();
    const auto lodf = compute_lodf(compute_ptdf(net), net);
    CHECK(lodf.entries(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lodf.entries(2, 0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(lodf.entries(0, 0) == -1.0);
    CHECK(lodf.valid_outage(0));

    const auto post = post_outage_flows(solve_dc(net), lodf, BranchId{1});
    CHECK(post.flows_mw[0] == 0.0);
    CHECK(post.flows_mw[1] == doctest::Approx(90.0).epsilon(1e-12));
    CHECK(std::abs(post.flows_mw[2]) < 1e-9);
}

TEST_CASE("post-outage substitution")
{
    LodfMatrix lodf;
    lodf.entries = Eigen::MatrixXd::Zero(2, 2);
    lodf.entries(0, 1) = 0.5;
    lodf.entries(0, 0) = lodf.entries(1, 1) = -1.0;
    lodf.validity = {OutageValidity::Valid, OutageValidity::Valid};
    lodf.diagnostics = {"", ""};
    lodf.branch_ids = {BranchId{1}, BranchId{2}};
    FlowState flow;
    flow.flows_mw = {100.0, 80.0};
    const auto post = post_outage_flows(flow, lodf, BranchId{2});
    CHECK(post.flows_mw[0] == doctest::Approx(140.0));
    CHECK(post.flows_mw[1] == 0.0);

    lodf.entries(0, 1) = 0.0;
    CHECK(post_outage_flows(flow, lodf, BranchId{2}).flows_mw[0] == 100.0);
}

TEST_CASE("radial outage column is invalid")
{
    const auto net = gstest::two_bus();
    const auto lodf = compute_lodf(compute_ptdf(net), net);
    CHECK(lodf.validity[0] == OutageValidity::Radial);
    CHECK(std::isnan(lodf.entries(0, 0)));
    CHECK_THROWS_AS((void)post_outage_flows(solve_dc(net), lodf, BranchId{1}), Error);
    try {
        (void)lodf.factor(0, 0);
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Islanding);
    }
}

TEST_CASE("out-of-service branches are invalid outages")
{
    auto net = gstest::four_bus_switching();
    net.branches[4].in_service = false;
    const auto lodf = compute_lodf(compute_ptdf(net), net);
    CHECK(lodf.validity[4] == OutageValidity::OutOfService);
}

TEST_CASE("post-outage flows equal a full re-solve with the branch removed")
{
    for (const auto& net : property_networks()) {
        const SusceptanceSystem system(net);
        const auto base = solve_dc(net, system);
        const auto lodf = compute_lodf(compute_ptdf(net, system), net);
        const auto bridges = gstest::bridges_by_removal(net);
        for (std::size_t j = 0; j < net.branches.size(); ++j) {
            const bool radial = std::binary_search(bridges.begin(), bridges.end(), net.branches[j].id);
            CHECK(lodf.valid_outage(j) == !radial);
            if (!lodf.valid_outage(j)) {
                continue;
            }
            const auto post = post_outage_flows(base, lodf, net.branches[j].id);
            auto cut = net;
            cut.branches[j].in_service = false;
            const auto oracle = *gstest::dense_flows(cut);
            double worst = 0.0;
            for (std::size_t i = 0; i < oracle.size(); ++i) {
                worst = std::max(worst, std::abs(post.flows_mw[i] - oracle[i]) / net.base_mva);
            }
            CHECK(worst < 1e-6);
        }
    }
}

TEST_CASE("valid LODF entries lie in [-1, 1]")
{
    for (const auto& net : property_networks()) {
        const auto lodf = compute_lodf(compute_ptdf(net), net);
        for (Eigen::Index j = 0; j < lodf.entries.cols(); ++j) {
            if (!lodf.valid_outage(static_cast<std::size_t>(j))) {
                continue;
            }
            CHECK(lodf.entries.col(j).cwiseAbs().maxCoeff() <= 1.0 + 1e-9);
        }
    }
}

TEST_CASE("LODF is not assumed symmetric")
{
    const auto net = gstest::load_data_case("case118_rated.m");
    const auto lodf = compute_lodf(compute_ptdf(net), net);
    bool asymmetric = false;
    for (Eigen::Index i = 0; i < lodf.entries.rows() && !asymmetric; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            if (lodf.valid_outage(static_cast<std::size_t>(i)) && lodf.valid_outage(static_cast<std::size_t>(j)) &&
                std::abs(lodf.entries(i, j) - lodf.entries(j, i)) > 1e-6) {
                asymmetric = true;
                break;
            }
        }
    }
    CHECK(asymmetric);
}

TEST_CASE("sparsification error bound")
{
    const auto net = gstest::load_data_case("case118_rated.m");
    const auto ptdf = compute_ptdf(net);
    const auto exact = compute_lodf(ptdf, net, 0.0);
    const auto base = solve_dc(net);
    double max_flow = 0.0;
    for (double f : base.flows_mw) {
        max_flow = std::max(max_flow, std::abs(f));
    }
    for (double t : {0.001, 0.01, 0.05}) {
        const auto sparse = compute_lodf(ptdf, net, t);
        CHECK(sparse.stored_nonzeros() < exact.stored_nonzeros());
        for (std::size_t j = 0; j < net.branches.size(); ++j) {
            if (!exact.valid_outage(j)) {
                continue;
            }
            const auto a = post_outage_flows(base, exact, net.branches[j].id);
            const auto b = post_outage_flows(base, sparse, net.branches[j].id);
            for (std::size_t i = 0; i < a.flows_mw.size(); ++i) {
                CHECK(std::abs(a.flows_mw[i] - b.flows_mw[i]) <= t * max_flow + 1e-9);
            }
        }
        for (Eigen::Index j = 0; j < sparse.entries.cols(); ++j) {
            if (!sparse.valid_outage(static_cast<std::size_t>(j))) {
                continue;
            }
            for (Eigen::Index i = 0; i < sparse.entries.rows(); ++i) {
                const double v = sparse.entries(i, j);
                CHECK((v == 0.0 || std::abs(v) >= t));
            }
        }
    }
}

TEST_CASE("monitor sets")
{
    const auto net = gstest::triangle();
    const auto all = resolve_monitors(MonitorSets{}, net);
    CHECK(all.monitored == std::vector<std::size_t>{0, 1, 2});
    CHECK(all.outages == std::vector<std::size_t>{0, 1, 2});

    MonitorSets sets;
    sets.monitored = std::vector<BranchId>{BranchId{3}, BranchId{1}};
    CHECK(resolve_monitors(sets, net).monitored == std::vector<std::size_t>{0, 2});
    CHECK(sets.without(BranchId{1}).monitored == std::vector<BranchId>{BranchId{3}});

    sets.monitored = std::vector<BranchId>{BranchId{9}};
    CHECK_THROWS_AS((void)resolve_monitors(sets, net), Error);

    auto open = net;
    open.branches[0].in_service = false;
    sets.monitored = std::vector<BranchId>{BranchId{1}};
    CHECK_THROWS_AS((void)resolve_monitors(sets, open), Error);
    CHECK(resolve_monitors(MonitorSets{}, open).outages == std::vector<std::size_t>{1, 2});
}

TEST_CASE("matrix CSV dumps")
{
    const auto net = gstest::two_bus();
    const auto ptdf = compute_ptdf(net);
    std::ostringstream p;
    write_ptdf_csv(p, ptdf);
    CHECK(p.str().find("branch,bus_1,bus_2\n") == 0);
    std::ostringstream l;
    write_lodf_csv(l, compute_lodf(ptdf, net));
    CHECK(l.str().find("NA") != std::string::npos);
}
