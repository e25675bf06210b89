#include "support.hpp"

#include <gridstress/case_io.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#ifndef GRIDSTRESS_TEST_DATA_DIR
#error "GRIDSTRESS_TEST_DATA_DIR must be defined"
#endif

namespace gstest {

using gridstress::Branch;
using gridstress::Bus;
using gridstress::Generator;

std::filesystem::path data_path(const std::string& name)
{
    return std::filesystem::path(GRIDSTRESS_TEST_DATA_DIR) / name;
}

Network load_data_case(const std::string& name)
{
    return gridstress::load_case_file(data_path(name));
}

namespace {

Branch line(int id, int from, int to, double x, double rating)
{
    Branch b;
    b.id = BranchId{id};
    b.from_bus = BusId{from};
    b.to_bus = BusId{to};
    b.reactance = x;
    b.rating_mw = rating;
    return b;
}

Bus bus(int id, double load)
{
    Bus b;
    b.id = BusId{id};
    b.load_mw = load;
    return b;
}

}  // namespace

Network triangle(int slack)
{
    Network net;
    net.buses = {bus(1, 0.0), bus(2, 0.0), bus(3, 90.0)};
    net.branches = {line(1, 1, 2, 0.1, 100.0), line(2, 1, 3, 0.1, 100.0), line(3, 2, 3, 0.1, 100.0)};
    net.generators = {Generator{BusId{1}, 90.0, 200.0}};
    net.slack_bus = BusId{slack};
    return net;
}

Network two_bus()
{
    Network net;
    net.buses = {bus(1, 0.0), bus(2, 40.0)};
    net.branches = {line(1, 1, 2, 0.1, 100.0)};
    net.generators = {Generator{BusId{1}, 40.0, 100.0}};
    net.slack_bus = BusId{1};
    return net;
}

Network four_bus_switching()
{
    Network net;
    net.buses = {bus(1, 0.0), bus(2, 0.0), bus(3, 0.0), bus(4, 150.0)};
    net.branches = {
        line(1, 3, 4, 0.3, 50.0),  line(2, 1, 2, 0.3, 150.0), line(3, 1, 4, 0.2, 200.0),
        line(4, 2, 4, 0.3, 50.0),  line(5, 2, 3, 0.2, 100.0),
    };
    net.generators = {Generator{BusId{1}, 150.0, 300.0}};
    net.slack_bus = BusId{1};
    return net;
}

Network random_network(std::uint64_t seed, int buses, int extra_branches, double stress)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> reactance(0.05, 0.4);
    std::uniform_real_distribution<double> load(10.0, 100.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Network net;
    for (int i = 1; i <= buses; ++i) {
        net.buses.push_back(bus(i, 0.0));
    }
    int id = 1;
    for (int i = 2; i <= buses; ++i) {
        const int parent = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(i - 1));
        net.branches.push_back(line(id++, parent, i, reactance(rng), 0.0));
    }
    for (int k = 0; k < extra_branches; ++k) {
        int a = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(buses));
        int b = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(buses));
        if (a == b) {
            b = a % buses + 1;
        }
        net.branches.push_back(line(id++, a, b, reactance(rng), 0.0));
    }

    double total = 0.0;
    std::vector<int> gen_buses;
    for (auto& b : net.buses) {
        if (b.id.value == 1 || unit(rng) < 0.3) {
            gen_buses.push_back(b.id.value);
        } else {
            b.load_mw = load(rng);
            total += b.load_mw;
        }
    }
    std::vector<double> shares;
    for (std::size_t g = 0; g < gen_buses.size(); ++g) {
        shares.push_back(0.5 + unit(rng));
    }
    const double share_sum = std::accumulate(shares.begin(), shares.end(), 0.0);
    for (std::size_t g = 0; g < gen_buses.size(); ++g) {
        const double out = total * shares[g] / share_sum;
        net.generators.push_back(Generator{BusId{gen_buses[g]}, out, 2.0 * out + 50.0});
    }
    net.slack_bus = BusId{1};

    const auto flows = *dense_flows(net);
    for (std::size_t k = 0; k < net.branches.size(); ++k) {
        const double base = std::max(std::abs(flows[k]), 5.0);
        net.branches[k].rating_mw = std::round(base * (0.9 + 0.8 * unit(rng)) / stress);
    }
    return net;
}

namespace {

std::size_t bus_position(const Network& net, BusId id)
{
    for (std::size_t i = 0; i < net.buses.size(); ++i) {
        if (net.buses[i].id == id) {
            return i;
        }
    }
    throw std::runtime_error("unknown bus in test network");
}

// Union-find component count over in-service branches, optionally skipping one position.
int components(const Network& net, std::optional<std::size_t> skip)
{
    std::vector<std::size_t> parent(net.buses.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) {
            x = parent[x] = parent[parent[x]];
        }
        return x;
    };
    int count = static_cast<int>(net.buses.size());
    for (std::size_t k = 0; k < net.branches.size(); ++k) {
        const auto& br = net.branches[k];
        if (!br.in_service || (skip && *skip == k)) {
            continue;
        }
        const auto a = find(bus_position(net, br.from_bus));
        const auto b = find(bus_position(net, br.to_bus));
        if (a != b) {
            parent[a] = b;
            --count;
        }
    }
    return count;
}

}  // namespace

int component_count(const Network& net)
{
    return components(net, std::nullopt);
}

std::vector<BranchId> bridges_by_removal(const Network& net)
{
    const int base = components(net, std::nullopt);
    std::vector<BranchId> out;
    for (std::size_t k = 0; k < net.branches.size(); ++k) {
        if (net.branches[k].in_service && components(net, k) > base) {
            out.push_back(net.branches[k].id);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<std::vector<double>> dense_flows(const Network& net)
{
    if (components(net, std::nullopt) != 1) {
        return std::nullopt;
    }
    const std::size_t n = net.buses.size();
    const std::size_t slack = bus_position(net, net.slack_bus);
    std::vector<double> p(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        p[i] -= net.buses[i].load_mw / net.base_mva;
    }
    for (const auto& g : net.generators) {
        p[bus_position(net, g.bus)] += g.output_mw / net.base_mva;
    }

    // Reduced system without the slack row/column, dense with augmented right-hand side.
    std::vector<std::size_t> red(n, n);
    std::size_t m = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i != slack) {
            red[i] = m++;
        }
    }
    std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
    for (const auto& br : net.branches) {
        if (!br.in_service) {
            continue;
        }
        const double b = 1.0 / br.reactance;
        const auto f = bus_position(net, br.from_bus);
        const auto t = bus_position(net, br.to_bus);
        if (f != slack) {
            a[red[f]][red[f]] += b;
        }
        if (t != slack) {
            a[red[t]][red[t]] += b;
        }
        if (f != slack && t != slack) {
            a[red[f]][red[t]] -= b;
            a[red[t]][red[f]] -= b;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (i != slack) {
            a[red[i]][m] = p[i];
        }
    }
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < m; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) {
                pivot = r;
            }
        }
        if (std::abs(a[pivot][col]) < 1e-14) {
            return std::nullopt;
        }
        std::swap(a[col], a[pivot]);
        for (std::size_t r = col + 1; r < m; ++r) {
            const double factor = a[r][col] / a[col][col];
            for (std::size_t c = col; c <= m; ++c) {
                a[r][c] -= factor * a[col][c];
            }
        }
    }
    std::vector<double> theta_red(m, 0.0);
    for (std::size_t r = m; r-- > 0;) {
        double s = a[r][m];
        for (std::size_t c = r + 1; c < m; ++c) {
            s -= a[r][c] * theta_red[c];
        }
        theta_red[r] = s / a[r][r];
    }
    std::vector<double> theta(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (i != slack) {
            theta[i] = theta_red[red[i]];
        }
    }
    std::vector<double> flows(net.branches.size(), 0.0);
    for (std::size_t k = 0; k < net.branches.size(); ++k) {
        const auto& br = net.branches[k];
        if (br.in_service) {
            const double diff = theta[bus_position(net, br.from_bus)] - theta[bus_position(net, br.to_bus)];
            flows[k] = net.base_mva * diff / br.reactance;
        }
    }
    return flows;
}

OracleTable resolve_table(const Network& net)
{
    OracleTable t;
    std::vector<std::size_t> live;
    for (std::size_t k = 0; k < net.branches.size(); ++k) {
        if (net.branches[k].in_service) {
            live.push_back(k);
            t.monitored.push_back(net.branches[k].id);
            t.outages.push_back(net.branches[k].id);
        }
    }
    t.loading.assign(live.size(), std::vector<double>(live.size(), 0.0));
    for (std::size_t c = 0; c < live.size(); ++c) {
        Network cut = net;
        cut.branches[live[c]].in_service = false;
        const auto flows = dense_flows(cut);
        t.valid.push_back(flows.has_value());
        if (!flows) {
            continue;
        }
        for (std::size_t r = 0; r < live.size(); ++r) {
            const auto& br = net.branches[live[r]];
            t.loading[r][c] = std::abs((*flows)[live[r]]) / br.rating_mw;
        }
    }
    return t;
}

OracleMetrics oracle_metrics(const OracleTable& t, const Network& net, const gridstress::LimitSet& limits)
{
    const auto bridges = bridges_by_removal(net);
    auto radial = [&](BranchId id) { return std::find(bridges.begin(), bridges.end(), id) != bridges.end(); };
    const std::size_t rows = t.monitored.size();
    const std::size_t cols = t.outages.size();

    OracleMetrics m;
    m.v_rank_pct.assign(rows, 0.0);
    m.v_degree.assign(rows, 0);
    m.c_rank_pct.assign(cols, std::nullopt);
    m.c_degree.assign(cols, std::nullopt);
    for (std::size_t r = 0; r < rows; ++r) {
        const double thr = limits.degree_threshold(t.monitored[r]);
        bool emergency = false;
        bool contingency = false;
        for (std::size_t c = 0; c < cols; ++c) {
            if (!t.valid[c]) {
                continue;
            }
            const double v = t.loading[r][c];
            m.v_rank_pct[r] = std::max(m.v_rank_pct[r], 100.0 * v);
            m.v_degree[r] += v > thr ? 1 : 0;
            emergency = emergency || v > limits.emergency_fraction;
            contingency = contingency || v > limits.contingency_fraction;
        }
        m.emergency += emergency ? 1 : 0;
        m.contingency += contingency ? 1 : 0;
        if (!radial(t.monitored[r]) && m.v_rank_pct[r] > 100.0 * limits.system_threshold_fraction) {
            ++m.v_system;
        }
    }
    for (std::size_t c = 0; c < cols; ++c) {
        if (!t.valid[c]) {
            continue;
        }
        double peak = 0.0;
        int count = 0;
        for (std::size_t r = 0; r < rows; ++r) {
            peak = std::max(peak, t.loading[r][c]);
            count += t.loading[r][c] > limits.degree_threshold(t.monitored[r]) ? 1 : 0;
        }
        m.c_rank_pct[c] = 100.0 * peak;
        m.c_degree[c] = count;
        if (!radial(t.outages[c]) && 100.0 * peak > 100.0 * limits.system_threshold_fraction) {
            ++m.c_system;
        }
    }
    return m;
}

std::optional<SwitchOutcome> oracle_open(const Network& net, BranchId branch, const gridstress::LimitSet& limits)
{
    Network open = net;
    for (auto& br : open.branches) {
        if (br.id == branch) {
            br.in_service = false;
        }
    }
    if (component_count(open) != 1) {
        return std::nullopt;
    }
    const auto m = oracle_metrics(resolve_table(open), open, limits);
    SwitchOutcome out{branch, 0.0, m.emergency};
    for (double v : m.v_rank_pct) {
        out.peak = std::max(out.peak, v / 100.0);
    }
    return out;
}

std::optional<SwitchOutcome> oracle_best_switch(const Network& net, const gridstress::LimitSet& limits,
                                                std::optional<BranchId> exclude)
{
    const auto base = oracle_metrics(resolve_table(net), net, limits);
    std::optional<SwitchOutcome> best;
    for (const auto& br : net.branches) {
        if (!br.in_service || (exclude && *exclude == br.id)) {
            continue;
        }
        const auto o = oracle_open(net, br.id, limits);
        if (!o || o->emergency > base.emergency) {
            continue;
        }
        if (!best || o->peak < best->peak) {
            best = o;
        }
    }
    return best;
}

}  // namespace gstest
