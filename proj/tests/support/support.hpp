#pragma once

#include <gridstress/network.hpp>
#include <gridstress/stress_metrics.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gstest {

using gridstress::BranchId;
using gridstress::BusId;
using gridstress::Network;

std::filesystem::path data_path(const std::string& name);
Network load_data_case(const std::string& name);

/// Buses 1, 2, 3; L12 (id 1), L13 (id 2), L23 (id 3), x = 0.1 pu, 100 MW ratings;
/// 90 MW generated at bus 1 and consumed at bus 3.
Network triangle(int slack = 1);

/// Two buses joined by a single 100 MW line carrying 40 MW.
Network two_bus();

/// Four buses where branch 4 (2-4) is overloaded after outages and opening
/// branch 2 (1-2) is the only single switch that relieves it.
Network four_bus_switching();

/// Connected random network: spanning tree plus `extra_branches` chords
/// (occasionally parallel), balanced dispatch, ratings drawn around the base
/// flows so that a share of branches overload after outages.
Network random_network(std::uint64_t seed, int buses, int extra_branches, double stress = 1.0);

/// Independent dense DC solve by Gaussian elimination with partial pivoting.
/// nullopt when the in-service graph is disconnected. Out-of-service branches carry 0.
std::optional<std::vector<double>> dense_flows(const Network& net);

/// Branch ids whose removal increases the number of connected components.
std::vector<BranchId> bridges_by_removal(const Network& net);
int component_count(const Network& net);

/// Post-contingency loading table by re-solving the network once per outage.
struct OracleTable {
    std::vector<BranchId> monitored;
    std::vector<BranchId> outages;
    std::vector<bool> valid;
    std::vector<std::vector<double>> loading;  ///< [monitored][outage], fraction of rating
};
OracleTable resolve_table(const Network& net);

struct OracleMetrics {
    std::vector<double> v_rank_pct;
    std::vector<int> v_degree;
    int v_system = 0;
    std::vector<std::optional<double>> c_rank_pct;
    std::vector<std::optional<int>> c_degree;
    int c_system = 0;
    int emergency = 0;
    int contingency = 0;
};
OracleMetrics oracle_metrics(const OracleTable& table, const Network& net, const gridstress::LimitSet& limits);

/// Peak post-contingency loading (fraction) and emergency count after opening one branch,
/// both from re-solve tables. nullopt if opening islands the network.
struct SwitchOutcome {
    BranchId branch;
    double peak = 0.0;
    int emergency = 0;
};
std::optional<SwitchOutcome> oracle_open(const Network& net, BranchId branch, const gridstress::LimitSet& limits);

/// Lowest peak loading over every single opening, except `exclude`, that does not raise the emergency count.
std::optional<SwitchOutcome> oracle_best_switch(const Network& net, const gridstress::LimitSet& limits,
                                                std::optional<BranchId> exclude = std::nullopt);

}  // namespace gstest
