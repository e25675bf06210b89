#include "gridstress/topology.hpp"

#include <algorithm>

namespace gridstress {

bool TopologyClassification::is_radial(BranchId id) const
{
    return std::binary_search(radial_branches.begin(), radial_branches.end(), id);
}

namespace {

struct Edge {
    std::size_t to;
    std::size_t branch;  // position in net.branches
};

}  // namespace

TopologyClassification classify_topology(const Network& net)
{
    TopologyClassification out;
    const std::size_t n = net.buses.size();
    if (n == 0) {
        return out;
    }
    const NetworkIndex index(net);

    std::vector<std::vector<Edge>> adj(n);
    for (std::size_t k = 0; k < net.branches.size(); ++k) {
        const auto& br = net.branches[k];
        if (!br.in_service) {
            continue;
        }
        const auto a = index.bus(br.from_bus);
        const auto b = index.bus(br.to_bus);
        adj[a].push_back({b, k});
        adj[b].push_back({a, k});
    }

    // Iterative Tarjan low-link. Skipping the tree edge by branch position
    // (not by parent vertex) keeps parallel circuits out of the bridge set.
    constexpr std::size_t unvisited = static_cast<std::size_t>(-1);
    std::vector<std::size_t> disc(n, unvisited);
    std::vector<std::size_t> low(n, 0);
    std::vector<std::size_t> component(n, unvisited);
    std::size_t timer = 0;

    struct Frame {
        std::size_t vertex;
        std::size_t via_branch;
        std::size_t next_edge;
    };

    for (std::size_t root = 0; root < n; ++root) {
        if (disc[root] != unvisited) {
            continue;
        }
        const std::size_t comp = out.islands.size();
        out.islands.emplace_back();
        std::vector<Frame> stack{{root, unvisited, 0}};
        disc[root] = low[root] = timer++;
        component[root] = comp;

        while (!stack.empty()) {
            Frame& top = stack.back();
            if (top.next_edge < adj[top.vertex].size()) {
                const Edge e = adj[top.vertex][top.next_edge++];
                if (e.branch == top.via_branch) {
                    continue;
                }
                if (disc[e.to] == unvisited) {
                    disc[e.to] = low[e.to] = timer++;
                    component[e.to] = comp;
                    stack.push_back({e.to, e.branch, 0});
                } else {
                    low[top.vertex] = std::min(low[top.vertex], disc[e.to]);
                }
                continue;
            }
            const Frame done = top;
            stack.pop_back();
            if (!stack.empty()) {
                const std::size_t parent = stack.back().vertex;
                low[parent] = std::min(low[parent], low[done.vertex]);
                if (low[done.vertex] > disc[parent]) {
                    out.radial_branches.push_back(net.branches[done.via_branch].id);
                }
            }
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        out.islands[component[i]].push_back(net.buses[i].id);
    }
    for (auto& island : out.islands) {
        std::sort(island.begin(), island.end());
    }
    std::sort(out.islands.begin(), out.islands.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    std::sort(out.radial_branches.begin(), out.radial_branches.end());
    return out;
}

}  // namespace gridstress
