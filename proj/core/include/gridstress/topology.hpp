#pragma once

#include "gridstress/network.hpp"

#include <vector>

namespace gridstress {

/// Connected components and bridges of the in-service branch graph.
struct TopologyClassification {
    /// Each island's bus ids ascending; islands ordered by their smallest bus id.
    std::vector<std::vector<BusId>> islands;
    /// Bridges of the in-service graph, ascending. Parallel circuits are never bridges.
    std::vector<BranchId> radial_branches;

    [[nodiscard]] bool is_radial(BranchId id) const;
    [[nodiscard]] std::size_t island_count() const noexcept { return islands.size(); }
};

TopologyClassification classify_topology(const Network& net);

}  // namespace gridstress
