#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

namespace gridstress {

/// Integer identifier tagged by what it names, so bus and branch ids cannot be mixed up.
template <class Tag>
struct Id {
    int value = 0;

    constexpr Id() = default;
    constexpr explicit Id(int v) : value(v) {}

    friend constexpr auto operator<=>(Id, Id) = default;
    friend std::ostream& operator<<(std::ostream& os, Id id) { return os << id.value; }
};

using BusId = Id<struct BusTag>;
using BranchId = Id<struct BranchTag>;

struct Bus {
    BusId id;
    double load_mw = 0.0;
    std::string name;

    friend bool operator==(const Bus&, const Bus&) = default;
};

struct Branch {
    BranchId id;
    BusId from_bus;
    BusId to_bus;
    double reactance = 0.0;  ///< series reactance, per unit on the system base
    double rating_mw = 0.0;  ///< normal thermal rating
    bool in_service = true;
    bool is_transformer = false;

    friend bool operator==(const Branch&, const Branch&) = default;
};

struct Generator {
    BusId bus;
    double output_mw = 0.0;
    double max_output_mw = 0.0;

    friend bool operator==(const Generator&, const Generator&) = default;
};

/// DC model of a transmission grid. Positions in `buses` and `branches` are the
/// row/column order used by every matrix and per-element vector downstream.
struct Network {
    double base_mva = 100.0;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Generator> generators;
    BusId slack_bus;

    friend bool operator==(const Network&, const Network&) = default;

    [[nodiscard]] double total_load_mw() const;
    [[nodiscard]] double total_generation_mw() const;
};

/// Throws Error(Validation) describing the first invariant that does not hold.
void validate(const Network& net);

/// Id -> position lookup for a network. Holds no reference to the network.
class NetworkIndex {
public:
    explicit NetworkIndex(const Network& net);

    [[nodiscard]] std::optional<std::size_t> find_bus(BusId id) const;
    [[nodiscard]] std::optional<std::size_t> find_branch(BranchId id) const;
    /// Throws Error(Config) if the id is unknown.
    [[nodiscard]] std::size_t bus(BusId id) const;
    [[nodiscard]] std::size_t branch(BranchId id) const;

private:
    std::unordered_map<int, std::size_t> bus_pos_;
    std::unordered_map<int, std::size_t> branch_pos_;
};

/// Scale bus loads (per-bus override, else the uniform factor) and rebalance
/// generation in proportion to each unit's current output so that total
/// generation equals total load.
Network scale_load(const Network& net, double uniform, const std::map<BusId, double>& overrides = {});

/// Copy of `net` with one branch's status changed.
Network with_branch_status(const Network& net, BranchId branch, bool in_service);

/// Resolves "FROM-TO" (bus ids or bus names) or a bare branch id to a branch.
/// Throws Error(Config) for unknown or ambiguous references.
BranchId resolve_branch(const Network& net, const std::string& reference);

}  // namespace gridstress

template <class Tag>
struct std::hash<gridstress::Id<Tag>> {
    std::size_t operator()(gridstress::Id<Tag> id) const noexcept { return std::hash<int>{}(id.value); }
};
