#include "gridstress/network.hpp"

#include "gridstress/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace gridstress {

double Network::total_load_mw() const
{
    return std::accumulate(buses.begin(), buses.end(), 0.0,
                           [](double acc, const Bus& b) { return acc + b.load_mw; });
}

double Network::total_generation_mw() const
{
    return std::accumulate(generators.begin(), generators.end(), 0.0,
                           [](double acc, const Generator& g) { return acc + g.output_mw; });
}

namespace {

[[noreturn]] void invalid(const std::string& what)
{
    throw Error(ErrorKind::Validation, what);
}

std::string branch_label(const Branch& br)
{
    std::ostringstream os;
    os << "branch " << br.id << " (" << br.from_bus << "-" << br.to_bus << ")";
    return os.str();
}

}  // namespace

void validate(const Network& net)
{
    if (!(net.base_mva > 0.0) || !std::isfinite(net.base_mva)) {
        invalid("base power must be positive");
    }
    std::set<int> bus_ids;
    for (const auto& bus : net.buses) {
        if (!bus_ids.insert(bus.id.value).second) {
            invalid("duplicate bus id " + std::to_string(bus.id.value));
        }
        if (!std::isfinite(bus.load_mw)) {
            invalid("bus " + std::to_string(bus.id.value) + " has a non-finite load");
        }
    }
    std::set<int> branch_ids;
    for (const auto& br : net.branches) {
        if (!branch_ids.insert(br.id.value).second) {
            invalid("duplicate branch id " + std::to_string(br.id.value));
        }
        if (!bus_ids.contains(br.from_bus.value) || !bus_ids.contains(br.to_bus.value)) {
            invalid(branch_label(br) + " references an unknown bus");
        }
        if (br.from_bus == br.to_bus) {
            invalid(branch_label(br) + ": self-loop branch");
        }
        if (br.reactance == 0.0 || !std::isfinite(br.reactance)) {
            invalid(branch_label(br) + ": zero reactance");
        }
        if (!(br.rating_mw > 0.0) || !std::isfinite(br.rating_mw)) {
            invalid(branch_label(br) + ": rating must be positive");
        }
    }
    for (std::size_t k = 0; k < net.generators.size(); ++k) {
        const auto& gen = net.generators[k];
        if (!bus_ids.contains(gen.bus.value)) {
            invalid("generator #" + std::to_string(k + 1) + " references unknown bus " +
                    std::to_string(gen.bus.value));
        }
        if (gen.output_mw < 0.0 || gen.output_mw > gen.max_output_mw) {
            invalid("generator #" + std::to_string(k + 1) + " at bus " + std::to_string(gen.bus.value) +
                    " has output outside [0, max_output]");
        }
    }
    if (!bus_ids.contains(net.slack_bus.value)) {
        invalid("slack bus " + std::to_string(net.slack_bus.value) + " does not exist");
    }
}

NetworkIndex::NetworkIndex(const Network& net)
{
    bus_pos_.reserve(net.buses.size());
    for (std::size_t i = 0; i < net.buses.size(); ++i) {
        bus_pos_.emplace(net.buses[i].id.value, i);
    }
    branch_pos_.reserve(net.branches.size());
    for (std::size_t k = 0; k < net.branches.size(); ++k) {
        branch_pos_.emplace(net.branches[k].id.value, k);
    }
}

std::optional<std::size_t> NetworkIndex::find_bus(BusId id) const
{
    if (auto it = bus_pos_.find(id.value); it != bus_pos_.end()) {
        return it->second;
    }
    return std::nullopt;
}

std::optional<std::size_t> NetworkIndex::find_branch(BranchId id) const
{
    if (auto it = branch_pos_.find(id.value); it != branch_pos_.end()) {
        return it->second;
    }
    return std::nullopt;
}

std::size_t NetworkIndex::bus(BusId id) const
{
    if (auto pos = find_bus(id)) {
        return *pos;
    }
    throw Error(ErrorKind::Config, "unknown bus " + std::to_string(id.value));
}

std::size_t NetworkIndex::branch(BranchId id) const
{
    if (auto pos = find_branch(id)) {
        return *pos;
    }
    throw Error(ErrorKind::Config, "unknown branch " + std::to_string(id.value));
}

Network scale_load(const Network& net, double uniform, const std::map<BusId, double>& overrides)
{
    if (!(uniform > 0.0) || !std::isfinite(uniform)) {
        throw Error(ErrorKind::Config, "uniform load factor must be positive");
    }
    const NetworkIndex index(net);
    for (const auto& [bus, factor] : overrides) {
        if (!index.find_bus(bus)) {
            throw Error(ErrorKind::Config, "load override references unknown bus " + std::to_string(bus.value));
        }
        if (!(factor > 0.0) || !std::isfinite(factor)) {
            throw Error(ErrorKind::Config, "load override for bus " + std::to_string(bus.value) +
                                               " must be positive");
        }
    }

    Network out = net;
    for (auto& bus : out.buses) {
        auto it = overrides.find(bus.id);
        bus.load_mw *= (it != overrides.end()) ? it->second : uniform;
    }

    const double load = out.total_load_mw();
    const double generation = net.total_generation_mw();
    if (generation <= 0.0) {
        if (load == 0.0) {
            return out;
        }
        throw Error(ErrorKind::Infeasible, "no dispatched generation to rebalance against the scaled load");
    }
    const double ratio = load / generation;
    for (std::size_t k = 0; k < out.generators.size(); ++k) {
        auto& gen = out.generators[k];
        gen.output_mw *= ratio;
        if (gen.output_mw > gen.max_output_mw * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "rebalanced output of generator #" << (k + 1) << " at bus " << gen.bus << " (" << gen.output_mw
               << " MW) exceeds its maximum " << gen.max_output_mw << " MW";
            throw Error(ErrorKind::Infeasible, os.str());
        }
        gen.output_mw = std::min(gen.output_mw, gen.max_output_mw);
    }
    return out;
}

Network with_branch_status(const Network& net, BranchId branch, bool in_service)
{
    Network out = net;
    out.branches[NetworkIndex(net).branch(branch)].in_service = in_service;
    return out;
}

namespace {

std::string trim(std::string_view s)
{
    auto first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos) {
        return {};
    }
    auto last = s.find_last_not_of(" \t");
    return std::string(s.substr(first, last - first + 1));
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool all_digits(std::string_view s)
{
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
}

// Collapses runs of whitespace and lowercases, so "Olive     V1" == "olive v1".
std::string normalize_name(std::string_view s)
{
    std::string out;
    bool gap = false;
    for (char c : trim(s)) {
        if (c == ' ' || c == '\t') {
            gap = true;
            continue;
        }
        if (gap && !out.empty()) {
            out.push_back(' ');
        }
        gap = false;
        out.push_back(c);
    }
    return lower(out);
}

// Drops a trailing voltage tag such as " v1".
std::string without_voltage_tag(const std::string& normalized)
{
    auto pos = normalized.rfind(' ');
    if (pos == std::string::npos) {
        return normalized;
    }
    std::string_view tag(normalized.c_str() + pos + 1);
    if (tag.size() >= 2 && tag[0] == 'v' && all_digits(tag.substr(1))) {
        return normalized.substr(0, pos);
    }
    return normalized;
}

// Resolves "17", "17 Sorenson" or "Sorenson" to a bus id.
std::optional<BusId> resolve_bus(const Network& net, std::string_view text, std::string& why)
{
    const std::string s = trim(text);
    if (s.empty()) {
        why = "empty bus reference";
        return std::nullopt;
    }
    auto digits_end = s.find_first_not_of("0123456789");
    if (digits_end != 0) {
        const int id = std::stoi(s.substr(0, digits_end));
        if (std::none_of(net.buses.begin(), net.buses.end(), [&](const Bus& b) { return b.id.value == id; })) {
            why = "unknown bus " + std::to_string(id);
            return std::nullopt;
        }
        return BusId{id};
    }
    const std::string wanted = normalize_name(s);
    std::vector<BusId> exact;
    std::vector<BusId> loose;
    for (const auto& bus : net.buses) {
        const std::string name = normalize_name(bus.name);
        if (name.empty()) {
            continue;
        }
        if (name == wanted) {
            exact.push_back(bus.id);
        } else if (without_voltage_tag(name) == wanted) {
            loose.push_back(bus.id);
        }
    }
    const auto& hits = exact.empty() ? loose : exact;
    if (hits.size() == 1) {
        return hits.front();
    }
    why = hits.empty() ? "no bus named '" + s + "'" : "bus name '" + s + "' is ambiguous";
    return std::nullopt;
}

}  // namespace

BranchId resolve_branch(const Network& net, const std::string& reference)
{
    const std::string ref = trim(reference);
    if (all_digits(ref)) {
        const BranchId id{std::stoi(ref)};
        (void)NetworkIndex(net).branch(id);
        return id;
    }
    std::string why = "expected a branch id or FROM-TO";
    for (auto dash = ref.find('-'); dash != std::string::npos; dash = ref.find('-', dash + 1)) {
        std::string why_from;
        std::string why_to;
        auto from = resolve_bus(net, std::string_view(ref).substr(0, dash), why_from);
        auto to = resolve_bus(net, std::string_view(ref).substr(dash + 1), why_to);
        if (!from || !to) {
            why = !from ? why_from : why_to;
            continue;
        }
        std::vector<const Branch*> matches;
        for (const auto& br : net.branches) {
            if ((br.from_bus == *from && br.to_bus == *to) || (br.from_bus == *to && br.to_bus == *from)) {
                matches.push_back(&br);
            }
        }
        if (matches.size() > 1) {
            std::vector<const Branch*> live;
            std::copy_if(matches.begin(), matches.end(), std::back_inserter(live),
                         [](const Branch* b) { return b->in_service; });
            if (live.size() == 1) {
                return live.front()->id;
            }
            std::ostringstream os;
            os << "branch reference '" << ref << "' matches parallel branches";
            for (const auto* b : matches) {
                os << " " << b->id;
            }
            os << "; use a branch id";
            throw Error(ErrorKind::Config, os.str());
        }
        if (matches.size() == 1) {
            return matches.front()->id;
        }
        why = "no branch between buses " + std::to_string(from->value) + " and " + std::to_string(to->value);
    }
    throw Error(ErrorKind::Config, "cannot resolve branch '" + ref + "': " + why);
}

}  // namespace gridstress
