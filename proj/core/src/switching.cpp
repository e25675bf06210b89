#include "gridstress/switching.hpp"

#include "gridstress/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace gridstress {

std::string_view to_string(SearchStatus status) noexcept
{
    switch (status) {
    case SearchStatus::Improved: return "improved";
    case SearchStatus::NoCandidate: return "no-candidate";
    case SearchStatus::ListDepleted: return "list-depleted";
    }
    return "unknown";
}

std::string_view to_string(SwitchMode mode) noexcept
{
    return mode == SwitchMode::Preventive ? "preventive" : "corrective";
}

std::string_view to_string(TriggerMetric metric) noexcept
{
    switch (metric) {
    case TriggerMetric::PeakLoading: return "peak-loading";
    case TriggerMetric::SystemVulnerability: return "system-vulnerability";
    case TriggerMetric::SystemCriticality: return "system-criticality";
    }
    return "unknown";
}

void StressPolicy::validate() const
{
    if (threshold && !(*threshold >= 0.0 && std::isfinite(*threshold))) {
        throw Error(ErrorKind::Config, "stress policy threshold must be non-negative");
    }
    if (metric == TriggerMetric::PeakLoading && threshold && *threshold == 0.0) {
        throw Error(ErrorKind::Config, "peak-loading threshold must be positive");
    }
}

double StressPolicy::resolved_threshold(const LimitSet& limits) const
{
    if (threshold) {
        return *threshold;
    }
    return metric == TriggerMetric::PeakLoading ? limits.emergency_fraction : 0.0;
}

double StressPolicy::value(const StressReport& report) const
{
    switch (metric) {
    case TriggerMetric::PeakLoading: return report.peak_loading();
    case TriggerMetric::SystemVulnerability: return report.v_system;
    case TriggerMetric::SystemCriticality: return report.c_system;
    }
    return 0.0;
}

std::vector<RankedCandidate> rank_candidates(const LodfMatrix& lodf, BranchId overloaded, const FlowState& flow,
                                             const TopologyClassification& topology, std::size_t budget,
                                             CandidatePool pool)
{
    if (budget == 0) {
        throw Error(ErrorKind::Config, "candidate budget must be at least 1");
    }
    const auto target = lodf.position(overloaded);
    if (!target) {
        throw Error(ErrorKind::Config, "unknown overloaded branch " + std::to_string(overloaded.value));
    }
    const double direction = flow.flows_mw.at(*target) < 0.0 ? -1.0 : 1.0;

    std::vector<RankedCandidate> out;
    for (std::size_t j = 0; j < lodf.branch_ids.size(); ++j) {
        if (j == *target || !lodf.valid_outage(j) || topology.is_radial(lodf.branch_ids[j])) {
            continue;
        }
        const double shift = lodf.entries(static_cast<Eigen::Index>(*target), static_cast<Eigen::Index>(j)) *
                             flow.flows_mw[j];
        const double score = -shift * direction;
        if (pool == CandidatePool::LodfRelief && !(score > 0.0)) {
            continue;
        }
        out.push_back({lodf.branch_ids[j], score});
    }
    std::sort(out.begin(), out.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
        if (a.score_mw != b.score_mw) {
            return a.score_mw > b.score_mw;
        }
        return a.branch < b.branch;
    });
    if (out.size() > budget) {
        out.resize(budget);
    }
    return out;
}

namespace {

StressAnalysis analyze_switched(const Network& net, BranchId branch, const MonitorSets& monitors,
                                const LimitSet& limits, double sparsity_threshold, SwitchDirection direction,
                                std::string label)
{
    const NetworkIndex index(net);
    const auto& br = net.branches[index.branch(branch)];
    if (direction == SwitchDirection::Open) {
        if (!br.in_service) {
            throw Error(ErrorKind::Config, "branch " + std::to_string(branch.value) + " is already open");
        }
        if (classify_topology(net).is_radial(branch)) {
            throw Error(ErrorKind::Islanding, "opening branch " + std::to_string(branch.value) +
                                                  " islands the network");
        }
        return analyze_stress(with_branch_status(net, branch, false), monitors.without(branch), limits,
                              sparsity_threshold, std::move(label));
    }
    if (br.in_service) {
        throw Error(ErrorKind::Config, "branch " + std::to_string(branch.value) + " is already closed");
    }
    return analyze_stress(with_branch_status(net, branch, true), monitors, limits, sparsity_threshold,
                          std::move(label));
}

// Highest loading of the operating point itself (no further outage) over monitored branches.
struct StateLoading {
    double peak = 0.0;
    int above_emergency = 0;
    int above_contingency = 0;
    std::optional<std::size_t> worst;  // row in the table
};

StateLoading state_loading(const StressAnalysis& analysis, const Network& net, const LimitSet& limits)
{
    const NetworkIndex index(net);
    StateLoading out;
    for (std::size_t r = 0; r < analysis.table.monitored.size(); ++r) {
        const auto k = index.branch(analysis.table.monitored[r]);
        const double loading = std::abs(analysis.base.flows_mw[k]) / net.branches[k].rating_mw;
        if (!out.worst || loading > out.peak) {
            out.peak = loading;
            out.worst = r;
        }
        out.above_emergency += loading > limits.emergency_fraction ? 1 : 0;
        out.above_contingency += loading > limits.contingency_fraction ? 1 : 0;
    }
    return out;
}

// Monitored branch with the highest V_rank; ties by ascending id.
std::optional<BranchId> worst_vulnerable(const StressReport& report)
{
    std::optional<std::size_t> best;
    for (std::size_t r = 0; r < report.monitored.size(); ++r) {
        if (!best || report.v_rank[r] > report.v_rank[*best] ||
            (report.v_rank[r] == report.v_rank[*best] && report.monitored[r] < report.monitored[*best])) {
            best = r;
        }
    }
    if (!best) {
        return std::nullopt;
    }
    return report.monitored[*best];
}

struct LoopInputs {
    const Network& net;  // network the candidates are opened on
    const StressAnalysis& pre;
    BranchId target;
    const StressPolicy& policy;
    const MonitorSets& monitors;
    const LimitSet& limits;
    const SearchOptions& options;
    SwitchMode mode;
    std::string context;
    // Extra acceptance and safety conditions on the switched analysis.
    std::function<bool(const StressAnalysis&)> extra_acceptance;
    std::function<bool(const StressAnalysis&)> extra_safety;
};

void run_candidate_loop(const LoopInputs& in, SwitchingRecommendation& rec)
{
    const auto candidates =
        rank_candidates(in.pre.lodf, in.target, in.pre.base, in.pre.topology, in.options.budget, in.policy.pool);
    if (candidates.empty()) {
        rec.status = SearchStatus::NoCandidate;
        return;
    }

    struct Kept {
        std::size_t order;
        double metric;
        StressReport report;
    };
    std::optional<Kept> best_accepted;
    std::optional<Kept> best_improving;

    for (std::size_t order = 0; order < candidates.size(); ++order) {
        const auto& cand = candidates[order];
        CandidateOutcome outcome;
        outcome.branch = cand.branch;
        outcome.score_mw = cand.score_mw;
        std::optional<StressAnalysis> post;
        try {
            post = analyze_switched(in.net, cand.branch, in.monitors, in.limits, in.options.sparsity_threshold,
                                    SwitchDirection::Open,
                                    rec.pre_report.label + " open " + std::to_string(cand.branch.value));
        } catch (const Error& e) {
            outcome.diagnostic = e.what();
            rec.candidates_evaluated.push_back(std::move(outcome));
            continue;
        }
        const auto& report = post->report;
        outcome.evaluated = true;
        outcome.metric = in.policy.value(report);
        outcome.peak_loading_pct = report.max_v_rank();
        outcome.emergency_violations = report.emergency_violations;
        outcome.contingency_violations = report.contingency_violations;
        outcome.v_system = report.v_system;
        outcome.c_system = report.c_system;

        const bool safe = report.emergency_violations <= rec.pre_report.emergency_violations &&
                          (!in.extra_safety || in.extra_safety(*post));
        const bool improving = safe && outcome.metric < rec.pre_metric - kImprovementTolerance;
        outcome.accepted = improving && !(outcome.metric > rec.threshold) &&
                           (!in.extra_acceptance || in.extra_acceptance(*post));
        rec.candidates_evaluated.push_back(outcome);

        if (outcome.accepted && (!best_accepted || outcome.metric < best_accepted->metric)) {
            best_accepted = Kept{order, outcome.metric, report};
            if (in.policy.selection == CandidateSelection::FirstAccepted) {
                break;
            }
        }
        if (improving && (!best_improving || outcome.metric < best_improving->metric)) {
            best_improving = Kept{order, outcome.metric, report};
        }
    }

    const auto& chosen = best_accepted ? best_accepted : best_improving;
    if (!chosen) {
        rec.status = SearchStatus::ListDepleted;
        return;
    }
    rec.status = SearchStatus::Improved;
    rec.action = SwitchingAction{candidates[chosen->order].branch, in.mode, in.context};
    rec.post_report = chosen->report;
    rec.post_metric = chosen->metric;
}

}  // namespace

StressReport evaluate_switch(const Network& net, BranchId branch, const MonitorSets& monitors,
                             const LimitSet& limits, double sparsity_threshold, SwitchDirection direction,
                             std::string label)
{
    return analyze_switched(net, branch, monitors, limits, sparsity_threshold, direction, std::move(label)).report;
}

SwitchingRecommendation preventive_search(const Network& net, const StressPolicy& policy, const MonitorSets& monitors,
                                          const LimitSet& limits, const SearchOptions& options, std::string label)
{
    policy.validate();
    limits.validate();
    if (options.budget == 0) {
        throw Error(ErrorKind::Config, "candidate budget must be at least 1");
    }
    const auto pre = analyze_stress(net, monitors, limits, options.sparsity_threshold, label);

    SwitchingRecommendation rec;
    rec.pre_report = pre.report;
    rec.metric = policy.metric;
    rec.threshold = policy.resolved_threshold(limits);
    rec.pre_metric = policy.value(pre.report);
    rec.trigger_met = rec.pre_metric > rec.threshold;
    if (!rec.trigger_met) {
        rec.status = SearchStatus::Improved;
        return rec;
    }
    rec.target_branch = worst_vulnerable(pre.report);
    if (!rec.target_branch) {
        rec.status = SearchStatus::NoCandidate;
        return rec;
    }
    run_candidate_loop(LoopInputs{net, pre, *rec.target_branch, policy, monitors, limits, options,
                                  SwitchMode::Preventive, label, {}, {}},
                       rec);
    return rec;
}

SwitchingRecommendation corrective_search(const Network& net, BranchId contingency, const StressPolicy& policy,
                                          const MonitorSets& monitors, const LimitSet& limits,
                                          const SearchOptions& options, std::string label)
{
    policy.validate();
    limits.validate();
    if (options.budget == 0) {
        throw Error(ErrorKind::Config, "candidate budget must be at least 1");
    }
    const NetworkIndex index(net);
    if (!net.branches[index.branch(contingency)].in_service) {
        throw Error(ErrorKind::Config, "contingency branch " + std::to_string(contingency.value) +
                                           " is not in service");
    }
    if (classify_topology(net).is_radial(contingency)) {
        throw Error(ErrorKind::Islanding, "contingency on branch " + std::to_string(contingency.value) +
                                              " islands the network");
    }
    const Network post_contingency = with_branch_status(net, contingency, false);
    const MonitorSets post_monitors = monitors.without(contingency);
    if (label.empty()) {
        label = "N-1 " + std::to_string(contingency.value);
    }
    const auto pre = analyze_stress(post_contingency, post_monitors, limits, options.sparsity_threshold, label);
    const auto state = state_loading(pre, post_contingency, limits);

    SwitchingRecommendation rec;
    rec.contingency = contingency;
    rec.pre_report = pre.report;
    rec.metric = policy.metric;
    rec.threshold = policy.resolved_threshold(limits);
    rec.pre_metric = policy.value(pre.report);
    const bool state_overloaded = state.above_contingency > 0;
    rec.trigger_met = rec.pre_metric > rec.threshold || state_overloaded;
    if (!rec.trigger_met) {
        rec.status = SearchStatus::Improved;
        return rec;
    }
    rec.target_branch = state_overloaded ? std::optional{pre.report.monitored[*state.worst]}
                                         : worst_vulnerable(pre.report);
    if (!rec.target_branch) {
        rec.status = SearchStatus::NoCandidate;
        return rec;
    }

    // Switching keeps branch positions and ratings, so the post-contingency
    // network describes every switched state's branches too.
    auto within_emergency = [&](const StressAnalysis& post) {
        return state_loading(post, post_contingency, limits).above_emergency == 0;
    };
    auto no_new_emergency = [&](const StressAnalysis& post) {
        return state_loading(post, post_contingency, limits).above_emergency <= state.above_emergency;
    };
    run_candidate_loop(LoopInputs{post_contingency, pre, *rec.target_branch, policy, post_monitors, limits, options,
                                  SwitchMode::Corrective, "contingency " + std::to_string(contingency.value),
                                  within_emergency, no_new_emergency},
                       rec);
    return rec;
}

}  // namespace gridstress
