#pragma once

#include "gridstress/stress_metrics.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gridstress {

enum class SwitchMode { Preventive, Corrective };
enum class SwitchDirection { Open, Close };

struct SwitchingAction {
    BranchId branch;
    SwitchMode mode = SwitchMode::Preventive;
    std::string context;  ///< scenario label or contingency

    friend bool operator==(const SwitchingAction&, const SwitchingAction&) = default;
};

/// Metric that defines "atypical stress" and must strictly fall for a switch to count.
enum class TriggerMetric {
    PeakLoading,          ///< highest post-contingency loading (max V_rank), per unit of rating
    SystemVulnerability,  ///< V_System
    SystemCriticality,    ///< C_System
};

enum class CandidateSelection {
    FirstAccepted,  ///< stop at the first candidate meeting acceptance, in ranked order
    BestInBudget,   ///< evaluate the whole budget, keep the lowest metric
};

enum class CandidatePool {
    LodfRelief,    ///< only branches whose opening is predicted to relieve the target
    AllNonRadial,  ///< every in-service non-radial branch, still ordered by predicted relief
};

struct StressPolicy {
    TriggerMetric metric = TriggerMetric::PeakLoading;
    /// PeakLoading: loading fraction, defaulting to the emergency fraction (so the
    /// default trigger is "any emergency-limit violation"). System degrees: the
    /// operator baseline count, defaulting to 0.
    std::optional<double> threshold;
    CandidateSelection selection = CandidateSelection::FirstAccepted;
    CandidatePool pool = CandidatePool::LodfRelief;

    void validate() const;
    [[nodiscard]] double resolved_threshold(const LimitSet& limits) const;
    [[nodiscard]] double value(const StressReport& report) const;
};

/// A candidate improves the triggering metric only if it lowers it by more than
/// this amount, so that ties broken by rounding noise never count as relief.
inline constexpr double kImprovementTolerance = 1e-9;

struct SearchOptions {
    std::size_t budget = 20;
    double sparsity_threshold = 0.0;
};

struct RankedCandidate {
    BranchId branch;
    double score_mw = 0.0;  ///< predicted reduction of |flow| on the target branch
};

/// Candidates for relieving `overloaded`, scored by -LODF(overloaded, j) * f_j
/// signed towards reducing |f_overloaded|, descending, ties by ascending id,
/// truncated to `budget`. Radial, out-of-service and invalid branches never appear.
std::vector<RankedCandidate> rank_candidates(const LodfMatrix& lodf, BranchId overloaded, const FlowState& flow,
                                             const TopologyClassification& topology, std::size_t budget,
                                             CandidatePool pool = CandidatePool::LodfRelief);

/// Full stress report after opening (or closing) one branch with dispatch unchanged.
StressReport evaluate_switch(const Network& net, BranchId branch, const MonitorSets& monitors,
                             const LimitSet& limits, double sparsity_threshold = 0.0,
                             SwitchDirection direction = SwitchDirection::Open, std::string label = {});

enum class SearchStatus { Improved, NoCandidate, ListDepleted };

std::string_view to_string(SearchStatus status) noexcept;
std::string_view to_string(SwitchMode mode) noexcept;
std::string_view to_string(TriggerMetric metric) noexcept;

struct CandidateOutcome {
    BranchId branch;
    double score_mw = 0.0;
    bool evaluated = false;  ///< false if evaluation failed; see diagnostic
    std::string diagnostic;
    double metric = 0.0;
    double peak_loading_pct = 0.0;
    int emergency_violations = 0;
    int contingency_violations = 0;
    int v_system = 0;
    int c_system = 0;
    bool accepted = false;

    friend bool operator==(const CandidateOutcome&, const CandidateOutcome&) = default;
};

struct SwitchingRecommendation {
    std::optional<SwitchingAction> action;
    StressReport pre_report;
    std::optional<StressReport> post_report;
    std::vector<CandidateOutcome> candidates_evaluated;
    SearchStatus status = SearchStatus::Improved;
    bool trigger_met = false;
    TriggerMetric metric = TriggerMetric::PeakLoading;
    double threshold = 0.0;
    double pre_metric = 0.0;
    std::optional<double> post_metric;
    std::optional<BranchId> target_branch;
    std::optional<BranchId> contingency;

    friend bool operator==(const SwitchingRecommendation&, const SwitchingRecommendation&) = default;
};

/// Trigger check, worst-branch identification, LODF-ranked candidates and
/// sequential full re-evaluation until one is accepted or the list runs out.
SwitchingRecommendation preventive_search(const Network& net, const StressPolicy& policy, const MonitorSets& monitors,
                                          const LimitSet& limits, const SearchOptions& options = {},
                                          std::string label = {});

/// Applies `contingency`, then runs the same loop on the post-contingency network.
/// Acceptance also requires the post-switch operating state to sit within
/// emergency limits. Throws Error(Islanding) if the contingency islands the network.
SwitchingRecommendation corrective_search(const Network& net, BranchId contingency, const StressPolicy& policy,
                                          const MonitorSets& monitors, const LimitSet& limits,
                                          const SearchOptions& options = {}, std::string label = {});

}  // namespace gridstress
