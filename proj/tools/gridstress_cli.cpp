// gridstress: N-1 stress metrics and single-line switching searches on DC power flow cases.
//
// Exit codes:
//   0  success (including "trigger not met")
//   2  invalid command line or configuration
//   3  case file could not be parsed or violates model invariants
//   4  infeasible dispatch, singular system or islanding outage
//   5  search triggered but no switching candidate exists
//   6  search triggered and every candidate in the budget failed
//   7  file read or write failure

#include <gridstress/scenario.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

namespace gs = gridstress;

namespace {

struct Options {
    std::string case_path;
    std::vector<double> scales;
    std::vector<std::string> bus_scale;
    std::vector<std::string> bus_increase;
    std::string label;
    bool preset = false;

    double contingency_limit = 1.2;
    double emergency_limit = 1.35;
    double degree_threshold = 1.0;
    double system_threshold = 1.0;
    bool per_cell = false;
    double sparsity = 0.0;
    std::vector<int> monitored;
    std::vector<int> outages;
    double unrated_rating = 9900.0;

    std::string contingency;
    std::optional<double> threshold;
    std::size_t budget = 20;
    std::string metric = "peak";
    std::string selection = "first";
    std::string pool = "lodf";

    std::string out;
    std::string format = "csv";
    std::string chart;
    std::string ptdf_out;
    std::string lodf_out;
    bool no_timestamp = false;
};

std::map<gs::BusId, double> parse_bus_pairs(const std::vector<std::string>& items, const char* flag)
{
    std::map<gs::BusId, double> out;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw gs::Error(gs::ErrorKind::Config, std::string(flag) + ": expected ID=VALUE, got '" + item + "'");
        }
        try {
            std::size_t used = 0;
            const int id = std::stoi(item.substr(0, eq), &used);
            if (used != eq) {
                throw std::invalid_argument(item);
            }
            const std::string value_text = item.substr(eq + 1);
            const double value = std::stod(value_text, &used);
            if (used != value_text.size()) {
                throw std::invalid_argument(item);
            }
            out[gs::BusId{id}] = value;
        } catch (const std::logic_error&) {
            throw gs::Error(gs::ErrorKind::Config, std::string(flag) + ": cannot parse '" + item + "'");
        }
    }
    return out;
}

std::string percent_label(double factor)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g%%", factor * 100.0);
    return buf;
}

std::vector<gs::LoadScenario> build_scenarios(const Options& o)
{
    const auto absolute = parse_bus_pairs(o.bus_scale, "--bus-scale");
    const auto increase = parse_bus_pairs(o.bus_increase, "--bus-increase");
    if (o.preset) {
        if (!o.scales.empty() || !absolute.empty() || !increase.empty() || !o.label.empty()) {
            throw gs::Error(gs::ErrorKind::Config, "--preset cannot be combined with --scale, --bus-* or --label");
        }
        return gs::standard_loading_preset();
    }
    std::vector<double> scales = o.scales.empty() ? std::vector<double>{1.0} : o.scales;
    if (!o.label.empty() && scales.size() != 1) {
        throw gs::Error(gs::ErrorKind::Config, "--label needs exactly one --scale");
    }
    std::vector<gs::LoadScenario> out;
    for (double scale : scales) {
        gs::LoadScenario s;
        s.uniform = scale;
        s.overrides = absolute;
        for (const auto& [bus, pct] : increase) {
            if (absolute.count(bus)) {
                throw gs::Error(gs::ErrorKind::Config,
                                "bus " + std::to_string(bus.value) + " given in both --bus-scale and --bus-increase");
            }
            s.overrides[bus] = scale * (1.0 + pct / 100.0);
        }
        s.label = o.label.empty() ? (s.overrides.empty() ? "" : "+") + percent_label(scale) : o.label;
        out.push_back(std::move(s));
    }
    return out;
}

std::optional<std::vector<gs::BranchId>> branch_list(const std::vector<int>& ids)
{
    if (ids.empty()) {
        return std::nullopt;
    }
    std::vector<gs::BranchId> out;
    for (int id : ids) {
        out.emplace_back(id);
    }
    return out;
}

gs::ScenarioConfig build_config(const Options& o, gs::RunMode mode)
{
    gs::ScenarioConfig c;
    c.case_path = o.case_path;
    c.mode = mode;
    c.scenarios = build_scenarios(o);
    c.limits.contingency_fraction = o.contingency_limit;
    c.limits.emergency_fraction = o.emergency_limit;
    c.limits.degree_threshold_fraction = o.degree_threshold;
    c.limits.system_threshold_fraction = o.system_threshold;
    c.limits.counting = o.per_cell ? gs::ViolationCounting::PerCell : gs::ViolationCounting::PerLine;
    c.sparsity_threshold = o.sparsity;
    c.monitors.monitored = branch_list(o.monitored);
    c.monitors.outages = branch_list(o.outages);
    c.parse.unrated_rating_mw = o.unrated_rating;
    if (!o.contingency.empty()) {
        c.contingency = o.contingency;
    }
    c.policy.threshold = o.threshold;
    c.policy.metric = o.metric == "peak"       ? gs::TriggerMetric::PeakLoading
                      : o.metric == "v-system" ? gs::TriggerMetric::SystemVulnerability
                                               : gs::TriggerMetric::SystemCriticality;
    c.policy.selection =
        o.selection == "first" ? gs::CandidateSelection::FirstAccepted : gs::CandidateSelection::BestInBudget;
    c.policy.pool = o.pool == "lodf" ? gs::CandidatePool::LodfRelief : gs::CandidatePool::AllNonRadial;
    c.search.budget = o.budget;
    c.search.sparsity_threshold = o.sparsity;
    c.format = o.format == "json" ? gs::OutputFormat::Json : gs::OutputFormat::Csv;
    if (!o.out.empty()) {
        c.out_path = o.out;
    }
    if (!o.chart.empty()) {
        c.chart_path = o.chart;
    }
    if (!o.ptdf_out.empty()) {
        c.ptdf_path = o.ptdf_out;
    }
    if (!o.lodf_out.empty()) {
        c.lodf_path = o.lodf_out;
    }
    c.include_timestamp = !o.no_timestamp;
    return c;
}

void add_common(CLI::App& cmd, Options& o)
{
    cmd.add_option("case", o.case_path, "MATPOWER .m or gridstress JSON case file")->required();
    cmd.add_option("--scale", o.scales, "Uniform load factor; repeat for several scenarios")
        ->check(CLI::PositiveNumber);
    cmd.add_option("--bus-scale", o.bus_scale, "Absolute load factor per bus, ID=FACTOR[,...]")->delimiter(',');
    cmd.add_option("--bus-increase", o.bus_increase,
                   "Load increase in percent on top of the uniform factor, ID=PCT[,...]")
        ->delimiter(',');
    cmd.add_option("--label", o.label, "Label of the single scenario");
    cmd.add_flag("--preset", o.preset, "Run the 97%, 105%, +106% and 110% loadings");
    cmd.add_option("--contingency-limit", o.contingency_limit, "Contingency limit, fraction of rating")
        ->capture_default_str();
    cmd.add_option("--emergency-limit", o.emergency_limit, "Emergency limit, fraction of rating")
        ->capture_default_str();
    cmd.add_option("--degree-threshold", o.degree_threshold, "Overload threshold for degrees, fraction of rating")
        ->capture_default_str();
    cmd.add_option("--system-threshold", o.system_threshold, "Rank threshold for V_N and C_N, fraction of rating")
        ->capture_default_str();
    cmd.add_flag("--per-cell", o.per_cell, "Count violations per (line, outage) pair instead of per line");
    cmd.add_option("--sparsity", o.sparsity, "Drop LODF entries with magnitude below this value")
        ->capture_default_str();
    cmd.add_option("--monitor", o.monitored, "Monitored branch ids (default: all in service)")->delimiter(',');
    cmd.add_option("--outage", o.outages, "Outaged branch ids (default: all in service)")->delimiter(',');
    cmd.add_option("--unrated-rating", o.unrated_rating, "Rating in MW given to branches with rateA = 0")
        ->capture_default_str();
    cmd.add_option("--out", o.out, "Output file (default: standard output)");
    cmd.add_option("--format", o.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    cmd.add_option("--chart-data", o.chart, "Write tidy chart data (scenario,metric,value) to this file");
    cmd.add_option("--ptdf-out", o.ptdf_out, "Write the PTDF matrix as CSV");
    cmd.add_option("--lodf-out", o.lodf_out, "Write the LODF matrix as CSV");
    cmd.add_flag("--no-timestamp", o.no_timestamp, "Omit timestamp and timings for reproducible output");
}

void add_search(CLI::App& cmd, Options& o)
{
    cmd.add_option("--threshold", o.threshold,
                   "Trigger threshold (peak: fraction of rating, default emergency limit; v-system/c-system: count, "
                   "default 0)");
    cmd.add_option("--budget", o.budget, "Maximum candidates evaluated")->capture_default_str();
    cmd.add_option("--metric", o.metric, "Triggering metric")
        ->check(CLI::IsMember({"peak", "v-system", "c-system"}))
        ->capture_default_str();
    cmd.add_option("--selection", o.selection, "Stop at first accepted candidate or keep best in budget")
        ->check(CLI::IsMember({"first", "best"}))
        ->capture_default_str();
    cmd.add_option("--pool", o.pool, "Candidates predicted to relieve the target, or all non-radial branches")
        ->check(CLI::IsMember({"lodf", "all"}))
        ->capture_default_str();
}

void report_searches(const gs::RunReport& report)
{
    for (const auto& r : report.results) {
        if (!r.recommendation) {
            continue;
        }
        const auto& rec = *r.recommendation;
        std::cerr << r.scenario.label << ": ";
        if (!rec.trigger_met) {
            std::cerr << "trigger not met, no action\n";
            continue;
        }
        switch (rec.status) {
        case gs::SearchStatus::Improved:
            std::cerr << "open branch " << rec.action->branch.value << ", " << gs::to_string(rec.metric) << ' '
                      << rec.pre_metric << " -> " << *rec.post_metric << '\n';
            break;
        case gs::SearchStatus::NoCandidate: std::cerr << "no switching candidate\n"; break;
        case gs::SearchStatus::ListDepleted:
            std::cerr << "candidate list depleted after " << rec.candidates_evaluated.size() << " evaluations\n";
            break;
        }
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"N-1 stress metrics and transmission switching on DC power flow cases"};
    app.set_version_flag("--version", gs::tool_version());
    app.require_subcommand(1);

    Options o;
    auto* analyze = app.add_subcommand("analyze", "Stress metrics for each loading scenario");
    auto* preventive = app.add_subcommand("preventive", "Search a single line opening that lowers base-case stress");
    auto* corrective = app.add_subcommand("corrective", "Search a single line opening after a contingency");
    add_common(*analyze, o);
    add_common(*preventive, o);
    add_common(*corrective, o);
    add_search(*preventive, o);
    add_search(*corrective, o);
    corrective->add_option("--contingency", o.contingency, "Outaged branch, ID or FROM-TO (bus ids or names)")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return gs::kExitConfig;
    }

    const gs::RunMode mode = preventive->parsed()   ? gs::RunMode::Preventive
                             : corrective->parsed() ? gs::RunMode::Corrective
                                                    : gs::RunMode::Analyze;
    try {
        const auto config = build_config(o, mode);
        const auto report = gs::run(config);
        gs::write_outputs(report);
        if (!config.out_path) {
            std::cout.precision(17);
            gs::emit(report, config.format, std::cout);
        }
        report_searches(report);
        return gs::exit_code(report);
    } catch (const gs::Error& e) {
        std::cerr << "gridstress: " << gs::to_string(e.kind()) << " error: " << e.what() << '\n';
        return gs::exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "gridstress: " << e.what() << '\n';
        return 1;
    }
}
