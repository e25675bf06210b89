#include "gridstress/scenario.hpp"

#include "json_convert.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <ostream>
#include <set>

namespace gridstress {

using detail::ordered_json;

std::vector<LoadScenario> standard_loading_preset()
{
    return {
        {"97%", 0.97, {}},
        {"105%", 1.05, {}},
        {"+106%", 1.05, {{BusId{40}, 1.05 * 1.16}, {BusId{41}, 1.05 * 2.05}}},
        {"110%", 1.10, {}},
    };
}

std::string_view to_string(RunMode mode) noexcept
{
    switch (mode) {
    case RunMode::Analyze: return "analyze";
    case RunMode::Preventive: return "preventive";
    case RunMode::Corrective: return "corrective";
    }
    return "unknown";
}

std::string_view to_string(OutputFormat format) noexcept
{
    switch (format) {
    case OutputFormat::Csv: return "csv";
    case OutputFormat::Json: return "json";
    }
    return "unknown";
}

void ScenarioConfig::validate() const
{
    if (case_path.empty()) {
        throw Error(ErrorKind::Config, "no case file given");
    }
    std::set<std::string> labels;
    for (const auto& s : scenarios) {
        if (!labels.insert(s.label).second) {
            throw Error(ErrorKind::Config, "duplicate scenario label '" + s.label + "'");
        }
        if (!(s.uniform > 0.0) || !std::isfinite(s.uniform)) {
            throw Error(ErrorKind::Config, "scenario '" + s.label + "': load factor must be positive");
        }
        for (const auto& [bus, factor] : s.overrides) {
            if (!(factor > 0.0) || !std::isfinite(factor)) {
                throw Error(ErrorKind::Config, "scenario '" + s.label + "': factor for bus " +
                                                   std::to_string(bus.value) + " must be positive");
            }
        }
    }
    if (!(sparsity_threshold >= 0.0) || !std::isfinite(sparsity_threshold)) {
        throw Error(ErrorKind::Config, "sparsity threshold must be non-negative");
    }
    if (mode == RunMode::Corrective && !contingency) {
        throw Error(ErrorKind::Config, "corrective mode requires a contingency");
    }
    if (mode != RunMode::Corrective && contingency) {
        throw Error(ErrorKind::Config, "a contingency is only meaningful in corrective mode");
    }
    if (mode != RunMode::Analyze && search.budget == 0) {
        throw Error(ErrorKind::Config, "candidate budget must be at least 1");
    }
    limits.validate();
    policy.validate();
}

std::string sha256_hex(std::string_view bytes)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorKind::Io, "SHA-256 digest failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * length);
    for (unsigned int i = 0; i < length; ++i) {
        out += kHex[digest[i] >> 4];
        out += kHex[digest[i] & 0x0f];
    }
    return out;
}

std::string tool_version()
{
    return GRIDSTRESS_VERSION;
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since)
{
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

RunReport run(const ScenarioConfig& config)
{
    config.validate();
    RunReport out;
    out.config = config;

    auto start = Clock::now();
    const std::string text = read_text_file(config.case_path);
    out.provenance.input_sha256 = sha256_hex(text);
    out.provenance.tool_version = tool_version();
    if (config.include_timestamp) {
        out.provenance.timestamp = utc_timestamp();
    }
    out.network = parse_case(text, config.parse);
    out.timing.parse_ms = elapsed_ms(start);

    std::optional<BranchId> contingency;
    if (config.contingency) {
        contingency = resolve_branch(out.network, *config.contingency);
    }

    for (const auto& scenario : config.scenarios) {
        start = Clock::now();
        ScenarioResult result;
        result.scenario = scenario;
        const Network scaled = scale_load(out.network, scenario.uniform, scenario.overrides);
        result.total_load_mw = scaled.total_load_mw();
        result.report =
            analyze_stress(scaled, config.monitors, config.limits, config.sparsity_threshold, scenario.label).report;
        if (config.mode == RunMode::Preventive) {
            result.recommendation =
                preventive_search(scaled, config.policy, config.monitors, config.limits, config.search, scenario.label);
        } else if (config.mode == RunMode::Corrective) {
            result.recommendation = corrective_search(scaled, *contingency, config.policy, config.monitors,
                                                      config.limits, config.search, scenario.label);
        }
        out.results.push_back(std::move(result));
        out.timing.scenario_ms.push_back(elapsed_ms(start));
    }
    return out;
}

namespace {

struct Row {
    std::string label;
    const StressReport* report;
};

std::vector<Row> output_rows(const RunReport& report)
{
    std::vector<Row> rows;
    for (const auto& r : report.results) {
        rows.push_back({r.scenario.label, &r.report});
        if (!r.recommendation) {
            continue;
        }
        const auto& rec = *r.recommendation;
        if (report.config.mode == RunMode::Preventive) {
            if (rec.action && rec.post_report) {
                rows.push_back({r.scenario.label + " (PTS)", &*rec.post_report});
            }
        } else if (report.config.mode == RunMode::Corrective) {
            const std::string ctg = rec.contingency ? std::to_string(rec.contingency->value) : "?";
            rows.push_back({r.scenario.label + " N-1 " + ctg, &rec.pre_report});
            if (rec.action && rec.post_report) {
                rows.push_back({r.scenario.label + " (CTS)", &*rec.post_report});
            }
        }
    }
    return rows;
}

ordered_json bus_map_json(const std::map<BusId, double>& m)
{
    ordered_json out = ordered_json::object();
    for (const auto& [bus, factor] : m) {
        out[std::to_string(bus.value)] = factor;
    }
    return out;
}

ordered_json ids_json(const std::optional<std::vector<BranchId>>& ids)
{
    if (!ids) {
        return "all";
    }
    ordered_json out = ordered_json::array();
    for (BranchId id : *ids) {
        out.push_back(id.value);
    }
    return out;
}

ordered_json config_json(const ScenarioConfig& c)
{
    ordered_json doc;
    doc["case"] = c.case_path.generic_string();
    doc["mode"] = std::string(to_string(c.mode));
    doc["scenarios"] = ordered_json::array();
    for (const auto& s : c.scenarios) {
        doc["scenarios"].push_back({{"label", s.label}, {"uniform", s.uniform}, {"overrides", bus_map_json(s.overrides)}});
    }
    ordered_json overrides = ordered_json::object();
    for (const auto& [branch, fraction] : c.limits.degree_threshold_overrides) {
        overrides[std::to_string(branch.value)] = fraction;
    }
    doc["limits"] = {
        {"normal", c.limits.normal_fraction},
        {"contingency", c.limits.contingency_fraction},
        {"contingency_hours", c.limits.contingency_duration_hours},
        {"emergency", c.limits.emergency_fraction},
        {"emergency_minutes", c.limits.emergency_duration_minutes},
        {"degree_threshold", c.limits.degree_threshold_fraction},
        {"degree_threshold_overrides", overrides},
        {"system_threshold", c.limits.system_threshold_fraction},
        {"counting", c.limits.counting == ViolationCounting::PerLine ? "per-line" : "per-cell"},
    };
    doc["sparsity"] = c.sparsity_threshold;
    doc["monitored"] = ids_json(c.monitors.monitored);
    doc["outages"] = ids_json(c.monitors.outages);
    doc["contingency"] = c.contingency ? ordered_json(*c.contingency) : ordered_json(nullptr);
    doc["policy"] = {
        {"metric", std::string(to_string(c.policy.metric))},
        {"threshold", c.policy.resolved_threshold(c.limits)},
        {"selection", c.policy.selection == CandidateSelection::FirstAccepted ? "first-accepted" : "best-in-budget"},
        {"pool", c.policy.pool == CandidatePool::LodfRelief ? "lodf-relief" : "all-non-radial"},
    };
    doc["budget"] = c.search.budget;
    doc["unrated_rating_mw"] = c.parse.unrated_rating_mw;
    return doc;
}

}  // namespace

std::vector<StressSummary> table_rows(const RunReport& report)
{
    std::vector<StressSummary> out;
    for (const auto& row : output_rows(report)) {
        auto s = summarize(*row.report);
        s.label = row.label;
        out.push_back(std::move(s));
    }
    return out;
}

void emit(const RunReport& report, OutputFormat format, std::ostream& out)
{
    if (format == OutputFormat::Csv) {
        write_table_csv(out, table_rows(report));
        return;
    }
    ordered_json doc;
    doc["schema"] = "gridstress.run";
    doc["schema_version"] = 1;
    ordered_json provenance;
    provenance["input_sha256"] = report.provenance.input_sha256;
    provenance["tool_version"] = report.provenance.tool_version;
    if (report.provenance.timestamp) {
        provenance["timestamp"] = *report.provenance.timestamp;
    }
    doc["provenance"] = provenance;
    doc["config"] = config_json(report.config);

    doc["table"] = ordered_json::array();
    for (const auto& row : output_rows(report)) {
        auto r = detail::to_json_value(*row.report);
        r["label"] = row.label;
        doc["table"].push_back(std::move(r));
    }
    doc["scenarios"] = ordered_json::array();
    for (const auto& r : report.results) {
        ordered_json s;
        s["label"] = r.scenario.label;
        s["uniform"] = r.scenario.uniform;
        s["overrides"] = bus_map_json(r.scenario.overrides);
        s["total_load_mw"] = r.total_load_mw;
        s["recommendation"] = r.recommendation ? detail::to_json_value(*r.recommendation) : ordered_json(nullptr);
        doc["scenarios"].push_back(std::move(s));
    }
    if (report.config.include_timestamp) {
        doc["timing"] = {{"parse_ms", report.timing.parse_ms}, {"scenario_ms", report.timing.scenario_ms}};
    }
    out << doc.dump(2) << "\n";
}

std::vector<StressReport> reports_from_run_json(std::string_view text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(0, std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object() || doc.value("schema", "") != "gridstress.run" || doc.value("schema_version", 0) != 1) {
        throw ParseError(0, "not a gridstress.run version 1 document");
    }
    std::vector<StressReport> out;
    try {
        for (const auto& row : doc.at("table")) {
            out.push_back(detail::stress_report_from_json_value(row));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, std::string("malformed run document: ") + e.what());
    }
    return out;
}

void write_chart_data(const RunReport& report, std::ostream& out)
{
    out << "scenario,metric,value\n";
    auto label_field = [](const std::string& s) {
        return s.find_first_of(",\"") == std::string::npos ? s : "\"" + s + "\"";
    };
    for (const auto& row : output_rows(report)) {
        const auto s = summarize(*row.report);
        const std::string label = label_field(row.label);
        out << label << ",v_rank_pct," << s.v_rank_pct << "\n"
            << label << ",v_degree," << s.v_degree << "\n"
            << label << ",v_system," << s.v_system << "\n"
            << label << ",c_rank_pct," << s.c_rank_pct << "\n"
            << label << ",c_degree," << s.c_degree << "\n"
            << label << ",c_system," << s.c_system << "\n"
            << label << ",emergency_violations," << s.emergency_violations << "\n"
            << label << ",contingency_violations," << s.contingency_violations << "\n";
        const auto& r = *row.report;
        for (std::size_t i = 0; i < r.monitored.size(); ++i) {
            out << label << ",v_rank_pct:" << r.monitored[i].value << ',' << r.v_rank[i] << "\n";
        }
        for (std::size_t j = 0; j < r.outages.size(); ++j) {
            if (r.c_rank[j]) {
                out << label << ",c_rank_pct:" << r.outages[j].value << ',' << *r.c_rank[j] << "\n";
            }
        }
    }
}

namespace {

template <class Writer>
void write_file(const std::filesystem::path& path, Writer&& writer)
{
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
    }
    file.precision(17);
    writer(file);
    file.flush();
    if (!file) {
        throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
    }
}

}  // namespace

void write_outputs(const RunReport& report)
{
    const auto& c = report.config;
    if (c.out_path) {
        write_file(*c.out_path, [&](std::ostream& o) { emit(report, c.format, o); });
    }
    if (c.chart_path) {
        write_file(*c.chart_path, [&](std::ostream& o) { write_chart_data(report, o); });
    }
    if (c.ptdf_path || c.lodf_path) {
        const auto ptdf = compute_ptdf(report.network);
        if (c.ptdf_path) {
            write_file(*c.ptdf_path, [&](std::ostream& o) { write_ptdf_csv(o, ptdf); });
        }
        if (c.lodf_path) {
            const auto lodf = compute_lodf(ptdf, report.network, c.sparsity_threshold);
            write_file(*c.lodf_path, [&](std::ostream& o) { write_lodf_csv(o, lodf); });
        }
    }
}

int exit_code(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::Config: return kExitConfig;
    case ErrorKind::Parse:
    case ErrorKind::Validation: return kExitParse;
    case ErrorKind::Singular:
    case ErrorKind::Islanding:
    case ErrorKind::Infeasible: return kExitInfeasible;
    case ErrorKind::Io: return kExitIo;
    }
    return 1;
}

int exit_code(const RunReport& report) noexcept
{
    for (const auto& r : report.results) {
        if (!r.recommendation || !r.recommendation->trigger_met) {
            continue;
        }
        switch (r.recommendation->status) {
        case SearchStatus::NoCandidate: return kExitNoCandidate;
        case SearchStatus::ListDepleted: return kExitListDepleted;
        case SearchStatus::Improved: break;
        }
    }
    return kExitOk;
}

}  // namespace gridstress
