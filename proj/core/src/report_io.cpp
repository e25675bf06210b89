#include "gridstress/report_io.hpp"

#include "gridstress/error.hpp"
#include "json_convert.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace gridstress {

using detail::ordered_json;
using json = nlohmann::json;

StressSummary summarize(const StressReport& report)
{
    StressSummary s;
    s.label = report.label;
    s.v_rank_pct = report.max_v_rank();
    s.v_degree = report.max_v_degree();
    s.v_system = report.v_system;
    s.c_rank_pct = report.max_c_rank();
    s.c_degree = report.max_c_degree();
    s.c_system = report.c_system;
    s.emergency_violations = report.emergency_violations;
    s.contingency_violations = report.contingency_violations;
    return s;
}

std::string format_percent(double pct)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f%%", pct);
    return buf;
}

namespace {

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no)
{
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) {
        throw ParseError(line_no, "unterminated quoted field");
    }
    fields.push_back(std::move(cur));
    return fields;
}

double parse_percent(std::string s, std::size_t line_no)
{
    if (!s.empty() && s.back() == '%') {
        s.pop_back();
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ParseError(line_no, "bad percentage '" + s + "'");
    }
    return v;
}

int parse_int(const std::string& s, std::size_t line_no)
{
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ParseError(line_no, "bad integer '" + s + "'");
    }
    return v;
}

}  // namespace

void write_table_csv(std::ostream& out, const std::vector<StressSummary>& rows)
{
    out << kTableHeader << "\n";
    for (const auto& r : rows) {
        out << csv_field(r.label) << ',' << format_percent(r.v_rank_pct) << ',' << r.v_degree << ',' << r.v_system
            << ',' << format_percent(r.c_rank_pct) << ',' << r.c_degree << ',' << r.c_system << ','
            << r.emergency_violations << ',' << r.contingency_violations << "\n";
    }
}

std::vector<StressSummary> read_table_csv(std::istream& in)
{
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line) || line != kTableHeader) {
        throw ParseError(1, "missing or unexpected table header");
    }
    std::vector<StressSummary> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto f = split_csv_line(line, line_no);
        if (f.size() != 9) {
            throw ParseError(line_no, "expected 9 columns, found " + std::to_string(f.size()));
        }
        StressSummary s;
        s.label = f[0];
        s.v_rank_pct = parse_percent(f[1], line_no);
        s.v_degree = parse_int(f[2], line_no);
        s.v_system = parse_int(f[3], line_no);
        s.c_rank_pct = parse_percent(f[4], line_no);
        s.c_degree = parse_int(f[5], line_no);
        s.c_system = parse_int(f[6], line_no);
        s.emergency_violations = parse_int(f[7], line_no);
        s.contingency_violations = parse_int(f[8], line_no);
        rows.push_back(std::move(s));
    }
    return rows;
}

namespace detail {

ordered_json to_json_value(const StressReport& report)
{
    const auto s = summarize(report);
    ordered_json doc;
    doc["label"] = report.label;
    doc["summary"] = {
        {"v_rank_pct", s.v_rank_pct},
        {"v_degree", s.v_degree},
        {"v_system", s.v_system},
        {"c_rank_pct", s.c_rank_pct},
        {"c_degree", s.c_degree},
        {"c_system", s.c_system},
        {"emergency_violations", s.emergency_violations},
        {"contingency_violations", s.contingency_violations},
    };
    doc["monitored"] = ordered_json::array();
    for (std::size_t i = 0; i < report.monitored.size(); ++i) {
        doc["monitored"].push_back(
            {{"branch", report.monitored[i].value}, {"v_rank_pct", report.v_rank[i]}, {"v_degree", report.v_degree[i]}});
    }
    doc["outages"] = ordered_json::array();
    for (std::size_t j = 0; j < report.outages.size(); ++j) {
        ordered_json o;
        o["branch"] = report.outages[j].value;
        o["c_rank_pct"] = report.c_rank[j] ? ordered_json(*report.c_rank[j]) : ordered_json(nullptr);
        o["c_degree"] = report.c_degree[j] ? ordered_json(*report.c_degree[j]) : ordered_json(nullptr);
        doc["outages"].push_back(std::move(o));
    }
    doc["invalid_outages"] = ordered_json::array();
    for (BranchId id : report.invalid_outages) {
        doc["invalid_outages"].push_back(id.value);
    }
    return doc;
}

StressReport stress_report_from_json_value(const json& doc)
{
    try {
        StressReport r;
        r.label = doc.at("label").get<std::string>();
        const auto& summary = doc.at("summary");
        r.v_system = summary.at("v_system").get<int>();
        r.c_system = summary.at("c_system").get<int>();
        r.emergency_violations = summary.at("emergency_violations").get<int>();
        r.contingency_violations = summary.at("contingency_violations").get<int>();
        for (const auto& m : doc.at("monitored")) {
            r.monitored.emplace_back(m.at("branch").get<int>());
            r.v_rank.push_back(m.at("v_rank_pct").get<double>());
            r.v_degree.push_back(m.at("v_degree").get<int>());
        }
        for (const auto& o : doc.at("outages")) {
            r.outages.emplace_back(o.at("branch").get<int>());
            const auto& rank = o.at("c_rank_pct");
            const auto& degree = o.at("c_degree");
            r.c_rank.push_back(rank.is_null() ? std::nullopt : std::optional<double>(rank.get<double>()));
            r.c_degree.push_back(degree.is_null() ? std::nullopt : std::optional<int>(degree.get<int>()));
        }
        for (const auto& id : doc.at("invalid_outages")) {
            r.invalid_outages.emplace_back(id.get<int>());
        }
        return r;
    } catch (const json::exception& e) {
        throw ParseError(0, std::string("malformed stress report JSON: ") + e.what());
    }
}

ordered_json to_json_value(const SwitchingRecommendation& rec)
{
    ordered_json doc;
    doc["status"] = std::string(to_string(rec.status));
    doc["trigger_met"] = rec.trigger_met;
    doc["metric"] = std::string(to_string(rec.metric));
    doc["threshold"] = rec.threshold;
    doc["pre_metric"] = rec.pre_metric;
    doc["post_metric"] = rec.post_metric ? ordered_json(*rec.post_metric) : ordered_json(nullptr);
    doc["target_branch"] = rec.target_branch ? ordered_json(rec.target_branch->value) : ordered_json(nullptr);
    doc["contingency"] = rec.contingency ? ordered_json(rec.contingency->value) : ordered_json(nullptr);
    if (rec.action) {
        doc["action"] = {{"branch", rec.action->branch.value},
                         {"mode", std::string(to_string(rec.action->mode))},
                         {"context", rec.action->context}};
    } else {
        doc["action"] = nullptr;
    }
    doc["candidates_evaluated"] = ordered_json::array();
    for (const auto& c : rec.candidates_evaluated) {
        ordered_json o;
        o["branch"] = c.branch.value;
        o["score_mw"] = c.score_mw;
        o["evaluated"] = c.evaluated;
        if (c.evaluated) {
            o["metric"] = c.metric;
            o["peak_loading_pct"] = c.peak_loading_pct;
            o["emergency_violations"] = c.emergency_violations;
            o["contingency_violations"] = c.contingency_violations;
            o["v_system"] = c.v_system;
            o["c_system"] = c.c_system;
            o["accepted"] = c.accepted;
        } else {
            o["diagnostic"] = c.diagnostic;
        }
        doc["candidates_evaluated"].push_back(std::move(o));
    }
    doc["pre_report"] = to_json_value(rec.pre_report);
    doc["post_report"] = rec.post_report ? to_json_value(*rec.post_report) : ordered_json(nullptr);
    return doc;
}

}  // namespace detail

std::string stress_report_to_json(const StressReport& report)
{
    return detail::to_json_value(report).dump(2) + "\n";
}

StressReport stress_report_from_json(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(0, std::string("invalid JSON: ") + e.what());
    }
    return detail::stress_report_from_json_value(doc);
}

std::string recommendation_to_json(const SwitchingRecommendation& rec)
{
    return detail::to_json_value(rec).dump(2) + "\n";
}

}  // namespace gridstress
