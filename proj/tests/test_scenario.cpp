#include "support.hpp"

#include <gridstress/case_io.hpp>
#include <gridstress/report_io.hpp>
#include <gridstress/scenario.hpp>

#include <doctest.h>

#include <json.hpp>

#include <sstream>

using namespace gridstress;

namespace {

ScenarioConfig config_for(const std::string& case_name, std::vector<LoadScenario> scenarios)
{
    ScenarioConfig c;
    c.case_path = gstest::data_path(case_name);
    c.scenarios = std::move(scenarios);
    c.include_timestamp = false;
    return c;
}

std::string emitted(const RunReport& report, OutputFormat format)
{
    std::ostringstream out;
    emit(report, format, out);
    return out.str();
}

std::vector<std::string> lines_of(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        out.push_back(line);
    }
    return out;
}

}  // namespace

TEST_CASE("shipped small fixtures match the in-code networks")
{
    CHECK(gstest::load_data_case("triangle.m") == gstest::triangle());
    CHECK(gstest::load_data_case("four_bus.m") == gstest::four_bus_switching());
}

TEST_CASE("analyze the triangle at 100% load")
{
    const auto report = run(config_for("triangle.m", {{"100%", 1.0, {}}}));
    const auto lines = lines_of(emitted(report, OutputFormat::Csv));
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == kTableHeader);
    CHECK(lines[1] == "100%,90.00%,0,0,90.00%,0,0,0,0");
}

TEST_CASE("empty scenario list gives a header-only table")
{
    const auto report = run(config_for("triangle.m", {}));
    CHECK(emitted(report, OutputFormat::Csv) == std::string(kTableHeader) + "\n");
}

TEST_CASE("standard preset produces four labeled rows in order")
{
    const auto report = run(config_for("case118_rated.m", standard_loading_preset()));
    const auto rows = table_rows(report);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].label == "97%");
    CHECK(rows[1].label == "105%");
    CHECK(rows[2].label == "+106%");
    CHECK(rows[3].label == "110%");
    CHECK(report.results[2].total_load_mw / report.network.total_load_mw() == doctest::Approx(1.0622).epsilon(1e-4));
    for (const auto& line : lines_of(emitted(report, OutputFormat::Csv))) {
        CHECK(std::count(line.begin(), line.end(), ',') == 8);
    }
}

TEST_CASE("table CSV round trip")
{
    const auto report = run(config_for("case118_rated.m", standard_loading_preset()));
    std::istringstream in(emitted(report, OutputFormat::Csv));
    const auto back = read_table_csv(in);
    const auto rows = table_rows(report);
    REQUIRE(back.size() == rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        CHECK(back[k].label == rows[k].label);
        CHECK(back[k].v_rank_pct == doctest::Approx(rows[k].v_rank_pct).epsilon(1e-4));
        CHECK(back[k].v_degree == rows[k].v_degree);
        CHECK(back[k].c_system == rows[k].c_system);
        CHECK(back[k].contingency_violations == rows[k].contingency_violations);
    }

    std::ostringstream quoted;
    write_table_csv(quoted, {StressSummary{"a, \"b\"", 1.0, 1, 1, 1.0, 1, 1, 0, 0}});
    std::istringstream quoted_in(quoted.str());
    CHECK(read_table_csv(quoted_in)[0].label == "a, \"b\"");

    std::istringstream bad("nonsense\n");
    CHECK_THROWS_AS((void)read_table_csv(bad), ParseError);
    std::istringstream short_row(std::string(kTableHeader) + "\nx,1%,2\n");
    CHECK_THROWS_AS((void)read_table_csv(short_row), ParseError);
}

TEST_CASE("stress report JSON round trip")
{
    const auto net = gstest::load_data_case("case118_rated.m");
    const auto report = analyze_stress(net, MonitorSets{}, LimitSet{}, 0.0, "base").report;
    CHECK(stress_report_from_json(stress_report_to_json(report)) == report);
    CHECK_THROWS_AS((void)stress_report_from_json("{}"), ParseError);
}

TEST_CASE("run JSON round trip and reproducibility")
{
    auto config = config_for("case118_rated.m", standard_loading_preset());
    config.mode = RunMode::Preventive;
    const auto a = run(config);
    const auto b = run(config);
    const auto text = emitted(a, OutputFormat::Json);
    CHECK(text == emitted(b, OutputFormat::Json));

    const auto doc = nlohmann::json::parse(text);
    CHECK(doc["schema"] == "gridstress.run");
    CHECK(doc["schema_version"] == 1);
    CHECK(doc["provenance"]["input_sha256"].get<std::string>().size() == 64);
    CHECK_FALSE(doc["provenance"].contains("timestamp"));
    CHECK_FALSE(doc.contains("timing"));

    const auto reports = reports_from_run_json(text);
    std::vector<const StressReport*> expected;
    for (const auto& r : a.results) {
        expected.push_back(&r.report);
        if (r.recommendation && r.recommendation->post_report) {
            expected.push_back(&*r.recommendation->post_report);
        }
    }
    REQUIRE(reports.size() == expected.size());
    for (std::size_t k = 0; k < reports.size(); ++k) {
        auto want = *expected[k];
        want.label = reports[k].label;
        CHECK(reports[k] == want);
    }
    CHECK_THROWS_AS((void)reports_from_run_json("{\"schema\": \"other\"}"), ParseError);
}

TEST_CASE("timestamp and timings appear unless suppressed")
{
    auto config = config_for("triangle.m", {{"100%", 1.0, {}}});
    config.include_timestamp = true;
    const auto doc = nlohmann::json::parse(emitted(run(config), OutputFormat::Json));
    CHECK(doc["provenance"].contains("timestamp"));
    CHECK(doc.contains("timing"));
}

TEST_CASE("preventive and corrective row labels")
{
    auto config = config_for("four_bus.m", {{"base", 1.0, {}}});
    config.mode = RunMode::Preventive;
    auto rows = table_rows(run(config));
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].label == "base (PTS)");

    config = config_for("case118_rated.m", {{"110%", 1.10, {}}});
    config.mode = RunMode::Corrective;
    config.contingency = "8-5";
    const auto report = run(config);
    rows = table_rows(report);
    REQUIRE(rows.size() >= 2);
    const auto ctg = resolve_branch(report.network, "8-5");
    CHECK(rows[1].label == "110% N-1 " + std::to_string(ctg.value));
    if (report.results[0].recommendation->action) {
        REQUIRE(rows.size() == 3);
        CHECK(rows[2].label == "110% (CTS)");
    }
}

TEST_CASE("config validation")
{
    auto c = config_for("triangle.m", {{"a", 1.0, {}}, {"a", 1.1, {}}});
    CHECK_THROWS_AS(c.validate(), Error);
    c = config_for("triangle.m", {{"a", 0.0, {}}});
    CHECK_THROWS_AS(c.validate(), Error);
    c = config_for("triangle.m", {{"a", 1.0, {{BusId{3}, -1.0}}}});
    CHECK_THROWS_AS(c.validate(), Error);
    c = config_for("triangle.m", {});
    c.mode = RunMode::Corrective;
    CHECK_THROWS_AS(c.validate(), Error);
    c.mode = RunMode::Analyze;
    c.contingency = "1";
    CHECK_THROWS_AS(c.validate(), Error);
    c.contingency.reset();
    c.case_path.clear();
    CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("exit codes")
{
    CHECK(exit_code(ErrorKind::Config) == kExitConfig);
    CHECK(exit_code(ErrorKind::Parse) == kExitParse);
    CHECK(exit_code(ErrorKind::Validation) == kExitParse);
    CHECK(exit_code(ErrorKind::Infeasible) == kExitInfeasible);
    CHECK(exit_code(ErrorKind::Singular) == kExitInfeasible);
    CHECK(exit_code(ErrorKind::Islanding) == kExitInfeasible);
    CHECK(exit_code(ErrorKind::Io) == kExitIo);
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("chart data is tidy")
{
    const auto report = run(config_for("triangle.m", {{"100%", 1.0, {}}}));
    std::ostringstream out;
    write_chart_data(report, out);
    const auto lines = lines_of(out.str());
    CHECK(lines[0] == "scenario,metric,value");
    for (std::size_t k = 1; k < lines.size(); ++k) {
        CHECK(std::count(lines[k].begin(), lines[k].end(), ',') == 2);
    }
    CHECK(std::find(lines.begin(), lines.end(), "100%,v_rank_pct,90") != lines.end());
}
