#include "gridstress/case_io.hpp"

#include "gridstress/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace gridstress {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

// Strips a trailing '%' comment, ignoring '%' inside single quotes.
std::string_view strip_comment(std::string_view line)
{
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '\'') {
            quoted = !quoted;
        } else if (line[i] == '%' && !quoted) {
            return line.substr(0, i);
        }
    }
    return line;
}

double parse_number(std::string_view token, std::size_t line)
{
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (!token.empty() && *first == '+') {
        ++first;
    }
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        if (token == "Inf" || token == "inf") {
            return std::numeric_limits<double>::infinity();
        }
        throw ParseError(line, "malformed table row: '" + std::string(token) + "' is not a number");
    }
    return value;
}

struct Row {
    std::size_t line = 0;
    std::vector<double> values;
};

struct MatpowerSections {
    std::optional<double> base_mva;
    std::size_t base_line = 0;
    std::map<std::string, std::vector<Row>> tables;
    std::map<std::string, std::size_t> table_lines;
    std::vector<std::string> bus_names;
};

void split_row(std::string_view content, std::size_t line, std::vector<Row>& rows, Row& pending)
{
    std::size_t i = 0;
    while (i < content.size()) {
        const char c = content[i];
        if (c == ';') {
            if (!pending.values.empty()) {
                rows.push_back(std::move(pending));
            }
            pending = Row{};
            ++i;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < content.size() && content[j] != ';' && content[j] != ',' &&
               !std::isspace(static_cast<unsigned char>(content[j]))) {
            ++j;
        }
        if (pending.values.empty()) {
            pending.line = line;
        }
        pending.values.push_back(parse_number(content.substr(i, j - i), line));
        i = j;
    }
}

MatpowerSections scan_matpower(std::string_view text)
{
    MatpowerSections out;
    enum class Mode { Top, Matrix, Cell } mode = Mode::Top;
    std::string current;
    Row pending;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) {
            eol = text.size();
        }
        ++line_no;
        std::string_view line = trim(strip_comment(text.substr(pos, eol - pos)));
        pos = eol + 1;

        if (mode == Mode::Top) {
            if (!line.starts_with("mpc.")) {
                continue;
            }
            auto eq = line.find('=');
            if (eq == std::string_view::npos) {
                continue;
            }
            std::string name(trim(line.substr(4, eq - 4)));
            std::string_view rhs = trim(line.substr(eq + 1));
            if (name == "baseMVA") {
                if (!rhs.empty() && rhs.back() == ';') {
                    rhs.remove_suffix(1);
                }
                out.base_mva = parse_number(trim(rhs), line_no);
                out.base_line = line_no;
            } else if (!rhs.empty() && rhs.front() == '[') {
                current = name;
                out.tables[current];
                out.table_lines[current] = line_no;
                mode = Mode::Matrix;
                rhs.remove_prefix(1);
                line = rhs;
            } else if (!rhs.empty() && rhs.front() == '{' && name == "bus_name") {
                mode = Mode::Cell;
                line = rhs.substr(1);
            } else {
                continue;
            }
        }

        if (mode == Mode::Matrix) {
            auto close = line.find(']');
            std::string_view body = close == std::string_view::npos ? line : line.substr(0, close);
            split_row(body, line_no, out.tables[current], pending);
            if (close != std::string_view::npos) {
                if (!pending.values.empty()) {
                    out.tables[current].push_back(std::move(pending));
                }
                pending = Row{};
                mode = Mode::Top;
            }
        } else if (mode == Mode::Cell) {
            std::size_t i = 0;
            while (i < line.size()) {
                if (line[i] == '}') {
                    mode = Mode::Top;
                    break;
                }
                if (line[i] == '\'') {
                    auto end = line.find('\'', i + 1);
                    if (end == std::string_view::npos) {
                        throw ParseError(line_no, "unterminated bus name");
                    }
                    out.bus_names.emplace_back(trim(line.substr(i + 1, end - i - 1)));
                    i = end + 1;
                    continue;
                }
                ++i;
            }
        }
    }
    if (mode != Mode::Top) {
        throw ParseError(line_no, "unterminated section '" + current + "'");
    }
    return out;
}

const std::vector<Row>& require_table(const MatpowerSections& s, const std::string& name)
{
    auto it = s.tables.find(name);
    if (it == s.tables.end()) {
        throw ParseError(0, "missing mpc." + name + " section");
    }
    return it->second;
}

void require_columns(const Row& row, std::size_t n, const char* table)
{
    if (row.values.size() < n) {
        throw ParseError(row.line, std::string("malformed ") + table + " row: expected at least " +
                                       std::to_string(n) + " columns, found " + std::to_string(row.values.size()));
    }
}

int as_id(double v, std::size_t line, const char* what)
{
    if (v != static_cast<double>(static_cast<int>(v))) {
        throw ParseError(line, std::string("malformed table row: ") + what + " must be an integer");
    }
    return static_cast<int>(v);
}

}  // namespace

Network parse_matpower(std::string_view text, const ParseOptions& options)
{
    const MatpowerSections s = scan_matpower(text);
    if (!s.base_mva) {
        throw ParseError(0, "missing mpc.baseMVA");
    }
    Network net;
    net.base_mva = *s.base_mva;
    if (!(net.base_mva > 0.0)) {
        throw ParseError(s.base_line, "baseMVA must be positive");
    }

    const auto& bus_rows = require_table(s, "bus");
    std::set<int> bus_ids;
    std::vector<std::size_t> slack_lines;
    for (const auto& row : bus_rows) {
        require_columns(row, 3, "bus");
        Bus bus;
        bus.id = BusId{as_id(row.values[0], row.line, "bus id")};
        bus.load_mw = row.values[2];
        if (!bus_ids.insert(bus.id.value).second) {
            throw ParseError(row.line, "duplicate bus id " + std::to_string(bus.id.value));
        }
        if (as_id(row.values[1], row.line, "bus type") == 3) {
            net.slack_bus = bus.id;
            slack_lines.push_back(row.line);
        }
        net.buses.push_back(std::move(bus));
    }
    if (slack_lines.size() != 1) {
        throw ParseError(slack_lines.empty() ? s.table_lines.at("bus") : slack_lines[1],
                         "expected exactly one reference (type 3) bus, found " + std::to_string(slack_lines.size()));
    }
    if (!s.bus_names.empty()) {
        if (s.bus_names.size() != net.buses.size()) {
            throw ParseError(0, "bus_name has " + std::to_string(s.bus_names.size()) + " entries for " +
                                    std::to_string(net.buses.size()) + " buses");
        }
        for (std::size_t i = 0; i < net.buses.size(); ++i) {
            net.buses[i].name = s.bus_names[i];
        }
    }

    for (const auto& row : require_table(s, "gen")) {
        require_columns(row, 9, "gen");
        if (row.values[7] <= 0.0) {
            continue;  // out of service
        }
        Generator gen;
        gen.bus = BusId{as_id(row.values[0], row.line, "generator bus")};
        gen.output_mw = row.values[1];
        gen.max_output_mw = row.values[8];
        if (!bus_ids.contains(gen.bus.value)) {
            throw ParseError(row.line, "generator references unknown bus " + std::to_string(gen.bus.value));
        }
        net.generators.push_back(gen);
    }

    int next_id = 1;
    for (const auto& row : require_table(s, "branch")) {
        require_columns(row, 11, "branch");
        Branch br;
        br.id = BranchId{next_id++};
        br.from_bus = BusId{as_id(row.values[0], row.line, "from bus")};
        br.to_bus = BusId{as_id(row.values[1], row.line, "to bus")};
        br.reactance = row.values[3];
        br.rating_mw = row.values[5] > 0.0 ? row.values[5] : options.unrated_rating_mw;
        br.is_transformer = row.values[8] != 0.0;
        br.in_service = row.values[10] > 0.0;
        if (!bus_ids.contains(br.from_bus.value) || !bus_ids.contains(br.to_bus.value)) {
            throw ParseError(row.line, "branch references unknown bus " +
                                           std::to_string(bus_ids.contains(br.from_bus.value) ? br.to_bus.value
                                                                                               : br.from_bus.value));
        }
        if (br.from_bus == br.to_bus) {
            throw ParseError(row.line, "self-loop branch at bus " + std::to_string(br.from_bus.value));
        }
        if (br.reactance == 0.0) {
            throw ParseError(row.line, "zero reactance on branch " + std::to_string(br.from_bus.value) + "-" +
                                           std::to_string(br.to_bus.value));
        }
        net.branches.push_back(br);
    }

    validate(net);
    return net;
}

namespace {

std::size_t line_of_offset(std::string_view text, std::size_t byte)
{
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

template <class T>
T field(const json& obj, const char* key, const std::string& where)
{
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw ParseError(0, where + ": missing field '" + key + "'");
    }
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ParseError(0, where + ": field '" + key + "' has the wrong type");
    }
}

template <class T>
T field_or(const json& obj, const char* key, T fallback, const std::string& where)
{
    return obj.contains(key) ? field<T>(obj, key, where) : fallback;
}

}  // namespace

Network parse_json_case(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(line_of_offset(text, e.byte), std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ParseError(1, "case document must be a JSON object");
    }
    if (doc.contains("format") && doc["format"] != "gridstress-case") {
        throw ParseError(0, "unsupported case format " + doc["format"].dump());
    }
    if (field_or<int>(doc, "version", 1, "case") != 1) {
        throw ParseError(0, "unsupported case schema version");
    }

    Network net;
    net.base_mva = field<double>(doc, "base_mva", "case");
    net.slack_bus = BusId{field<int>(doc, "slack_bus", "case")};

    std::set<int> bus_ids;
    const auto buses = field<json>(doc, "buses", "case");
    for (std::size_t i = 0; i < buses.size(); ++i) {
        const std::string where = "buses[" + std::to_string(i) + "]";
        Bus bus;
        bus.id = BusId{field<int>(buses[i], "id", where)};
        bus.load_mw = field_or<double>(buses[i], "load_mw", 0.0, where);
        bus.name = field_or<std::string>(buses[i], "name", "", where);
        if (!bus_ids.insert(bus.id.value).second) {
            throw ParseError(0, where + ": duplicate bus id " + std::to_string(bus.id.value));
        }
        net.buses.push_back(std::move(bus));
    }

    const auto branches = field<json>(doc, "branches", "case");
    for (std::size_t k = 0; k < branches.size(); ++k) {
        const std::string where = "branches[" + std::to_string(k) + "]";
        Branch br;
        br.id = BranchId{field<int>(branches[k], "id", where)};
        br.from_bus = BusId{field<int>(branches[k], "from", where)};
        br.to_bus = BusId{field<int>(branches[k], "to", where)};
        br.reactance = field<double>(branches[k], "reactance", where);
        br.rating_mw = field<double>(branches[k], "rating_mw", where);
        br.in_service = field_or<bool>(branches[k], "in_service", true, where);
        br.is_transformer = field_or<bool>(branches[k], "transformer", false, where);
        if (!bus_ids.contains(br.from_bus.value) || !bus_ids.contains(br.to_bus.value)) {
            throw ParseError(0, where + ": branch references unknown bus");
        }
        if (br.from_bus == br.to_bus) {
            throw ParseError(0, where + ": self-loop branch");
        }
        if (br.reactance == 0.0) {
            throw ParseError(0, where + ": zero reactance");
        }
        net.branches.push_back(br);
    }

    const auto gens = field_or<json>(doc, "generators", json::array(), "case");
    for (std::size_t g = 0; g < gens.size(); ++g) {
        const std::string where = "generators[" + std::to_string(g) + "]";
        Generator gen;
        gen.bus = BusId{field<int>(gens[g], "bus", where)};
        gen.output_mw = field<double>(gens[g], "output_mw", where);
        gen.max_output_mw = field<double>(gens[g], "max_output_mw", where);
        net.generators.push_back(gen);
    }

    validate(net);
    return net;
}

std::string to_json_case(const Network& net)
{
    ordered_json doc;
    doc["format"] = "gridstress-case";
    doc["version"] = 1;
    doc["base_mva"] = net.base_mva;
    doc["slack_bus"] = net.slack_bus.value;
    doc["buses"] = ordered_json::array();
    for (const auto& bus : net.buses) {
        ordered_json b;
        b["id"] = bus.id.value;
        b["load_mw"] = bus.load_mw;
        b["name"] = bus.name;
        doc["buses"].push_back(std::move(b));
    }
    doc["branches"] = ordered_json::array();
    for (const auto& br : net.branches) {
        ordered_json b;
        b["id"] = br.id.value;
        b["from"] = br.from_bus.value;
        b["to"] = br.to_bus.value;
        b["reactance"] = br.reactance;
        b["rating_mw"] = br.rating_mw;
        b["in_service"] = br.in_service;
        b["transformer"] = br.is_transformer;
        doc["branches"].push_back(std::move(b));
    }
    doc["generators"] = ordered_json::array();
    for (const auto& gen : net.generators) {
        ordered_json g;
        g["bus"] = gen.bus.value;
        g["output_mw"] = gen.output_mw;
        g["max_output_mw"] = gen.max_output_mw;
        doc["generators"].push_back(std::move(g));
    }
    return doc.dump(2) + "\n";
}

Network parse_case(std::string_view text, const ParseOptions& options)
{
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text[first] == '{') {
        return parse_json_case(text);
    }
    return parse_matpower(text, options);
}

std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::Io, "cannot read " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Network load_case_file(const std::filesystem::path& path, const ParseOptions& options)
{
    return parse_case(read_text_file(path), options);
}

}  // namespace gridstress
