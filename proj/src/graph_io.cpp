#include "jtms/graph_io.hpp"

#include <stdexcept>

#include "jtms/text.hpp"

namespace jtms {

namespace {

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
    throw std::invalid_argument("line " + std::to_string(line) + ": " + what);
}

EdgeClass class_from_token(std::string_view tok, std::size_t line) {
    if (tok == "HH") return EdgeClass::HighHigh;
    if (tok == "LL") return EdgeClass::LowLow;
    if (tok == "HL") return EdgeClass::HighLow;
    parse_error(line, "unknown edge class '" + std::string(tok) + "'");
}

}  // namespace

std::string dump_graph(const JointGraph& g) {
    std::string out = "jtms-graph 1\n";
    out += "n " + std::to_string(g.high_count()) + " " + std::to_string(g.low_count()) + "\n";
    for (const EdgeRef& e : g.edges()) {
        out += "e " + std::to_string(e.u) + " " + std::to_string(e.v) + " " +
               to_string(e.cls) + " " + format_double(e.cut_cost) + "\n";
    }
    return out;
}

JointGraph parse_graph(std::string_view text) {
    LineReader reader(text);
    std::string_view line;
    if (!reader.next(line) || line != "jtms-graph 1")
        parse_error(reader.line_number() == 0 ? 1 : reader.line_number(),
                    "expected header 'jtms-graph 1'");

    if (!reader.next(line)) parse_error(reader.line_number(), "missing node count record");
    auto fields = split_fields(line);
    if (fields.size() != 3 || fields[0] != "n")
        parse_error(reader.line_number(), "expected 'n <high> <low>'");
    const auto ctx = [&] { return "line " + std::to_string(reader.line_number()); };
    const long long high = parse_int(fields[1], ctx());
    const long long low = parse_int(fields[2], ctx());
    if (high < 0 || low < 0 || high + low > 0xffffffffLL)
        parse_error(reader.line_number(), "node counts out of range");

    std::vector<EdgeRef> edges;
    while (reader.next(line)) {
        fields = split_fields(line);
        if (fields.size() != 5 || fields[0] != "e")
            parse_error(reader.line_number(), "expected 'e <u> <v> <class> <cost>'");
        const long long u = parse_int(fields[1], ctx());
        const long long v = parse_int(fields[2], ctx());
        if (u < 0 || v < 0 || u > 0xffffffffLL || v > 0xffffffffLL)
            parse_error(reader.line_number(), "endpoint out of range");
        EdgeRef e;
        e.u = static_cast<std::uint32_t>(u);
        e.v = static_cast<std::uint32_t>(v);
        e.cls = class_from_token(fields[3], reader.line_number());
        e.cut_cost = parse_double(fields[4], ctx());
        edges.push_back(e);
    }
    return build_graph(static_cast<std::size_t>(high), static_cast<std::size_t>(low),
                       std::move(edges));
}

std::string dump_solution(const Decomposition& d) {
    std::string out = "jtms-sol 1\n";
    for (std::size_t i = 0; i < d.size(); ++i)
        out += "c " + std::to_string(i) + " " + std::to_string(d.component_of[i]) + "\n";
    return out;
}

Decomposition parse_solution(std::string_view text) {
    LineReader reader(text);
    std::string_view line;
    if (!reader.next(line) || line != "jtms-sol 1")
        parse_error(reader.line_number() == 0 ? 1 : reader.line_number(),
                    "expected header 'jtms-sol 1'");
    std::vector<std::pair<std::size_t, std::uint32_t>> entries;
    std::size_t max_node = 0;
    while (reader.next(line)) {
        auto fields = split_fields(line);
        if (fields.size() != 3 || fields[0] != "c")
            parse_error(reader.line_number(), "expected 'c <node> <component>'");
        const auto ctx = "line " + std::to_string(reader.line_number());
        std::size_t node = static_cast<std::size_t>(parse_int(fields[1], ctx));
        std::uint32_t comp = static_cast<std::uint32_t>(parse_int(fields[2], ctx));
        entries.emplace_back(node, comp);
        max_node = std::max(max_node, node);
    }
    Decomposition d;
    if (entries.empty()) return d;
    constexpr std::uint32_t kUnset = 0xffffffffu;
    d.component_of.assign(max_node + 1, kUnset);
    for (auto [node, comp] : entries) d.component_of[node] = comp;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d.component_of[i] == kUnset)
            throw std::invalid_argument("solution is missing node " + std::to_string(i));
    return d;
}

JointGraph read_graph_file(const std::string& path) {
    return parse_graph(read_text_file(path));
}

void write_graph_file(const std::string& path, const JointGraph& g) {
    write_text_file(path, dump_graph(g));
}

Decomposition read_solution_file(const std::string& path) {
    return parse_solution(read_text_file(path));
}

void write_solution_file(const std::string& path, const Decomposition& d) {
    write_text_file(path, dump_solution(d));
}

}  // namespace jtms
