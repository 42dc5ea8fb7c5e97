#pragma once

#include <cstdio>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "analysis.hpp"
#include "graph.hpp"

namespace agr {

// Display conventions: weights 2 dp, risks 4 dp with trailing zeros trimmed
// ("0.036 × C"), probabilities in shortest round-trip form. Computation is
// always at full precision; these are presentation only.

inline std::string format_fixed(double x, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
    return buf;
}

inline std::string format_weight(double w) { return format_fixed(w, 2); }

inline std::string format_probability(double p) { return nlohmann::json(p).dump(); }

inline std::string format_coefficient(double c) {
    std::string s = format_fixed(c, 4);
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
}

inline std::string format_risk(double coefficient, std::optional<double> value) {
    std::string s = format_coefficient(coefficient) + " × C";
    if (value) s += " = " + format_fixed(*value, 2);
    return s;
}

inline std::string join_path(const std::vector<std::string>& ids, std::string_view sep = " -> ") {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out += sep;
        out += ids[i];
    }
    return out;
}

namespace detail {

/// Number of code points, so columns line up around "×".
inline std::size_t display_width(std::string_view s) {
    std::size_t n = 0;
    for (unsigned char c : s) {
        if ((c & 0xC0) != 0x80) ++n;
    }
    return n;
}

inline std::string render_table(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width;
    for (const auto& row : rows) {
        if (width.size() < row.size()) width.resize(row.size(), 0);
        for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], display_width(row[i]));
    }
    std::string out;
    for (const auto& row : rows) {
        std::string line;
        for (std::size_t i = 0; i < row.size(); ++i) {
            line += row[i];
            if (i + 1 < row.size()) line += std::string(width[i] - display_width(row[i]) + 2, ' ');
        }
        out += line + "\n";
    }
    return out;
}

}  // namespace detail

/// Edge table in the horizontal layout: one column per edge.
inline std::string render_edge_table(const AttackGraph& graph) {
    std::vector<std::vector<std::string>> rows(3);
    rows[0].push_back("Edges");
    rows[1].push_back("Probability");
    rows[2].push_back("Weight");
    for (const auto& e : graph.edges()) {
        rows[0].push_back(e.from + e.to);
        rows[1].push_back(format_probability(e.probability));
        rows[2].push_back(format_weight(e.weight));
    }
    return detail::render_table(rows);
}

inline std::string render_report_text(const RiskReport& report) {
    std::ostringstream out;
    out << "Attack paths from " << report.start << " to " << report.target << ": " << report.paths.size()
        << (report.paths.size() == 1 ? " path" : " paths") << "\n";
    if (report.unreachable) {
        out << "(no attack path: " << report.target << " is unreachable from " << report.start << ")\n";
        return out.str();
    }
    std::vector<std::vector<std::string>> rows{{"#", "Attack path", "Hop length", "Cumulative weight", "Cumulative risk"}};
    for (std::size_t i = 0; i < report.paths.size(); ++i) {
        const auto& rp = report.paths[i];
        std::string rank = std::to_string(i + 1);
        if (report.shortest == i) rank += " *";
        rows.push_back({rank, join_path(rp.path.vertices), std::to_string(rp.path.hop_length),
                        format_weight(rp.path.cumulative_weight), format_risk(rp.risk_coefficient, rp.risk_value)});
    }
    out << detail::render_table(rows);
    if (report.shortest_path) {
        out << "* shortest attack path (lowest cumulative weight): " << join_path(report.shortest_path->vertices)
            << ", weight " << format_weight(report.shortest_path->cumulative_weight) << ", "
            << report.shortest_path->hop_length << " hops\n";
    }
    if (report.most_probable && report.most_probable != report.shortest) {
        out << "note: the most probable path differs from the shortest path: "
            << join_path(report.paths[*report.most_probable].path.vertices) << "\n";
    }
    if (report.truncated_by_paths) out << "warning: enumeration stopped at the max-paths limit\n";
    if (report.truncated_by_hops) out << "warning: paths longer than the max-hops limit were skipped\n";
    return out.str();
}

inline nlohmann::json to_json(const AttackPath& p) {
    return {{"vertices", p.vertices},
            {"hop_length", p.hop_length},
            {"cumulative_weight", p.cumulative_weight},
            {"success_probability", p.success_probability}};
}

inline AttackPath attack_path_from_json(const nlohmann::json& j) {
    AttackPath p;
    p.vertices = j.at("vertices").get<std::vector<std::string>>();
    p.hop_length = j.at("hop_length").get<std::size_t>();
    p.cumulative_weight = j.at("cumulative_weight").get<double>();
    p.success_probability = j.at("success_probability").get<double>();
    return p;
}

inline nlohmann::json to_json(const RiskReport& report) {
    using nlohmann::json;
    auto opt = [](const auto& o) -> json { return o ? json(*o) : json(nullptr); };
    json paths = json::array();
    for (std::size_t i = 0; i < report.paths.size(); ++i) {
        const auto& rp = report.paths[i];
        json item = to_json(rp.path);
        item["rank"] = i + 1;
        item["risk_coefficient"] = rp.risk_coefficient;
        item["risk_value"] = opt(rp.risk_value);
        item["shortest"] = report.shortest == i;
        item["display"] = {{"cumulative_weight", format_weight(rp.path.cumulative_weight)},
                           {"risk", format_risk(rp.risk_coefficient, rp.risk_value)}};
        paths.push_back(std::move(item));
    }
    return {{"start", report.start},
            {"target", report.target},
            {"consequence_cost", opt(report.consequence_cost)},
            {"unreachable", report.unreachable},
            {"truncated", {{"paths", report.truncated_by_paths}, {"hops", report.truncated_by_hops}}},
            {"shortest", opt(report.shortest)},
            {"most_probable", opt(report.most_probable)},
            {"max_probability_differs", report.most_probable.has_value() && report.most_probable != report.shortest},
            {"max_risk_coefficient", report.max_risk_coefficient()},
            {"shortest_path", report.shortest_path ? to_json(*report.shortest_path) : json(nullptr)},
            {"paths", std::move(paths)}};
}

inline RiskReport risk_report_from_json(const nlohmann::json& j) {
    auto opt_size = [](const nlohmann::json& v) -> std::optional<std::size_t> {
        if (v.is_null()) return std::nullopt;
        return v.get<std::size_t>();
    };
    auto opt_double = [](const nlohmann::json& v) -> std::optional<double> {
        if (v.is_null()) return std::nullopt;
        return v.get<double>();
    };
    RiskReport r;
    r.start = j.at("start").get<std::string>();
    r.target = j.at("target").get<std::string>();
    r.consequence_cost = opt_double(j.at("consequence_cost"));
    r.unreachable = j.at("unreachable").get<bool>();
    r.truncated_by_paths = j.at("truncated").at("paths").get<bool>();
    r.truncated_by_hops = j.at("truncated").at("hops").get<bool>();
    r.shortest = opt_size(j.at("shortest"));
    r.most_probable = opt_size(j.at("most_probable"));
    if (!j.at("shortest_path").is_null()) r.shortest_path = attack_path_from_json(j.at("shortest_path"));
    for (const auto& item : j.at("paths")) {
        r.paths.push_back({attack_path_from_json(item), item.at("risk_coefficient").get<double>(),
                           opt_double(item.at("risk_value"))});
    }
    return r;
}

inline std::string render_paths_text(const std::string& start, const std::string& target,
                                     const PathEnumeration& found) {
    std::ostringstream out;
    out << "Simple attack paths from " << start << " to " << target << ": " << found.paths.size() << "\n";
    std::vector<std::vector<std::string>> rows{{"#", "Attack path", "Hop length", "Cumulative weight", "Probability"}};
    for (std::size_t i = 0; i < found.paths.size(); ++i) {
        const auto& p = found.paths[i];
        rows.push_back({std::to_string(i + 1), join_path(p.vertices), std::to_string(p.hop_length),
                        format_weight(p.cumulative_weight), format_coefficient(p.success_probability)});
    }
    out << detail::render_table(rows);
    if (found.truncated_by_paths) out << "warning: enumeration stopped at the max-paths limit\n";
    if (found.truncated_by_hops) out << "warning: paths longer than the max-hops limit were skipped\n";
    return out.str();
}

inline nlohmann::json to_json(const PathEnumeration& found) {
    nlohmann::json paths = nlohmann::json::array();
    for (const auto& p : found.paths) paths.push_back(to_json(p));
    return {{"paths", std::move(paths)},
            {"truncated", {{"paths", found.truncated_by_paths}, {"hops", found.truncated_by_hops}}}};
}

inline std::string render_shortest_text(const std::string& start, const std::string& target, const AttackPath& p) {
    std::ostringstream out;
    out << "Shortest attack path from " << start << " to " << target << "\n"
        << "path: " << join_path(p.vertices) << "\n"
        << "hop length: " << p.hop_length << "\n"
        << "cumulative weight: " << format_weight(p.cumulative_weight) << "\n"
        << "risk: " << format_risk(p.success_probability, std::nullopt) << "\n";
    return out.str();
}

inline std::string render_propagation_text(const AttackGraph& graph, const PropagationResult& r) {
    std::ostringstream out;
    out << "Propagation from " << r.start << ": " << r.visited.size() << " of " << graph.vertex_count()
        << " vertices reached\n"
        << "visited: " << join_path(r.visited, ", ") << "\n"
        << "tree edges:\n";
    for (const auto& [a, b] : r.tree_edges) out << "  " << a << " -> " << b << "\n";
    return out.str();
}

inline nlohmann::json to_json(const PropagationResult& r) {
    nlohmann::json tree = nlohmann::json::array();
    for (const auto& [a, b] : r.tree_edges) tree.push_back({a, b});
    return {{"start", r.start}, {"visited", r.visited}, {"tree_edges", std::move(tree)}};
}

/// Graph as served to UIs: the re-ingestable spec plus derived per-vertex
/// degrees and per-edge weights.
inline nlohmann::json graph_view_json(const AttackGraph& graph) {
    using nlohmann::json;
    auto degrees = degree_profile(graph);
    json vertices = json::array();
    for (const auto& v : graph.vertices()) {
        const Degree& d = degrees.at(v.id);
        json item = {{"id", v.id},
                     {"kind", std::string(to_string(v.kind))},
                     {"label", v.label},
                     {"taxonomy", v.taxonomy_tags},
                     {"in_degree", d.in},
                     {"out_degree", d.out}};
        if (auto c = graph.consequence_cost(v.id)) item["cost"] = *c;
        vertices.push_back(std::move(item));
    }
    json edges = json::array();
    for (const auto& e : graph.edges()) {
        json item = {{"from", e.from},
                     {"to", e.to},
                     {"probability", e.probability},
                     {"weight", e.weight},
                     {"display", {{"probability", format_probability(e.probability)}, {"weight", format_weight(e.weight)}}}};
        if (e.metrics) {
            item["metrics"] = {{"av", e.metrics->av}, {"ac", e.metrics->ac}, {"pr", e.metrics->pr},
                               {"ui", e.metrics->ui}, {"rl", e.metrics->rl}};
        }
        edges.push_back(std::move(item));
    }
    return {{"vertex_count", graph.vertex_count()},
            {"edge_count", graph.edge_count()},
            {"vertices", std::move(vertices)},
            {"edges", std::move(edges)},
            {"spec", to_spec_json(graph)}};
}

// ---- DOT -------------------------------------------------------------------

inline std::string dot_quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out += c;
    }
    return out + "\"";
}

inline std::string_view dot_shape(VertexKind kind) {
    switch (kind) {
        case VertexKind::attack_vector: return "diamond";
        case VertexKind::location: return "box";
        case VertexKind::consequence: return "ellipse";
    }
    return "ellipse";
}

struct DotOptions {
    /// Vertex sequence whose edges get the highlight attributes.
    std::optional<std::vector<std::string>> highlight_path;
};

inline std::string render_dot(const AttackGraph& graph, const DotOptions& options = {}) {
    std::set<std::pair<std::string, std::string>> hot_edges;
    std::set<std::string> hot_nodes;
    if (options.highlight_path) {
        const auto& p = *options.highlight_path;
        for (std::size_t i = 0; i < p.size(); ++i) {
            hot_nodes.insert(p[i]);
            if (i + 1 < p.size()) hot_edges.emplace(p[i], p[i + 1]);
        }
    }
    std::ostringstream out;
    out << "digraph attack_graph {\n"
        << "  rankdir=LR;\n"
        << "  node [fontname=\"Helvetica\"];\n";
    for (const auto& v : graph.vertices()) {
        std::string label = v.label == v.id ? v.id : v.id + "\n" + v.label;
        out << "  " << dot_quote(v.id) << " [label=" << dot_quote(label) << ", shape=" << dot_shape(v.kind);
        if (hot_nodes.count(v.id)) out << ", color=\"red\", penwidth=2";
        out << "];\n";
    }
    for (const auto& e : graph.edges()) {
        out << "  " << dot_quote(e.from) << " -> " << dot_quote(e.to)
            << " [label=" << dot_quote(format_probability(e.probability));
        if (hot_edges.count({e.from, e.to})) out << ", class=\"highlight\", color=\"red\", penwidth=2.5";
        out << "];\n";
    }
    out << "}\n";
    return out.str();
}

/// Propagation view: the start vertex drawn as a star, reached vertices
/// filled, discovery edges dashed and unexplored edges solid.
inline std::string render_propagation_dot(const AttackGraph& graph, const PropagationResult& r) {
    std::set<std::string> reached(r.visited.begin(), r.visited.end());
    std::set<std::pair<std::string, std::string>> tree(r.tree_edges.begin(), r.tree_edges.end());
    std::ostringstream out;
    out << "digraph propagation {\n"
        << "  rankdir=LR;\n"
        << "  node [fontname=\"Helvetica\"];\n";
    for (const auto& v : graph.vertices()) {
        out << "  " << dot_quote(v.id) << " [label=" << dot_quote(v.id) << ", shape="
            << (v.id == r.start ? std::string_view("star") : dot_shape(v.kind));
        if (reached.count(v.id)) out << ", style=filled, fillcolor=\"lightgrey\"";
        out << "];\n";
    }
    for (const auto& e : graph.edges()) {
        out << "  " << dot_quote(e.from) << " -> " << dot_quote(e.to)
            << " [style=" << (tree.count({e.from, e.to}) ? "dashed" : "solid") << "];\n";
    }
    out << "}\n";
    return out.str();
}

}  // namespace agr
