#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "catalog.hpp"
#include "error.hpp"
#include "model.hpp"

namespace agr {

namespace detail {

/// Shortest round-trip text for a number in messages.
inline std::string show(double x) {
    if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
    return nlohmann::json(x).dump();
}

}  // namespace detail

/// Probability that an attack vector compromises a location:
/// av * ac * pr * ui / rl.
inline double exploitation_probability(const ExploitMetrics& m) {
    auto unit = [](double x) { return std::isfinite(x) && x > 0.0 && x <= 1.0; };
    if (!unit(m.av)) throw DomainError("metric av must be in (0, 1], got " + detail::show(m.av));
    if (!unit(m.ac)) throw DomainError("metric ac must be in (0, 1], got " + detail::show(m.ac));
    if (!unit(m.pr)) throw DomainError("metric pr must be in (0, 1], got " + detail::show(m.pr));
    if (!unit(m.ui)) throw DomainError("metric ui must be in (0, 1], got " + detail::show(m.ui));
    if (!std::isfinite(m.rl) || m.rl < 1.0) throw DomainError("metric rl must be >= 1, got " + detail::show(m.rl));
    return m.av * m.ac * m.pr * m.ui / m.rl;
}

inline bool valid_probability(double p) noexcept { return std::isfinite(p) && p > 0.0 && p <= 1.0; }

/// Edge weight is the reciprocal of the edge probability. Zero probability is
/// rejected: an impossible step is modelled by omitting the edge.
inline double edge_weight(double probability) {
    if (probability == 0.0) {
        throw DomainError("probability 0 is not a valid edge; omit the edge to model an impossible step");
    }
    if (!valid_probability(probability)) {
        throw DomainError("probability must be in (0, 1], got " + detail::show(probability));
    }
    return 1.0 / probability;
}

struct Degree {
    std::size_t in = 0;
    std::size_t out = 0;

    friend bool operator==(const Degree&, const Degree&) = default;
};

/// Weighted directed attack graph over attack vectors, locations and
/// consequences. Immutable once built; adjacency lists are sorted by
/// ascending weight, ties broken by destination id.
class AttackGraph {
public:
    struct Arc {
        std::size_t to;
        double weight;
        std::size_t edge;
    };

    AttackGraph() = default;

    std::span<const Vertex> vertices() const noexcept { return vertices_; }
    std::span<const Edge> edges() const noexcept { return edges_; }
    std::size_t vertex_count() const noexcept { return vertices_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    bool allow_direct_consequence() const noexcept { return allow_direct_consequence_; }

    std::optional<std::size_t> index_of(std::string_view id) const {
        auto it = index_.find(std::string(id));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    const Vertex* find_vertex(std::string_view id) const {
        auto i = index_of(id);
        return i ? &vertices_[*i] : nullptr;
    }

    const Vertex& vertex(std::size_t i) const { return vertices_.at(i); }

    std::span<const Arc> adjacency(std::size_t i) const { return adjacency_.at(i); }

    const Edge* find_edge(std::string_view from, std::string_view to) const {
        auto f = index_of(from);
        auto t = index_of(to);
        if (!f || !t) return nullptr;
        for (const Arc& a : adjacency_[*f]) {
            if (a.to == *t) return &edges_[a.edge];
        }
        return nullptr;
    }

    std::size_t count(VertexKind kind) const {
        return static_cast<std::size_t>(
            std::count_if(vertices_.begin(), vertices_.end(), [kind](const Vertex& v) { return v.kind == kind; }));
    }

    /// Monetary cost attached to a consequence; nullopt means symbolic.
    std::optional<double> consequence_cost(std::string_view id) const {
        auto it = costs_.find(std::string(id));
        if (it == costs_.end()) return std::nullopt;
        return it->second;
    }

    const std::map<std::string, double>& consequence_costs() const noexcept { return costs_; }

    friend bool operator==(const AttackGraph& a, const AttackGraph& b) {
        return a.allow_direct_consequence_ == b.allow_direct_consequence_ && a.vertices_ == b.vertices_ &&
               a.edges_ == b.edges_ && a.costs_ == b.costs_;
    }

    /// Builds the index and the sorted adjacency. Inputs must already be
    /// validated; build_graph() and apply_update() are the public entry points.
    static AttackGraph assemble(std::vector<Vertex> vertices, std::vector<Edge> edges,
                                std::map<std::string, double> costs, bool allow_direct_consequence) {
        AttackGraph g;
        g.vertices_ = std::move(vertices);
        g.edges_ = std::move(edges);
        g.costs_ = std::move(costs);
        g.allow_direct_consequence_ = allow_direct_consequence;
        for (std::size_t i = 0; i < g.vertices_.size(); ++i) g.index_.emplace(g.vertices_[i].id, i);
        g.adjacency_.assign(g.vertices_.size(), {});
        for (std::size_t e = 0; e < g.edges_.size(); ++e) {
            const Edge& edge = g.edges_[e];
            g.adjacency_[g.index_.at(edge.from)].push_back({g.index_.at(edge.to), edge.weight, e});
        }
        for (auto& list : g.adjacency_) {
            std::sort(list.begin(), list.end(), [&g](const Arc& a, const Arc& b) {
                if (a.weight != b.weight) return a.weight < b.weight;
                return g.vertices_[a.to].id < g.vertices_[b.to].id;
            });
        }
        return g;
    }

private:
    std::vector<Vertex> vertices_;
    std::vector<Edge> edges_;
    std::map<std::string, double> costs_;
    bool allow_direct_consequence_ = false;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::vector<Arc>> adjacency_;
};

inline bool kind_pair_allowed(VertexKind from, VertexKind to, bool allow_direct_consequence) noexcept {
    if (from == VertexKind::attack_vector && to == VertexKind::location) return true;
    if (from == VertexKind::location && to == VertexKind::location) return true;
    if (from == VertexKind::location && to == VertexKind::consequence) return true;
    return allow_direct_consequence && from == VertexKind::attack_vector && to == VertexKind::consequence;
}

namespace detail {

struct RawEdge {
    std::string from;
    std::string to;
    std::optional<double> probability;
    std::optional<ExploitMetrics> metrics;
};

inline void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<std::string_view> allowed,
                                const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ParseError("unknown key '" + key + "' in " + where);
        }
    }
}

inline std::string require_string(const nlohmann::json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw ParseError(std::string("missing '") + key + "' in " + where);
    if (!obj.at(key).is_string()) throw ParseError(std::string("'") + key + "' must be a string in " + where);
    return obj.at(key).get<std::string>();
}

inline double require_number(const nlohmann::json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw ParseError(std::string("missing '") + key + "' in " + where);
    if (!obj.at(key).is_number()) throw ParseError(std::string("'") + key + "' must be a number in " + where);
    return obj.at(key).get<double>();
}

inline ExploitMetrics parse_metrics(const nlohmann::json& obj, const std::string& where) {
    if (!obj.is_object()) throw ParseError("'metrics' must be an object in " + where);
    reject_unknown_keys(obj, {"av", "ac", "pr", "ui", "rl"}, "metrics of " + where);
    return {require_number(obj, "av", where), require_number(obj, "ac", where), require_number(obj, "pr", where),
            require_number(obj, "ui", where), require_number(obj, "rl", where)};
}

inline std::vector<Violation> metric_violations(const ExploitMetrics& m, const std::string& subject) {
    std::vector<Violation> out;
    auto unit = [&](double x, const char* name) {
        if (!(std::isfinite(x) && x > 0.0 && x <= 1.0)) {
            out.push_back({"metric_out_of_range", subject,
                           std::string("metric ") + name + " must be in (0, 1], got " + detail::show(x)});
        }
    };
    unit(m.av, "av");
    unit(m.ac, "ac");
    unit(m.pr, "pr");
    unit(m.ui, "ui");
    if (!(std::isfinite(m.rl) && m.rl >= 1.0)) {
        out.push_back({"metric_out_of_range", subject, "metric rl must be >= 1, got " + detail::show(m.rl)});
    }
    return out;
}

inline std::optional<Violation> probability_violation(double p, const std::string& subject) {
    if (p == 0.0) {
        return Violation{"probability_zero", subject,
                         "probability 0 is not allowed; omit the edge to model an impossible step"};
    }
    if (!valid_probability(p)) {
        return Violation{"probability_out_of_range", subject,
                         "probability must be in (0, 1], got " + detail::show(p)};
    }
    return std::nullopt;
}

}  // namespace detail

/// Parse and validate a GraphSpec document. Every violated invariant is
/// collected before throwing ValidationError; structural JSON problems throw
/// ParseError immediately.
inline AttackGraph build_graph(const nlohmann::json& doc, const ThreatCatalog& catalog = builtin_catalog()) {
    using detail::require_string;
    if (!doc.is_object()) throw ParseError("graph spec must be a JSON object");
    detail::reject_unknown_keys(doc, {"allow_direct_consequence", "vertices", "edges"}, "graph spec");

    bool allow_direct = false;
    if (doc.contains("allow_direct_consequence")) {
        if (!doc.at("allow_direct_consequence").is_boolean()) {
            throw ParseError("'allow_direct_consequence' must be a boolean");
        }
        allow_direct = doc.at("allow_direct_consequence").get<bool>();
    }

    auto array_of = [&](const char* key) -> nlohmann::json {
        if (!doc.contains(key)) return nlohmann::json::array();
        if (!doc.at(key).is_array()) throw ParseError(std::string("'") + key + "' must be an array");
        return doc.at(key);
    };

    std::vector<Violation> violations;
    std::vector<Vertex> vertices;
    std::map<std::string, double> costs;
    std::unordered_map<std::string, VertexKind> kinds;

    std::size_t position = 0;
    for (const auto& item : array_of("vertices")) {
        std::string where = "vertex #" + std::to_string(position++);
        if (!item.is_object()) throw ParseError(where + " must be an object");
        detail::reject_unknown_keys(item, {"id", "kind", "label", "taxonomy", "cost"}, where);
        Vertex v;
        v.id = require_string(item, "id", where);
        auto kind = parse_vertex_kind(require_string(item, "kind", where));
        if (!kind) throw ParseError("unknown kind in " + where);
        v.kind = *kind;
        v.label = item.contains("label") ? require_string(item, "label", where) : v.id;
        if (item.contains("taxonomy")) {
            const auto& tags = item.at("taxonomy");
            if (!tags.is_array()) throw ParseError("'taxonomy' must be an array in " + where);
            for (const auto& t : tags) {
                if (!t.is_string()) throw ParseError("taxonomy tags must be strings in " + where);
                v.taxonomy_tags.push_back(t.get<std::string>());
            }
        }
        if (v.id.empty()) {
            violations.push_back({"empty_id", where, "vertex id must be non-empty"});
            continue;
        }
        if (item.contains("cost")) {
            double cost = detail::require_number(item, "cost", where);
            if (v.kind != VertexKind::consequence) {
                violations.push_back({"cost_on_non_consequence", v.id, "only consequence vertices carry a cost"});
            } else if (!std::isfinite(cost) || cost < 0.0) {
                violations.push_back({"cost_out_of_range", v.id, "cost must be a finite non-negative number"});
            } else {
                costs[v.id] = cost;
            }
        }
        if (!kinds.emplace(v.id, v.kind).second) {
            violations.push_back({"duplicate_vertex", v.id, "vertex id declared more than once"});
            continue;
        }
        vertices.push_back(std::move(v));
    }

    std::vector<detail::RawEdge> raw;
    position = 0;
    for (const auto& item : array_of("edges")) {
        std::string where = "edge #" + std::to_string(position++);
        if (!item.is_object()) throw ParseError(where + " must be an object");
        detail::reject_unknown_keys(item, {"from", "to", "probability", "metrics"}, where);
        detail::RawEdge e;
        e.from = require_string(item, "from", where);
        e.to = require_string(item, "to", where);
        if (item.contains("probability")) e.probability = detail::require_number(item, "probability", where);
        if (item.contains("metrics")) e.metrics = detail::parse_metrics(item.at("metrics"), where);
        raw.push_back(std::move(e));
    }

    std::vector<Edge> edges;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& r : raw) {
        const std::string subject = r.from + "->" + r.to;
        bool ok = true;
        auto fk = kinds.find(r.from);
        auto tk = kinds.find(r.to);
        if (fk == kinds.end()) {
            violations.push_back({"unknown_vertex", subject, "edge source '" + r.from + "' is not a vertex"});
            ok = false;
        }
        if (tk == kinds.end()) {
            violations.push_back({"unknown_vertex", subject, "edge target '" + r.to + "' is not a vertex"});
            ok = false;
        }
        if (r.from == r.to) {
            violations.push_back({"self_loop", subject, "self-loops are not allowed"});
            ok = false;
        } else if (ok) {
            if (tk->second == VertexKind::attack_vector) {
                violations.push_back({"attack_vector_in_edge", subject, "attack vectors must have in-degree 0"});
                ok = false;
            } else if (fk->second == VertexKind::consequence) {
                violations.push_back({"consequence_out_edge", subject, "consequences must have out-degree 0"});
                ok = false;
            } else if (!kind_pair_allowed(fk->second, tk->second, allow_direct)) {
                violations.push_back({"forbidden_kind_pair", subject,
                                      std::string(to_string(fk->second)) + " -> " + std::string(to_string(tk->second)) +
                                          " edges are not allowed (set allow_direct_consequence to permit)"});
                ok = false;
            }
        }
        if (!seen.emplace(r.from, r.to).second) {
            violations.push_back({"duplicate_edge", subject, "at most one edge per ordered vertex pair"});
            ok = false;
        }

        double p = 0.0;
        if (r.probability && r.metrics) {
            violations.push_back({"metrics_and_probability", subject, "declare exactly one of probability or metrics"});
            ok = false;
        } else if (!r.probability && !r.metrics) {
            violations.push_back({"missing_probability", subject, "declare exactly one of probability or metrics"});
            ok = false;
        } else if (r.metrics) {
            if (ok && !(fk->second == VertexKind::attack_vector && tk->second == VertexKind::location)) {
                violations.push_back({"metrics_on_non_vector_edge", subject,
                                      "metrics are only valid on attack_vector -> location edges"});
                ok = false;
            }
            auto mv = detail::metric_violations(*r.metrics, subject);
            if (!mv.empty()) {
                violations.insert(violations.end(), mv.begin(), mv.end());
                ok = false;
            } else {
                p = exploitation_probability(*r.metrics);
            }
        } else {
            p = *r.probability;
            if (auto v = detail::probability_violation(p, subject)) {
                violations.push_back(*v);
                ok = false;
            }
        }
        if (ok) edges.push_back({r.from, r.to, p, edge_weight(p), r.metrics});
    }

    for (auto& v : validate_tags(vertices, catalog)) {
        if (v.code == "unresolved_tag") violations.push_back(std::move(v));
    }

    if (!violations.empty()) throw ValidationError(std::move(violations));
    return AttackGraph::assemble(std::move(vertices), std::move(edges), std::move(costs), allow_direct);
}

inline AttackGraph build_graph_text(std::string_view text, const ThreatCatalog& catalog = builtin_catalog()) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("graph spec is not valid JSON: ") + e.what());
    }
    return build_graph(doc, catalog);
}

inline std::vector<Violation> validate_tags(const AttackGraph& graph, const ThreatCatalog& catalog) {
    return validate_tags(graph.vertices(), catalog);
}

/// Serialize back to a GraphSpec document; build_graph(to_spec_json(g)) == g.
inline nlohmann::json to_spec_json(const AttackGraph& graph) {
    nlohmann::json vertices = nlohmann::json::array();
    for (const auto& v : graph.vertices()) {
        nlohmann::json item = {{"id", v.id}, {"kind", std::string(to_string(v.kind))}, {"label", v.label}};
        if (!v.taxonomy_tags.empty()) item["taxonomy"] = v.taxonomy_tags;
        if (auto cost = graph.consequence_cost(v.id)) item["cost"] = *cost;
        vertices.push_back(std::move(item));
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : graph.edges()) {
        nlohmann::json item = {{"from", e.from}, {"to", e.to}};
        if (e.metrics) {
            item["metrics"] = {{"av", e.metrics->av}, {"ac", e.metrics->ac}, {"pr", e.metrics->pr},
                               {"ui", e.metrics->ui}, {"rl", e.metrics->rl}};
        } else {
            item["probability"] = e.probability;
        }
        edges.push_back(std::move(item));
    }
    return {{"allow_direct_consequence", graph.allow_direct_consequence()},
            {"vertices", std::move(vertices)},
            {"edges", std::move(edges)}};
}

inline std::map<std::string, Degree> degree_profile(const AttackGraph& graph) {
    std::map<std::string, Degree> out;
    for (const auto& v : graph.vertices()) out[v.id];
    for (const auto& e : graph.edges()) {
        ++out[e.from].out;
        ++out[e.to].in;
    }
    return out;
}

/// New probability (or new metrics) for an existing edge.
struct EdgeUpdate {
    std::string from;
    std::string to;
    std::variant<double, ExploitMetrics> value;

    friend bool operator==(const EdgeUpdate&, const EdgeUpdate&) = default;
};

/// Every problem with an update batch, without applying anything.
inline std::vector<Violation> check_updates(const AttackGraph& graph, std::span<const EdgeUpdate> updates) {
    std::vector<Violation> out;
    for (const auto& u : updates) {
        const std::string subject = u.from + "->" + u.to;
        const Edge* edge = graph.find_edge(u.from, u.to);
        if (!edge) {
            out.push_back({"unknown_edge", subject, "no such edge in the graph"});
            continue;
        }
        if (const double* p = std::get_if<double>(&u.value)) {
            if (auto v = detail::probability_violation(*p, subject)) out.push_back(*v);
        } else {
            const auto& m = std::get<ExploitMetrics>(u.value);
            if (graph.find_vertex(u.from)->kind != VertexKind::attack_vector ||
                graph.find_vertex(u.to)->kind != VertexKind::location) {
                out.push_back({"metrics_on_non_vector_edge", subject,
                               "metrics are only valid on attack_vector -> location edges"});
            }
            auto mv = detail::metric_violations(m, subject);
            out.insert(out.end(), mv.begin(), mv.end());
        }
    }
    return out;
}

/// Returns a copy of `graph` with the updates applied in order. Atomic: the
/// whole batch is checked first. Throws UnknownEdgeError if any edge is
/// missing, DomainError for out-of-range values.
inline AttackGraph apply_update(const AttackGraph& graph, std::span<const EdgeUpdate> updates) {
    auto problems = check_updates(graph, updates);
    if (!problems.empty()) {
        for (const auto& p : problems) {
            if (p.code == "unknown_edge") throw UnknownEdgeError("unknown edge " + p.subject);
        }
        throw DomainError(problems.front().subject + ": " + problems.front().message);
    }
    if (updates.empty()) return graph;

    std::vector<Edge> edges(graph.edges().begin(), graph.edges().end());
    std::map<std::pair<std::string, std::string>, std::size_t> position;
    for (std::size_t i = 0; i < edges.size(); ++i) position[{edges[i].from, edges[i].to}] = i;
    for (const auto& u : updates) {
        Edge& e = edges[position.at({u.from, u.to})];
        if (const double* p = std::get_if<double>(&u.value)) {
            e.probability = *p;
            e.metrics.reset();
        } else {
            e.metrics = std::get<ExploitMetrics>(u.value);
            e.probability = exploitation_probability(*e.metrics);
        }
        e.weight = edge_weight(e.probability);
    }
    return AttackGraph::assemble(std::vector<Vertex>(graph.vertices().begin(), graph.vertices().end()),
                                 std::move(edges), graph.consequence_costs(), graph.allow_direct_consequence());
}

inline AttackGraph apply_update(const AttackGraph& graph, const std::vector<EdgeUpdate>& updates) {
    return apply_update(graph, std::span<const EdgeUpdate>(updates));
}

/// Parse an update document: [{"from", "to", "probability"}]. Entries may
/// carry "metrics" instead of "probability" for vector -> location edges.
inline std::vector<EdgeUpdate> parse_updates(const nlohmann::json& doc) {
    if (!doc.is_array()) throw ParseError("update document must be a JSON array");
    std::vector<EdgeUpdate> out;
    std::size_t position = 0;
    for (const auto& item : doc) {
        std::string where = "update #" + std::to_string(position++);
        if (!item.is_object()) throw ParseError(where + " must be an object");
        detail::reject_unknown_keys(item, {"from", "to", "probability", "metrics"}, where);
        EdgeUpdate u;
        u.from = detail::require_string(item, "from", where);
        u.to = detail::require_string(item, "to", where);
        bool has_p = item.contains("probability");
        bool has_m = item.contains("metrics");
        if (has_p == has_m) throw ParseError(where + " must carry exactly one of probability or metrics");
        if (has_p) {
            u.value = detail::require_number(item, "probability", where);
        } else {
            u.value = detail::parse_metrics(item.at("metrics"), where);
        }
        out.push_back(std::move(u));
    }
    return out;
}

inline std::vector<EdgeUpdate> parse_updates_text(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("update document is not valid JSON: ") + e.what());
    }
    return parse_updates(doc);
}

inline nlohmann::json to_json(const EdgeUpdate& u) {
    nlohmann::json item = {{"from", u.from}, {"to", u.to}};
    if (const double* p = std::get_if<double>(&u.value)) {
        item["probability"] = *p;
    } else {
        const auto& m = std::get<ExploitMetrics>(u.value);
        item["metrics"] = {{"av", m.av}, {"ac", m.ac}, {"pr", m.pr}, {"ui", m.ui}, {"rl", m.rl}};
    }
    return item;
}

}  // namespace agr
