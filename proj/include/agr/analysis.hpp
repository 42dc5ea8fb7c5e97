#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "error.hpp"
#include "graph.hpp"

namespace agr {

/// Depth-first exploration from one attack vector.
struct PropagationResult {
    std::string start;
    std::vector<std::string> visited;  // discovery order, start first
    std::vector<std::pair<std::string, std::string>> tree_edges;

    friend bool operator==(const PropagationResult&, const PropagationResult&) = default;
};

/// A simple path vector -> locations -> consequence.
struct AttackPath {
    std::vector<std::string> vertices;
    std::size_t hop_length = 0;
    double cumulative_weight = 0.0;
    double success_probability = 1.0;

    friend bool operator==(const AttackPath&, const AttackPath&) = default;
};

struct PathLimits {
    std::size_t max_hops = 32;
    std::size_t max_paths = 10000;
};

struct PathEnumeration {
    std::vector<AttackPath> paths;
    bool truncated_by_paths = false;
    // Conservative: set whenever a branch that can still reach the target
    // was cut by max_hops.
    bool truncated_by_hops = false;

    bool truncated() const noexcept { return truncated_by_paths || truncated_by_hops; }
};

struct RiskValue {
    double coefficient = 0.0;
    std::optional<double> value;  // coefficient * cost when a cost is known
};

struct RankedPath {
    AttackPath path;
    double risk_coefficient = 0.0;
    std::optional<double> risk_value;
};

struct RiskReport {
    std::string start;
    std::string target;
    std::vector<RankedPath> paths;  // descending risk_coefficient
    std::optional<std::size_t> shortest;
    std::optional<AttackPath> shortest_path;
    std::optional<std::size_t> most_probable;
    std::optional<double> consequence_cost;
    bool unreachable = false;
    bool truncated_by_paths = false;
    bool truncated_by_hops = false;

    double max_risk_coefficient() const noexcept { return paths.empty() ? 0.0 : paths.front().risk_coefficient; }
};

struct RankOptions {
    std::optional<double> cost;  // overrides the consequence's own cost
    PathLimits limits;
    bool cross_check = true;     // verify Dijkstra against the enumeration
};

namespace detail {

inline std::size_t require_vertex(const AttackGraph& g, std::string_view id) {
    auto i = g.index_of(id);
    if (!i) throw UnknownVertexError("unknown vertex '" + std::string(id) + "'");
    return *i;
}

inline std::size_t require_kind(const AttackGraph& g, std::string_view id, VertexKind kind, std::string_view role) {
    std::size_t i = require_vertex(g, id);
    if (g.vertex(i).kind != kind) {
        throw WrongKindError(std::string(role) + " '" + std::string(id) + "' must be " +
                             with_article(kind) + ", not " + with_article(g.vertex(i).kind));
    }
    return i;
}

inline std::vector<std::string> ids_of(const AttackGraph& g, const std::vector<std::size_t>& seq) {
    std::vector<std::string> out;
    out.reserve(seq.size());
    for (auto i : seq) out.push_back(g.vertex(i).id);
    return out;
}

inline bool ids_less(const AttackGraph& g, const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), [&g](std::size_t x, std::size_t y) {
        return g.vertex(x).id < g.vertex(y).id;
    });
}

/// Dijkstra from `source` to `target` under an arbitrary non-negative arc
/// cost. Ties on cost prefer fewer hops, then the lexicographically smallest
/// vertex-id sequence.
template <typename ArcCost>
std::optional<std::vector<std::size_t>> best_path(const AttackGraph& g, std::size_t source, std::size_t target,
                                                  ArcCost&& cost) {
    const std::size_t n = g.vertex_count();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, inf);
    std::vector<std::size_t> hops(n, 0);
    std::vector<std::size_t> prev(n, n);
    std::vector<bool> done(n, false);

    auto chain = [&](std::size_t v) {
        std::vector<std::size_t> seq;
        for (std::size_t cur = v; cur != n; cur = prev[cur]) seq.push_back(cur);
        std::reverse(seq.begin(), seq.end());
        return seq;
    };

    using Entry = std::tuple<double, std::size_t, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    dist[source] = 0.0;
    heap.emplace(0.0, 0, source);

    while (!heap.empty()) {
        auto [d, h, u] = heap.top();
        heap.pop();
        if (done[u] || d != dist[u] || h != hops[u]) continue;
        done[u] = true;
        if (u == target) break;
        for (const auto& arc : g.adjacency(u)) {
            const std::size_t v = arc.to;
            if (done[v]) continue;
            const double nd = dist[u] + cost(g.edges()[arc.edge]);
            const std::size_t nh = hops[u] + 1;
            bool better = nd < dist[v] || (nd == dist[v] && nh < hops[v]);
            if (!better && nd == dist[v] && nh == hops[v] && prev[v] != u) {
                auto via_u = chain(u);
                auto via_prev = chain(prev[v]);
                better = ids_less(g, via_u, via_prev);
                if (better) {
                    prev[v] = u;
                    continue;  // same key, heap entry stays valid
                }
            }
            if (better) {
                dist[v] = nd;
                hops[v] = nh;
                prev[v] = u;
                heap.emplace(nd, nh, v);
            }
        }
    }
    if (!done[target]) return std::nullopt;
    return chain(target);
}

}  // namespace detail

/// Build an AttackPath from a vertex sequence, summing weights and
/// multiplying probabilities left to right. Throws PathNotInGraphError if a
/// vertex or step is missing.
inline AttackPath make_path(const AttackGraph& graph, const std::vector<std::string>& ids) {
    if (ids.empty()) throw PathNotInGraphError("empty path");
    AttackPath path;
    path.vertices = ids;
    path.hop_length = ids.size() - 1;
    for (const auto& id : ids) {
        if (!graph.find_vertex(id)) throw PathNotInGraphError("vertex '" + id + "' is not in the graph");
    }
    for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
        const Edge* e = graph.find_edge(ids[i], ids[i + 1]);
        if (!e) throw PathNotInGraphError("edge " + ids[i] + "->" + ids[i + 1] + " is not in the graph");
        path.cumulative_weight += e->weight;
        path.success_probability *= e->probability;
    }
    return path;
}

/// Depth-first attack propagation from an attack vector. Neighbors are
/// explored nearest (smallest weight) first; from the vector itself, locations
/// are explored before any directly attached consequence.
inline PropagationResult propagate(const AttackGraph& graph, std::string_view start) {
    const std::size_t s = detail::require_kind(graph, start, VertexKind::attack_vector, "propagation start");

    auto neighbor_order = [&graph](std::size_t u) {
        std::vector<std::size_t> order;
        for (const auto& a : graph.adjacency(u)) order.push_back(a.to);
        if (graph.vertex(u).kind == VertexKind::attack_vector) {
            std::stable_partition(order.begin(), order.end(),
                                  [&graph](std::size_t v) { return graph.vertex(v).kind == VertexKind::location; });
        }
        return order;
    };

    struct Frame {
        std::size_t vertex;
        std::vector<std::size_t> order;
        std::size_t next = 0;
    };

    PropagationResult result;
    result.start = std::string(start);
    std::vector<bool> visited(graph.vertex_count(), false);
    visited[s] = true;
    result.visited.push_back(graph.vertex(s).id);
    std::vector<Frame> stack;
    stack.push_back({s, neighbor_order(s)});
    while (!stack.empty()) {
        Frame& top = stack.back();
        if (top.next == top.order.size()) {
            stack.pop_back();
            continue;
        }
        const std::size_t v = top.order[top.next++];
        if (visited[v]) continue;
        visited[v] = true;
        result.visited.push_back(graph.vertex(v).id);
        result.tree_edges.emplace_back(graph.vertex(top.vertex).id, graph.vertex(v).id);
        stack.push_back({v, neighbor_order(v)});
    }
    return result;
}

/// All simple paths from `start` to `target`, in lexicographic order of
/// their vertex-id sequences.
inline PathEnumeration enumerate_paths(const AttackGraph& graph, std::string_view start, std::string_view target,
                                       PathLimits limits = {}) {
    const std::size_t s = detail::require_kind(graph, start, VertexKind::attack_vector, "path start");
    const std::size_t t = detail::require_kind(graph, target, VertexKind::consequence, "path target");
    const std::size_t n = graph.vertex_count();

    // Successors sorted by id so that DFS emits paths lexicographically.
    std::vector<std::vector<std::size_t>> succ(n);
    std::vector<std::vector<std::size_t>> pred(n);
    for (std::size_t u = 0; u < n; ++u) {
        for (const auto& a : graph.adjacency(u)) {
            succ[u].push_back(a.to);
            pred[a.to].push_back(u);
        }
        std::sort(succ[u].begin(), succ[u].end(),
                  [&graph](std::size_t a, std::size_t b) { return graph.vertex(a).id < graph.vertex(b).id; });
    }
    std::vector<bool> reaches(n, false);
    std::vector<std::size_t> frontier{t};
    reaches[t] = true;
    while (!frontier.empty()) {
        std::size_t v = frontier.back();
        frontier.pop_back();
        for (auto p : pred[v]) {
            if (!reaches[p]) {
                reaches[p] = true;
                frontier.push_back(p);
            }
        }
    }

    PathEnumeration result;
    std::vector<std::size_t> path{s};
    std::vector<bool> on_path(n, false);
    on_path[s] = true;
    bool stop = false;

    std::function<void(std::size_t)> dfs = [&](std::size_t u) {
        const std::size_t depth = path.size() - 1;
        for (std::size_t v : succ[u]) {
            if (stop) return;
            if (v == t) {
                if (depth + 1 > limits.max_hops) {
                    result.truncated_by_hops = true;
                    continue;
                }
                if (result.paths.size() == limits.max_paths) {
                    result.truncated_by_paths = true;
                    stop = true;
                    return;
                }
                path.push_back(v);
                result.paths.push_back(make_path(graph, detail::ids_of(graph, path)));
                path.pop_back();
                continue;
            }
            if (on_path[v] || !reaches[v] || graph.vertex(v).kind == VertexKind::consequence) continue;
            if (depth + 2 > limits.max_hops) {
                result.truncated_by_hops = true;
                continue;
            }
            on_path[v] = true;
            path.push_back(v);
            dfs(v);
            path.pop_back();
            on_path[v] = false;
        }
    };
    if (reaches[s]) dfs(s);
    return result;
}

/// Minimum cumulative-weight path. Throws UnreachableError when no path exists.
inline AttackPath shortest_path(const AttackGraph& graph, std::string_view start, std::string_view target) {
    const std::size_t s = detail::require_kind(graph, start, VertexKind::attack_vector, "path start");
    const std::size_t t = detail::require_kind(graph, target, VertexKind::consequence, "path target");
    auto seq = detail::best_path(graph, s, t, [](const Edge& e) { return e.weight; });
    if (!seq) {
        throw UnreachableError("'" + std::string(target) + "' is unreachable from '" + std::string(start) + "'");
    }
    return make_path(graph, detail::ids_of(graph, *seq));
}

/// Maximum success-probability path (minimizes the sum of -log p). Differs
/// from shortest_path in general because weights are reciprocals.
inline AttackPath most_probable_path(const AttackGraph& graph, std::string_view start, std::string_view target) {
    const std::size_t s = detail::require_kind(graph, start, VertexKind::attack_vector, "path start");
    const std::size_t t = detail::require_kind(graph, target, VertexKind::consequence, "path target");
    auto seq = detail::best_path(graph, s, t, [](const Edge& e) { return -std::log(e.probability); });
    if (!seq) {
        throw UnreachableError("'" + std::string(target) + "' is unreachable from '" + std::string(start) + "'");
    }
    return make_path(graph, detail::ids_of(graph, *seq));
}

/// Risk coefficient of a path: product of its edge probabilities. Multiplied
/// by `cost` when one is given.
inline RiskValue path_risk(const AttackGraph& graph, const AttackPath& path, std::optional<double> cost = std::nullopt) {
    AttackPath checked = make_path(graph, path.vertices);
    RiskValue r;
    r.coefficient = checked.success_probability;
    if (cost) r.value = r.coefficient * *cost;
    return r;
}

inline RiskReport rank_paths(const AttackGraph& graph, std::string_view start, std::string_view target,
                             const RankOptions& options = {}) {
    PathEnumeration found = enumerate_paths(graph, start, target, options.limits);

    RiskReport report;
    report.start = std::string(start);
    report.target = std::string(target);
    report.consequence_cost = options.cost ? options.cost : graph.consequence_cost(target);
    report.truncated_by_paths = found.truncated_by_paths;
    report.truncated_by_hops = found.truncated_by_hops;

    try {
        report.shortest_path = shortest_path(graph, start, target);
    } catch (const UnreachableError&) {
        report.unreachable = true;
        return report;
    }

    for (auto& p : found.paths) {
        RiskValue r = path_risk(graph, p, report.consequence_cost);
        report.paths.push_back({std::move(p), r.coefficient, r.value});
    }
    std::stable_sort(report.paths.begin(), report.paths.end(), [](const RankedPath& a, const RankedPath& b) {
        return a.risk_coefficient > b.risk_coefficient;
    });

    for (std::size_t i = 0; i < report.paths.size(); ++i) {
        if (report.paths[i].path.vertices == report.shortest_path->vertices) report.shortest = i;
    }
    if (!report.paths.empty()) report.most_probable = 0;

    if (options.cross_check && !found.truncated() && !report.paths.empty()) {
        const RankedPath* best = &report.paths.front();
        for (const auto& rp : report.paths) {
            const auto& a = rp.path;
            const auto& b = best->path;
            if (a.cumulative_weight < b.cumulative_weight ||
                (a.cumulative_weight == b.cumulative_weight &&
                 (a.hop_length < b.hop_length || (a.hop_length == b.hop_length && a.vertices < b.vertices)))) {
                best = &rp;
            }
        }
        const double dw = std::abs(best->path.cumulative_weight - report.shortest_path->cumulative_weight);
        if (!report.shortest || dw > 1e-9 * best->path.cumulative_weight ||
            best->path.vertices != report.shortest_path->vertices) {
            throw std::logic_error("shortest path disagrees with exhaustive enumeration for " + report.start + " -> " +
                                   report.target);
        }
    }
    return report;
}

/// rank_paths for every (attack vector, consequence) pair, in id order.
inline std::vector<RiskReport> rank_all_pairs(const AttackGraph& graph, const RankOptions& options = {}) {
    std::vector<std::string> vectors;
    std::vector<std::string> consequences;
    for (const auto& v : graph.vertices()) {
        if (v.kind == VertexKind::attack_vector) vectors.push_back(v.id);
        if (v.kind == VertexKind::consequence) consequences.push_back(v.id);
    }
    std::sort(vectors.begin(), vectors.end());
    std::sort(consequences.begin(), consequences.end());
    std::vector<RiskReport> out;
    for (const auto& a : vectors) {
        for (const auto& c : consequences) out.push_back(rank_paths(graph, a, c, options));
    }
    return out;
}

}  // namespace agr
