#pragma once

// Test-only reference implementations. These deliberately avoid the
// library's adjacency lists and traversal code: they work from the raw edge
// list so that they can serve as independent checks.

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "agr/graph.hpp"

namespace agr::test {

inline std::string fixture_path(const std::string& name) { return std::string(AGR_FIXTURE_DIR) + "/" + name; }

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline AttackGraph manufacturing_graph() { return build_graph_text(slurp(fixture_path("manufacturing.json"))); }

inline std::vector<EdgeUpdate> defense_update() { return parse_updates_text(slurp(fixture_path("defense_update.json"))); }

inline AttackGraph sample_graph() { return build_graph_text(slurp(fixture_path("sample_graph.json"))); }

/// Table 1 edge probabilities, as printed.
inline const std::vector<std::pair<std::string, double>>& table1_probabilities() {
    static const std::vector<std::pair<std::string, double>> rows = {
        {"AV1L6", 0.2}, {"AV2L1", 0.35}, {"AV2L2", 0.6}, {"L1L3", 0.15}, {"L2L3", 0.3},  {"L2L4", 0.3}, {"L3L5", 0.25},
        {"L4L6", 0.9},  {"L5L8", 0.05},  {"L5C1", 0.8},  {"L6L7", 0.05}, {"L7L5", 0.6}, {"L8L6", 0.3}};
    return rows;
}

using EdgeMap = std::map<std::pair<std::string, std::string>, double>;  // (from,to) -> probability

inline EdgeMap edge_map(const AttackGraph& g) {
    EdgeMap m;
    for (const auto& e : g.edges()) m[{e.from, e.to}] = e.probability;
    return m;
}

/// Breadth-first reachability over the raw edge list.
inline std::set<std::string> bfs_reachable(const AttackGraph& g, const std::string& start) {
    std::set<std::string> seen{start};
    std::deque<std::string> queue{start};
    while (!queue.empty()) {
        std::string u = queue.front();
        queue.pop_front();
        for (const auto& e : g.edges()) {
            if (e.from == u && seen.insert(e.to).second) queue.push_back(e.to);
        }
    }
    return seen;
}

struct OraclePath {
    std::vector<std::string> vertices;
    double weight = 0.0;       // sum of 1/p, left to right
    double probability = 1.0;  // product of p, left to right
};

/// Every simple path start -> target, found by breadth-first expansion of
/// partial paths over the raw edge list. Returned sorted by vertex sequence.
inline std::vector<OraclePath> brute_force_paths(const AttackGraph& g, const std::string& start,
                                                 const std::string& target) {
    std::vector<OraclePath> out;
    std::deque<std::vector<std::string>> partial{{start}};
    while (!partial.empty()) {
        auto p = partial.front();
        partial.pop_front();
        if (p.back() == target) {
            OraclePath op;
            op.vertices = p;
            for (std::size_t i = 0; i + 1 < p.size(); ++i) {
                for (const auto& e : g.edges()) {
                    if (e.from == p[i] && e.to == p[i + 1]) {
                        op.weight += 1.0 / e.probability;
                        op.probability *= e.probability;
                    }
                }
            }
            out.push_back(std::move(op));
            continue;
        }
        for (const auto& e : g.edges()) {
            if (e.from != p.back()) continue;
            if (std::find(p.begin(), p.end(), e.to) != p.end()) continue;
            auto next = p;
            next.push_back(e.to);
            partial.push_back(std::move(next));
        }
    }
    std::sort(out.begin(), out.end(), [](const OraclePath& a, const OraclePath& b) { return a.vertices < b.vertices; });
    return out;
}

inline bool rel_close(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

/// Random GraphSpec respecting the kind-pair whitelist: at most
/// `max_vertices` vertices, at least one vector and one consequence,
/// probabilities uniform in [0.05, 1].
inline nlohmann::json random_spec(std::mt19937_64& rng, std::size_t max_vertices = 12, double edge_density = 0.35) {
    std::uniform_int_distribution<std::size_t> count(2, max_vertices);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> prob(0.05, 1.0);
    const std::size_t n = count(rng);
    std::vector<std::pair<std::string, VertexKind>> vs;
    for (std::size_t i = 0; i < n; ++i) {
        VertexKind k;
        if (i == 0) {
            k = VertexKind::attack_vector;
        } else if (i == n - 1) {
            k = VertexKind::consequence;
        } else {
            double r = unit(rng);
            k = r < 0.2 ? VertexKind::attack_vector : (r < 0.8 ? VertexKind::location : VertexKind::consequence);
        }
        const char prefix = k == VertexKind::attack_vector ? 'a' : (k == VertexKind::location ? 'l' : 'c');
        vs.emplace_back(std::string(1, prefix) + std::to_string(i), k);
    }
    nlohmann::json vertices = nlohmann::json::array();
    for (const auto& [id, k] : vs) vertices.push_back({{"id", id}, {"kind", std::string(to_string(k))}});
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [a, ka] : vs) {
        for (const auto& [b, kb] : vs) {
            if (a == b || !kind_pair_allowed(ka, kb, false)) continue;
            if (unit(rng) < edge_density) edges.push_back({{"from", a}, {"to", b}, {"probability", prob(rng)}});
        }
    }
    return {{"vertices", vertices}, {"edges", edges}};
}

inline std::vector<std::string> ids_of_kind(const AttackGraph& g, VertexKind k) {
    std::vector<std::string> out;
    for (const auto& v : g.vertices()) {
        if (v.kind == k) out.push_back(v.id);
    }
    return out;
}

}  // namespace agr::test
