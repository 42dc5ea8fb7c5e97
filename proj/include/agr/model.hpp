#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace agr {

enum class VertexKind { attack_vector, location, consequence };

inline std::string_view to_string(VertexKind kind) noexcept {
    switch (kind) {
        case VertexKind::attack_vector: return "attack_vector";
        case VertexKind::location: return "location";
        case VertexKind::consequence: return "consequence";
    }
    return "unknown";
}

/// "an attack_vector", "a location", ... for messages.
inline std::string with_article(VertexKind kind) {
    return (kind == VertexKind::attack_vector ? "an " : "a ") + std::string(to_string(kind));
}

inline std::optional<VertexKind> parse_vertex_kind(std::string_view text) noexcept {
    if (text == "attack_vector") return VertexKind::attack_vector;
    if (text == "location") return VertexKind::location;
    if (text == "consequence") return VertexKind::consequence;
    return std::nullopt;
}

struct Vertex {
    std::string id;
    VertexKind kind = VertexKind::location;
    std::string label;
    std::vector<std::string> taxonomy_tags;

    friend bool operator==(const Vertex&, const Vertex&) = default;
};

/// Exploitability scores for an attack_vector -> location edge.
///
/// `av`, `ac`, `pr` and `ui` are normalized to (0, 1] with higher meaning
/// easier to exploit (remote reach, low complexity, few privileges needed,
/// no user interaction). `rl` is in [1, inf) and grows with the strength of
/// deployed remediation.
struct ExploitMetrics {
    double av = 1.0;
    double ac = 1.0;
    double pr = 1.0;
    double ui = 1.0;
    double rl = 1.0;

    friend bool operator==(const ExploitMetrics&, const ExploitMetrics&) = default;
};

struct Edge {
    std::string from;
    std::string to;
    double probability = 1.0;
    double weight = 1.0;
    std::optional<ExploitMetrics> metrics;

    std::string name() const { return from + "->" + to; }

    friend bool operator==(const Edge&, const Edge&) = default;
};

}  // namespace agr
