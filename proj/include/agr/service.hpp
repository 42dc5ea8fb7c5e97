#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <regex>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "analysis.hpp"
#include "catalog.hpp"
#include "graph.hpp"
#include "render.hpp"

namespace agr {

struct HttpResponse {
    int status = 200;
    nlohmann::json body;
};

/// One analyst session: the loaded graph plus the what-if edits folded into
/// the working copy. The base graph is never modified.
struct Session {
    std::string id;
    AttackGraph base;
    std::shared_ptr<const AttackGraph> working;
    std::vector<EdgeUpdate> applied_updates;
    std::set<std::pair<std::string, std::string>> pairs_of_interest;
    std::vector<Violation> warnings;
    mutable std::shared_mutex mutex;  // PATCH/reset take it exclusively
};

/// Transport-independent implementation of the HTTP/JSON API. mount() wires
/// it into an httplib server; tests call dispatch() directly.
class RiskService {
public:
    explicit RiskService(ThreatCatalog catalog = builtin_catalog(),
                         std::optional<std::filesystem::path> snapshot_dir = std::nullopt)
        : catalog_(std::move(catalog)), snapshot_dir_(std::move(snapshot_dir)), rng_(std::random_device{}()) {}

    /// Registers an already built graph, e.g. a fixture given on the command line.
    std::string create_session(AttackGraph graph) {
        auto session = std::make_shared<Session>();
        session->warnings = validate_tags(graph, catalog_);
        session->base = std::move(graph);
        session->working = std::make_shared<const AttackGraph>(session->base);
        std::unique_lock lock(store_mutex_);
        std::string id;
        do {
            id = new_token();
        } while (sessions_.count(id));
        session->id = id;
        sessions_.emplace(id, std::move(session));
        return id;
    }

    std::size_t session_count() const {
        std::shared_lock lock(store_mutex_);
        return sessions_.size();
    }

    HttpResponse dispatch(std::string_view method, const std::string& path,
                          const std::map<std::string, std::string>& query, std::string_view content_type,
                          std::string_view body) {
        static const std::regex session_route(R"(^/sessions/([^/]+)(/(rank|edges|reset|graph|export|snapshot))?/?$)");
        try {
            if (path == "/graph" || path == "/graph/") {
                if (method != "PUT") return method_not_allowed();
                return load(content_type, body);
            }
            if (path == "/health") return {200, {{"status", "ok"}}};
            std::smatch m;
            if (std::regex_match(path, m, session_route)) {
                const std::string id = m[1];
                const std::string action = m[3];
                if (action.empty()) return method == "GET" ? describe(id) : method_not_allowed();
                if (action == "rank") return method == "GET" ? rank(id, query) : method_not_allowed();
                if (action == "edges") return method == "PATCH" ? whatif(id, content_type, body) : method_not_allowed();
                if (action == "reset") return method == "POST" ? reset(id) : method_not_allowed();
                if (action == "graph") return method == "GET" ? graph_view(id) : method_not_allowed();
                if (action == "export") return method == "GET" ? export_spec(id) : method_not_allowed();
                if (action == "snapshot") return method == "POST" ? snapshot(id) : method_not_allowed();
            }
            return error(404, "no such route: " + std::string(method) + " " + path);
        } catch (const std::exception& e) {
            return error(500, e.what());
        }
    }

    /// PUT /graph
    HttpResponse load(std::string_view content_type, std::string_view body) {
        if (!is_json_content(content_type)) return error(415, "expected Content-Type application/json");
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(body);
        } catch (const nlohmann::json::parse_error& e) {
            return error(415, std::string("body is not JSON: ") + e.what());
        }
        try {
            std::string id = create_session(build_graph(doc, catalog_));
            return {200, descriptor(*find(id))};
        } catch (const ValidationError& e) {
            return error(400, "graph spec failed validation", violations_json(e.violations()));
        } catch (const ParseError& e) {
            return error(400, e.what());
        }
    }

    /// GET /sessions/{id}
    HttpResponse describe(const std::string& id) {
        auto s = find(id);
        if (!s) return unknown_session(id);
        std::shared_lock lock(s->mutex);
        return {200, descriptor(*s)};
    }

    /// GET /sessions/{id}/rank?from=&to=&cost=
    HttpResponse rank(const std::string& id, const std::map<std::string, std::string>& query) {
        auto s = find(id);
        if (!s) return unknown_session(id);
        auto from = query.find("from");
        auto to = query.find("to");
        if (from == query.end() || to == query.end()) return error(400, "query parameters 'from' and 'to' are required");
        RankOptions options;
        try {
            if (auto c = query.find("cost"); c != query.end()) options.cost = parse_number(c->second, "cost");
            if (auto h = query.find("max_hops"); h != query.end()) {
                options.limits.max_hops = static_cast<std::size_t>(parse_number(h->second, "max_hops"));
            }
            if (auto p = query.find("max_paths"); p != query.end()) {
                options.limits.max_paths = static_cast<std::size_t>(parse_number(p->second, "max_paths"));
            }
        } catch (const ParseError& e) {
            return error(400, e.what());
        }

        std::shared_ptr<const AttackGraph> graph;
        {
            std::shared_lock lock(s->mutex);
            graph = s->working;
        }
        RiskReport report;
        try {
            report = rank_paths(*graph, from->second, to->second, options);
        } catch (const UnknownVertexError& e) {
            return error(422, e.what());
        } catch (const WrongKindError& e) {
            return error(422, e.what());
        }
        {
            std::unique_lock lock(s->mutex);
            s->pairs_of_interest.emplace(from->second, to->second);
        }
        nlohmann::json body = to_json(report);
        body["session"] = id;
        return {200, std::move(body)};
    }

    /// PATCH /sessions/{id}/edges. Atomic: any bad entry rejects the batch.
    HttpResponse whatif(const std::string& id, std::string_view content_type, std::string_view body) {
        auto s = find(id);
        if (!s) return unknown_session(id);
        if (!is_json_content(content_type)) return error(415, "expected Content-Type application/json");
        std::vector<EdgeUpdate> updates;
        try {
            updates = parse_updates_text(body);
        } catch (const ParseError& e) {
            return error(400, e.what());
        }

        std::unique_lock lock(s->mutex);
        auto problems = check_updates(*s->working, updates);
        if (!problems.empty()) {
            return error(422, "update rejected; no edges were changed", violations_json(problems));
        }
        const AttackGraph& before = *s->working;
        auto after = std::make_shared<const AttackGraph>(apply_update(before, updates));

        nlohmann::json pairs = nlohmann::json::array();
        for (const auto& [from, to] : pairs_for(*s)) {
            nlohmann::json prev = pair_summary(before, from, to);
            nlohmann::json next = pair_summary(*after, from, to);
            bool changed = prev["shortest_path"] != next["shortest_path"];
            pairs.push_back({{"from", from},
                             {"to", to},
                             {"before", std::move(prev)},
                             {"after", std::move(next)},
                             {"shortest_path_changed", changed}});
        }
        std::vector<EdgeUpdate> applied = s->applied_updates;
        applied.insert(applied.end(), updates.begin(), updates.end());
        if (!reconstructible(s->base, applied, *after)) {
            return error(500, "working graph diverged from base + applied updates");
        }
        s->working = std::move(after);
        s->applied_updates = std::move(applied);
        return {200,
                {{"session", id},
                 {"applied", updates.size()},
                 {"total_applied", s->applied_updates.size()},
                 {"pairs", std::move(pairs)}}};
    }

    /// POST /sessions/{id}/reset
    HttpResponse reset(const std::string& id) {
        auto s = find(id);
        if (!s) return unknown_session(id);
        std::unique_lock lock(s->mutex);
        s->working = std::make_shared<const AttackGraph>(s->base);
        s->applied_updates.clear();
        return {200, descriptor(*s)};
    }

    /// GET /sessions/{id}/graph
    HttpResponse graph_view(const std::string& id) {
        auto s = find(id);
        if (!s) return unknown_session(id);
        std::shared_lock lock(s->mutex);
        nlohmann::json body = graph_view_json(*s->working);
        body["session"] = id;
        return {200, std::move(body)};
    }

    /// GET /sessions/{id}/export: the patched spec, for the analyst to save.
    HttpResponse export_spec(const std::string& id) {
        auto s = find(id);
        if (!s) return unknown_session(id);
        std::shared_lock lock(s->mutex);
        return {200, to_spec_json(*s->working)};
    }

    /// POST /sessions/{id}/snapshot: writes <snapshot-dir>/<id>.json.
    HttpResponse snapshot(const std::string& id) {
        auto s = find(id);
        if (!s) return unknown_session(id);
        if (!snapshot_dir_) return error(501, "snapshots are disabled (start the server with --snapshot-dir)");
        nlohmann::json doc;
        {
            std::shared_lock lock(s->mutex);
            nlohmann::json updates = nlohmann::json::array();
            for (const auto& u : s->applied_updates) updates.push_back(to_json(u));
            doc = {{"session", id},
                   {"base", to_spec_json(s->base)},
                   {"applied_updates", std::move(updates)},
                   {"working", to_spec_json(*s->working)}};
        }
        std::error_code ec;
        std::filesystem::create_directories(*snapshot_dir_, ec);
        auto file = *snapshot_dir_ / (id + ".json");
        std::ofstream out(file);
        if (!out) return error(500, "cannot write snapshot " + file.string());
        out << doc.dump(2) << "\n";
        return {200, {{"session", id}, {"path", file.string()}}};
    }

    static HttpResponse error(int status, std::string message, nlohmann::json details = nlohmann::json::array()) {
        return {status, {{"error", std::move(message)}, {"details", std::move(details)}}};
    }

private:
    static bool is_json_content(std::string_view content_type) {
        return content_type.find("application/json") != std::string_view::npos;
    }

    static HttpResponse method_not_allowed() { return error(405, "method not allowed"); }

    static HttpResponse unknown_session(const std::string& id) { return error(404, "unknown session '" + id + "'"); }

    static double parse_number(const std::string& text, const char* name) {
        try {
            std::size_t used = 0;
            double v = std::stod(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            return v;
        } catch (const std::exception&) {
            throw ParseError(std::string("query parameter '") + name + "' must be a number");
        }
    }

    static nlohmann::json violations_json(const std::vector<Violation>& vs) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& v : vs) out.push_back({{"code", v.code}, {"subject", v.subject}, {"message", v.message}});
        return out;
    }

    std::shared_ptr<Session> find(const std::string& id) const {
        std::shared_lock lock(store_mutex_);
        auto it = sessions_.find(id);
        return it == sessions_.end() ? nullptr : it->second;
    }

    std::string new_token() {
        std::lock_guard lock(rng_mutex_);
        static constexpr char hex[] = "0123456789abcdef";
        std::string out;
        for (int i = 0; i < 32; ++i) out += hex[rng_() & 0xF];
        return out;
    }

    static nlohmann::json descriptor(const Session& s) {
        return {{"session", s.id},
                {"vertices", s.working->vertex_count()},
                {"edges", s.working->edge_count()},
                {"applied_updates", s.applied_updates.size()},
                {"warnings", violations_json(s.warnings)}};
    }

    /// Registered (from, to) pairs, or every vector x consequence pair when
    /// none has been ranked yet.
    static std::vector<std::pair<std::string, std::string>> pairs_for(const Session& s) {
        if (!s.pairs_of_interest.empty()) return {s.pairs_of_interest.begin(), s.pairs_of_interest.end()};
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& a : s.working->vertices()) {
            if (a.kind != VertexKind::attack_vector) continue;
            for (const auto& c : s.working->vertices()) {
                if (c.kind == VertexKind::consequence) out.emplace_back(a.id, c.id);
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    static nlohmann::json pair_summary(const AttackGraph& graph, const std::string& from, const std::string& to) {
        RiskReport r = rank_paths(graph, from, to);
        if (r.unreachable) {
            return {{"shortest_path", nullptr}, {"cumulative_weight", nullptr}, {"max_risk_coefficient", 0.0}};
        }
        return {{"shortest_path", r.shortest_path->vertices},
                {"cumulative_weight", r.shortest_path->cumulative_weight},
                {"max_risk_coefficient", r.max_risk_coefficient()}};
    }

    static bool reconstructible([[maybe_unused]] const AttackGraph& base,
                                [[maybe_unused]] const std::vector<EdgeUpdate>& applied,
                                [[maybe_unused]] const AttackGraph& working) {
#ifndef NDEBUG
        return apply_update(base, applied) == working;
#else
        return true;
#endif
    }

    ThreatCatalog catalog_;
    std::optional<std::filesystem::path> snapshot_dir_;
    mutable std::shared_mutex store_mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::mutex rng_mutex_;
    std::mt19937_64 rng_;
};

/// Route every request on `server` through `service`.
inline void mount(httplib::Server& server, RiskService& service) {
    auto handler = [&service](const httplib::Request& req, httplib::Response& res) {
        std::map<std::string, std::string> query;
        for (const auto& [k, v] : req.params) query.emplace(k, v);
        HttpResponse r = service.dispatch(req.method, req.path, query, req.get_header_value("Content-Type"), req.body);
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    server.Get(".*", handler);
    server.Put(".*", handler);
    server.Post(".*", handler);
    server.Patch(".*", handler);
    server.Delete(".*", handler);
}

}  // namespace agr
