#pragma once

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>

#include "analysis.hpp"
#include "catalog.hpp"
#include "graph.hpp"
#include "render.hpp"
#include "service.hpp"

namespace agr::cli {

/// Process exit codes.
enum Exit : int { ok = 0, domain_failure = 1, io_failure = 2 };

class IoError : public Error {
public:
    using Error::Error;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline ThreatCatalog resolve_catalog(const std::string& catalog_path) {
    std::string path = catalog_path;
    if (path.empty()) {
        if (const char* env = std::getenv("AGR_CATALOG"); env && *env) path = env;
    }
    if (path.empty()) return builtin_catalog();
    return load_catalog_text(read_file(path));
}

inline std::string count_of(std::size_t n, const std::string& noun) {
    return std::to_string(n) + " " + noun + (n == 1 ? "" : "s");
}

inline void print_violations(std::ostream& out, const std::vector<Violation>& vs) {
    for (const auto& v : vs) out << "violation[" << v.code << "] " << v.subject << ": " << v.message << "\n";
}

/// Shared state for subcommands that analyze one graph.
struct GraphArgs {
    std::string spec;
    std::string catalog;
    std::string updates;

    AttackGraph load() const {
        AttackGraph g = build_graph_text(read_file(spec), resolve_catalog(catalog));
        if (!updates.empty()) g = apply_update(g, parse_updates_text(read_file(updates)));
        return g;
    }
};

/// Entry point for the `agr` tool. Output goes to `out`, diagnostics to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Attack-graph risk assessment for manufacturing systems", "agr"};
    app.require_subcommand(1);

    GraphArgs args;
    std::string from;
    std::string to;
    std::optional<double> cost;
    std::string format = "text";
    PathLimits limits;
    bool table = false;
    bool highlight = false;
    int port = 8080;
    std::string host = "127.0.0.1";
    std::string fixture;
    std::string snapshot_dir;

    auto add_graph = [&](CLI::App* sub, bool with_updates) {
        sub->add_option("spec", args.spec, "GraphSpec JSON file")->required();
        sub->add_option("--catalog", args.catalog, "Catalog JSON merged over the builtin taxonomy (default: $AGR_CATALOG)");
        if (with_updates) sub->add_option("--updates", args.updates, "Update document applied before analysis");
    };
    auto add_limits = [&](CLI::App* sub) {
        sub->add_option("--max-hops", limits.max_hops, "Longest path (in edges) to enumerate");
        sub->add_option("--max-paths", limits.max_paths, "Stop enumerating after this many paths");
    };

    auto* validate = app.add_subcommand("validate", "Check a graph spec and its taxonomy tags");
    add_graph(validate, false);
    validate->add_flag("--table", table, "Print the edge probability/weight table");

    auto* report = app.add_subcommand("report", "Rank attack paths by cumulative risk");
    add_graph(report, true);
    report->add_option("--from", from, "Attack vector id")->required();
    report->add_option("--to", to, "Consequence id")->required();
    report->add_option("--cost", cost, "Monetary cost of the consequence");
    report->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));
    add_limits(report);

    auto* prop = app.add_subcommand("propagate", "Depth-first attack propagation from an attack vector");
    add_graph(prop, true);
    prop->add_option("--from", from, "Attack vector id")->required();
    prop->add_option("--format", format)->check(CLI::IsMember({"text", "json", "dot"}));

    auto* paths = app.add_subcommand("paths", "Enumerate all simple attack paths");
    add_graph(paths, true);
    paths->add_option("--from", from, "Attack vector id")->required();
    paths->add_option("--to", to, "Consequence id")->required();
    paths->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));
    add_limits(paths);

    auto* shortest = app.add_subcommand("shortest", "Lowest cumulative-weight attack path");
    add_graph(shortest, true);
    shortest->add_option("--from", from, "Attack vector id")->required();
    shortest->add_option("--to", to, "Consequence id")->required();
    shortest->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));

    auto* dot = app.add_subcommand("export-dot", "Export the graph in Graphviz DOT format");
    add_graph(dot, true);
    dot->add_flag("--highlight-shortest", highlight, "Highlight the shortest path between --from and --to");
    dot->add_option("--from", from, "Attack vector id");
    dot->add_option("--to", to, "Consequence id");

    auto* serve = app.add_subcommand("serve", "Run the HTTP/JSON risk service");
    serve->add_option("--port", port, "Listen port");
    serve->add_option("--host", host, "Listen address");
    serve->add_option("--fixture", fixture, "GraphSpec preloaded as a session");
    serve->add_option("--catalog", args.catalog, "Catalog JSON (default: $AGR_CATALOG)");
    serve->add_option("--snapshot-dir", snapshot_dir, "Directory for session snapshots");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? Exit::ok : Exit::io_failure;
    }

    try {
        if (validate->parsed()) {
            ThreatCatalog catalog = resolve_catalog(args.catalog);
            AttackGraph g;
            try {
                g = build_graph_text(read_file(args.spec), catalog);
            } catch (const ValidationError& e) {
                print_violations(out, e.violations());
                err << "error: " << args.spec << " failed validation (" << count_of(e.violations().size(), "violation")
                    << ")\n";
                return Exit::domain_failure;
            }
            auto tags = validate_tags(g, catalog);
            if (!tags.empty()) {
                print_violations(out, tags);
                err << "error: " << args.spec << " failed validation (" << count_of(tags.size(), "violation")
                    << ")\n";
                return Exit::domain_failure;
            }
            out << "ok: " << (g.vertex_count() == 1 ? "1 vertex" : std::to_string(g.vertex_count()) + " vertices")
                << " (" << count_of(g.count(VertexKind::attack_vector), "attack vector") << ", "
                << count_of(g.count(VertexKind::location), "location") << ", "
                << count_of(g.count(VertexKind::consequence), "consequence") << "), "
                << count_of(g.edge_count(), "edge") << "\n";
            if (table) out << render_edge_table(g);
            return Exit::ok;
        }

        if (report->parsed()) {
            AttackGraph g = args.load();
            RankOptions options;
            options.cost = cost;
            options.limits = limits;
            RiskReport r = rank_paths(g, from, to, options);
            if (r.unreachable) err << "warning: " << to << " is unreachable from " << from << "\n";
            if (format == "json") {
                out << to_json(r).dump(2) << "\n";
            } else {
                out << render_report_text(r);
            }
            return Exit::ok;
        }

        if (prop->parsed()) {
            AttackGraph g = args.load();
            PropagationResult r = propagate(g, from);
            if (format == "json") {
                out << to_json(r).dump(2) << "\n";
            } else if (format == "dot") {
                out << render_propagation_dot(g, r);
            } else {
                out << render_propagation_text(g, r);
            }
            return Exit::ok;
        }

        if (paths->parsed()) {
            AttackGraph g = args.load();
            PathEnumeration found = enumerate_paths(g, from, to, limits);
            if (format == "json") {
                out << to_json(found).dump(2) << "\n";
            } else {
                out << render_paths_text(from, to, found);
            }
            return Exit::ok;
        }

        if (shortest->parsed()) {
            AttackGraph g = args.load();
            AttackPath p = shortest_path(g, from, to);
            if (format == "json") {
                out << to_json(p).dump(2) << "\n";
            } else {
                out << render_shortest_text(from, to, p);
            }
            return Exit::ok;
        }

        if (dot->parsed()) {
            if (highlight && (from.empty() || to.empty())) {
                err << "error: --highlight-shortest requires --from and --to\n";
                return Exit::io_failure;
            }
            AttackGraph g = args.load();
            DotOptions options;
            if (highlight) options.highlight_path = shortest_path(g, from, to).vertices;
            out << render_dot(g, options);
            return Exit::ok;
        }

        if (serve->parsed()) {
            std::optional<std::filesystem::path> snapshots;
            if (!snapshot_dir.empty()) snapshots = snapshot_dir;
            ThreatCatalog catalog = resolve_catalog(args.catalog);
            RiskService service(catalog, snapshots);
            if (!fixture.empty()) {
                std::string id = service.create_session(build_graph_text(read_file(fixture), catalog));
                out << "preloaded session " << id << " from " << fixture << "\n";
            }
            httplib::Server server;
            mount(server, service);
            out << "listening on http://" << host << ":" << port << std::endl;
            if (!server.listen(host, port)) {
                err << "error: cannot listen on " << host << ":" << port << "\n";
                return Exit::io_failure;
            }
            return Exit::ok;
        }
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return Exit::io_failure;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return Exit::io_failure;
    } catch (const ValidationError& e) {
        print_violations(err, e.violations());
        err << "error: validation failed\n";
        return Exit::domain_failure;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return Exit::domain_failure;
    }
    return Exit::ok;
}

}  // namespace agr::cli
