// Walks through a defense what-if: rank attack paths on the manufacturing
// fixture, apply the defense update, and rank again.

#include <fstream>
#include <iostream>
#include <sstream>

#include "agr/agr.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main() {
    const std::string dir = AGR_FIXTURE_DIR;
    agr::AttackGraph graph = agr::build_graph_text(slurp(dir + "/manufacturing.json"));
    std::cout << agr::render_edge_table(graph) << "\n";

    agr::RiskReport before = agr::rank_paths(graph, "AV2", "C1");
    std::cout << agr::render_report_text(before) << "\n";

    auto updates = agr::parse_updates_text(slurp(dir + "/defense_update.json"));
    agr::AttackGraph defended = agr::apply_update(graph, updates);
    std::cout << agr::render_edge_table(defended) << "\n";

    agr::RiskReport after = agr::rank_paths(defended, "AV2", "C1");
    std::cout << agr::render_report_text(after) << "\n";

    std::cout << "max risk: " << agr::format_risk(before.max_risk_coefficient(), std::nullopt) << " -> "
              << agr::format_risk(after.max_risk_coefficient(), std::nullopt) << "\n";
    return 0;
}
