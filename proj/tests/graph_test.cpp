#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "agr/graph.hpp"
#include "support/oracle.hpp"

using nlohmann::json;
using namespace agr;

namespace {

json two_vertex_spec(json edge) {
    return {{"vertices", {{{"id", "A"}, {"kind", "attack_vector"}}, {{"id", "L"}, {"kind", "location"}}}},
            {"edges", {edge}}};
}

std::vector<std::string> codes_of(const json& spec) {
    try {
        build_graph(spec);
    } catch (const ValidationError& e) {
        std::vector<std::string> out;
        for (const auto& v : e.violations()) out.push_back(v.code);
        return out;
    }
    return {};
}

bool has_code(const std::vector<std::string>& codes, const std::string& code) {
    return std::find(codes.begin(), codes.end(), code) != codes.end();
}

}  // namespace

TEST(EdgeWeight, IsReciprocalOfProbability) {
    EXPECT_DOUBLE_EQ(edge_weight(1.0), 1.0);
    EXPECT_DOUBLE_EQ(edge_weight(0.5), 2.0);
    EXPECT_DOUBLE_EQ(edge_weight(0.05), 20.0);
    EXPECT_DOUBLE_EQ(edge_weight(0.125), 8.0);
}

TEST(EdgeWeight, RejectsOutOfRange) {
    EXPECT_THROW(edge_weight(0.0), DomainError);
    EXPECT_THROW(edge_weight(-0.1), DomainError);
    EXPECT_THROW(edge_weight(1.0000001), DomainError);
    EXPECT_THROW(edge_weight(std::nan("")), DomainError);
    EXPECT_THROW(edge_weight(INFINITY), DomainError);
}

TEST(EdgeWeight, ZeroProbabilityMessageSuggestsOmittingEdge) {
    try {
        edge_weight(0.0);
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("omit"), std::string::npos);
    }
}

TEST(ExploitationProbability, MatchesWorkedExample) {
    // 0.62 * 0.44 * 0.85 * 0.85 / 1 = 0.19709...
    ExploitMetrics m{0.62, 0.44, 0.85, 0.85, 1.0};
    EXPECT_NEAR(exploitation_probability(m), 0.1971, 5e-5);
    EXPECT_DOUBLE_EQ(exploitation_probability(m), 0.62 * 0.44 * 0.85 * 0.85);
}

TEST(ExploitationProbability, RemediationLevelDivides) {
    ExploitMetrics m{1.0, 1.0, 1.0, 1.0, 4.0};
    EXPECT_DOUBLE_EQ(exploitation_probability(m), 0.25);
}

TEST(ExploitationProbability, RejectsOutOfRangeMetrics) {
    EXPECT_THROW(exploitation_probability({0.0, 1, 1, 1, 1}), DomainError);
    EXPECT_THROW(exploitation_probability({1, 1.5, 1, 1, 1}), DomainError);
    EXPECT_THROW(exploitation_probability({1, 1, -0.2, 1, 1}), DomainError);
    EXPECT_THROW(exploitation_probability({1, 1, 1, 2, 1}), DomainError);
    EXPECT_THROW(exploitation_probability({1, 1, 1, 1, 0.5}), DomainError);
}

TEST(BuildGraph, ManufacturingFixtureShape) {
    AttackGraph g = test::manufacturing_graph();
    EXPECT_EQ(g.vertex_count(), 11u);
    EXPECT_EQ(g.edge_count(), 13u);
    EXPECT_EQ(g.count(VertexKind::attack_vector), 2u);
    EXPECT_EQ(g.count(VertexKind::location), 8u);
    EXPECT_EQ(g.count(VertexKind::consequence), 1u);
    EXPECT_EQ(g.find_vertex("L6")->label, "Hybrid CNC machine");
    ASSERT_NE(g.find_edge("L4", "L6"), nullptr);
    EXPECT_DOUBLE_EQ(g.find_edge("L4", "L6")->probability, 0.9);
    EXPECT_EQ(g.find_edge("L6", "L4"), nullptr);
}

TEST(BuildGraph, WeightsStoredAsExactReciprocals) {
    AttackGraph g = test::manufacturing_graph();
    for (const auto& e : g.edges()) EXPECT_EQ(e.weight, 1.0 / e.probability) << e.name();
}

TEST(BuildGraph, AdjacencySortedByWeightThenId) {
    AttackGraph g = build_graph(json{
        {"vertices",
         {{{"id", "A"}, {"kind", "attack_vector"}},
          {{"id", "Lz"}, {"kind", "location"}},
          {{"id", "La"}, {"kind", "location"}},
          {{"id", "Lm"}, {"kind", "location"}}}},
        {"edges",
         {{{"from", "A"}, {"to", "Lz"}, {"probability", 0.5}},
          {{"from", "A"}, {"to", "La"}, {"probability", 0.25}},
          {{"from", "A"}, {"to", "Lm"}, {"probability", 0.5}}}}});
    auto adj = g.adjacency(*g.index_of("A"));
    ASSERT_EQ(adj.size(), 3u);
    EXPECT_EQ(g.vertex(adj[0].to).id, "Lm");
    EXPECT_EQ(g.vertex(adj[1].to).id, "Lz");
    EXPECT_EQ(g.vertex(adj[2].to).id, "La");
}

TEST(BuildGraph, LabelDefaultsToId) {
    AttackGraph g = build_graph(two_vertex_spec({{"from", "A"}, {"to", "L"}, {"probability", 0.5}}));
    EXPECT_EQ(g.find_vertex("A")->label, "A");
}

TEST(BuildGraph, MetricsDeriveProbability) {
    AttackGraph g = build_graph(two_vertex_spec(
        {{"from", "A"}, {"to", "L"}, {"metrics", {{"av", 0.62}, {"ac", 0.44}, {"pr", 0.85}, {"ui", 0.85}, {"rl", 1}}}}));
    const Edge* e = g.find_edge("A", "L");
    ASSERT_NE(e, nullptr);
    ASSERT_TRUE(e->metrics.has_value());
    EXPECT_NEAR(e->probability, 0.1971, 5e-5);
    EXPECT_DOUBLE_EQ(e->weight, 1.0 / e->probability);
}

TEST(BuildGraph, ConsequenceCost) {
    AttackGraph g = build_graph(json{{"vertices",
                                      {{{"id", "A"}, {"kind", "attack_vector"}},
                                       {{"id", "L"}, {"kind", "location"}},
                                       {{"id", "C"}, {"kind", "consequence"}, {"cost", 2500000}}}},
                                     {"edges",
                                      {{{"from", "A"}, {"to", "L"}, {"probability", 0.5}},
                                       {{"from", "L"}, {"to", "C"}, {"probability", 0.5}}}}});
    EXPECT_EQ(g.consequence_cost("C"), 2500000.0);
    EXPECT_FALSE(g.consequence_cost("L").has_value());
}

TEST(BuildGraph, EmptyGraphIsValid) {
    AttackGraph g = build_graph(json::object());
    EXPECT_EQ(g.vertex_count(), 0u);
    EXPECT_EQ(g.edge_count(), 0u);
}

TEST(BuildGraph, StructuralErrorsAreParseErrors) {
    EXPECT_THROW(build_graph(json::array()), ParseError);
    EXPECT_THROW(build_graph(json{{"vertices", 3}}), ParseError);
    EXPECT_THROW(build_graph(json{{"nodes", json::array()}}), ParseError);
    EXPECT_THROW(build_graph(json{{"vertices", {{{"id", "A"}, {"kind", "router"}}}}}), ParseError);
    EXPECT_THROW(build_graph(json{{"vertices", {{{"id", "A"}}}}}), ParseError);
    EXPECT_THROW(build_graph(json{{"vertices", {{{"id", 7}, {"kind", "location"}}}}}), ParseError);
    EXPECT_THROW(build_graph(two_vertex_spec({{"from", "A"}, {"to", "L"}, {"probability", "high"}})), ParseError);
    EXPECT_THROW(build_graph_text("{not json"), ParseError);
    EXPECT_THROW(build_graph(json{{"allow_direct_consequence", "yes"}}), ParseError);
}

TEST(BuildGraph, CollectsAllViolations) {
    json spec = {{"vertices",
                  {{{"id", "A"}, {"kind", "attack_vector"}},
                   {{"id", "L"}, {"kind", "location"}},
                   {{"id", "L"}, {"kind", "location"}},
                   {{"id", "C"}, {"kind", "consequence"}}}},
                 {"edges",
                  {{{"from", "L"}, {"to", "L"}, {"probability", 0.5}},
                   {{"from", "L"}, {"to", "A"}, {"probability", 0.5}},
                   {{"from", "C"}, {"to", "L"}, {"probability", 0.5}},
                   {{"from", "A"}, {"to", "L"}, {"probability", 1.5}}}}};
    auto codes = codes_of(spec);
    EXPECT_TRUE(has_code(codes, "duplicate_vertex"));
    EXPECT_TRUE(has_code(codes, "self_loop"));
    EXPECT_TRUE(has_code(codes, "attack_vector_in_edge"));
    EXPECT_TRUE(has_code(codes, "consequence_out_edge"));
    EXPECT_TRUE(has_code(codes, "probability_out_of_range"));
}

struct ForbiddenCase {
    const char* name;
    json spec;
    const char* code;
};

class ForbiddenConstruction : public ::testing::TestWithParam<ForbiddenCase> {};

TEST_P(ForbiddenConstruction, IsRejectedWithNamedViolation) {
    const auto& c = GetParam();
    auto codes = codes_of(c.spec);
    EXPECT_TRUE(has_code(codes, c.code)) << c.name;
}

namespace {

json three(json edges) {
    return {{"vertices",
             {{{"id", "A"}, {"kind", "attack_vector"}},
              {{"id", "L"}, {"kind", "location"}},
              {{"id", "M"}, {"kind", "location"}},
              {{"id", "C"}, {"kind", "consequence"}}}},
            {"edges", edges}};
}

json e(const char* f, const char* t, double p) { return {{"from", f}, {"to", t}, {"probability", p}}; }

}  // namespace

INSTANTIATE_TEST_SUITE_P(
    Validation, ForbiddenConstruction,
    ::testing::Values(
        ForbiddenCase{"av_in_edge", three({e("L", "A", 0.5)}), "attack_vector_in_edge"},
        ForbiddenCase{"c_out_edge", three({e("C", "L", 0.5)}), "consequence_out_edge"},
        ForbiddenCase{"self_loop", three({e("L", "L", 0.5)}), "self_loop"},
        ForbiddenCase{"duplicate_edge", three({e("L", "M", 0.5), e("L", "M", 0.4)}), "duplicate_edge"},
        ForbiddenCase{"p_zero", three({e("A", "L", 0.0)}), "probability_zero"},
        ForbiddenCase{"p_negative", three({e("A", "L", -0.5)}), "probability_out_of_range"},
        ForbiddenCase{"p_above_one", three({e("A", "L", 1.5)}), "probability_out_of_range"},
        ForbiddenCase{"metrics_and_probability",
                      three({{{"from", "A"},
                              {"to", "L"},
                              {"probability", 0.5},
                              {"metrics", {{"av", 1}, {"ac", 1}, {"pr", 1}, {"ui", 1}, {"rl", 1}}}}}),
                      "metrics_and_probability"},
        ForbiddenCase{"missing_probability", three({{{"from", "A"}, {"to", "L"}}}), "missing_probability"},
        ForbiddenCase{"metrics_off_vector_edge",
                      three({{{"from", "L"},
                              {"to", "M"},
                              {"metrics", {{"av", 1}, {"ac", 1}, {"pr", 1}, {"ui", 1}, {"rl", 1}}}}}),
                      "metrics_on_non_vector_edge"},
        ForbiddenCase{"metric_out_of_range",
                      three({{{"from", "A"},
                              {"to", "L"},
                              {"metrics", {{"av", 1}, {"ac", 1}, {"pr", 1}, {"ui", 1}, {"rl", 0.5}}}}}),
                      "metric_out_of_range"},
        ForbiddenCase{"direct_consequence", three({e("A", "C", 0.5)}), "forbidden_kind_pair"},
        ForbiddenCase{"unknown_vertex", three({e("A", "Q", 0.5)}), "unknown_vertex"},
        ForbiddenCase{"unresolved_tag",
                      json{{"vertices", {{{"id", "A"}, {"kind", "attack_vector"}, {"taxonomy", {"laser_beam"}}}}}},
                      "unresolved_tag"},
        ForbiddenCase{"empty_id", json{{"vertices", {{{"id", ""}, {"kind", "location"}}}}}, "empty_id"},
        ForbiddenCase{"cost_on_location", json{{"vertices", {{{"id", "L"}, {"kind", "location"}, {"cost", 3}}}}},
                      "cost_on_non_consequence"},
        ForbiddenCase{"negative_cost", json{{"vertices", {{{"id", "C"}, {"kind", "consequence"}, {"cost", -3}}}}},
                      "cost_out_of_range"}),
    [](const ::testing::TestParamInfo<ForbiddenCase>& info) { return std::string(info.param.name); });

TEST(BuildGraph, DirectConsequenceAllowedWithFlag) {
    json spec = three({e("A", "C", 0.5)});
    spec["allow_direct_consequence"] = true;
    AttackGraph g = build_graph(spec);
    EXPECT_TRUE(g.allow_direct_consequence());
    EXPECT_NE(g.find_edge("A", "C"), nullptr);
}

TEST(BuildGraph, KindPairWhitelist) {
    using K = VertexKind;
    EXPECT_TRUE(kind_pair_allowed(K::attack_vector, K::location, false));
    EXPECT_TRUE(kind_pair_allowed(K::location, K::location, false));
    EXPECT_TRUE(kind_pair_allowed(K::location, K::consequence, false));
    EXPECT_FALSE(kind_pair_allowed(K::attack_vector, K::consequence, false));
    EXPECT_TRUE(kind_pair_allowed(K::attack_vector, K::consequence, true));
    EXPECT_FALSE(kind_pair_allowed(K::attack_vector, K::attack_vector, true));
    EXPECT_FALSE(kind_pair_allowed(K::consequence, K::location, true));
    EXPECT_FALSE(kind_pair_allowed(K::location, K::attack_vector, true));
    EXPECT_FALSE(kind_pair_allowed(K::consequence, K::consequence, true));
}

TEST(BuildGraph, TagDimensionMismatchIsOnlyAWarning) {
    json spec = {{"vertices", {{{"id", "L"}, {"kind", "location"}, {"taxonomy", {"malware"}}}}}};
    AttackGraph g = build_graph(spec);
    auto tags = validate_tags(g, builtin_catalog());
    ASSERT_EQ(tags.size(), 1u);
    EXPECT_EQ(tags[0].code, "tag_dimension_mismatch");
}

TEST(BuildGraph, SpecRoundTripIsLossless) {
    AttackGraph g = test::manufacturing_graph();
    EXPECT_EQ(build_graph(to_spec_json(g)), g);

    AttackGraph m = build_graph(two_vertex_spec(
        {{"from", "A"}, {"to", "L"}, {"metrics", {{"av", 0.62}, {"ac", 0.44}, {"pr", 0.85}, {"ui", 0.85}, {"rl", 1}}}}));
    EXPECT_EQ(build_graph(to_spec_json(m)), m);
}

TEST(BuildGraph, DegreeProfile) {
    auto d = degree_profile(test::manufacturing_graph());
    EXPECT_EQ(d.at("AV1").in, 0u);
    EXPECT_EQ(d.at("AV1").out, 1u);
    EXPECT_EQ(d.at("AV2").out, 2u);
    EXPECT_EQ(d.at("L5").in, 2u);
    EXPECT_EQ(d.at("L5").out, 2u);
    EXPECT_EQ(d.at("L6").in, 3u);
    EXPECT_EQ(d.at("C1").in, 1u);
    EXPECT_EQ(d.at("C1").out, 0u);
}

TEST(ApplyUpdate, ChangesOnlyNamedEdges) {
    AttackGraph g = test::manufacturing_graph();
    AttackGraph h = apply_update(g, test::defense_update());
    EXPECT_DOUBLE_EQ(h.find_edge("L4", "L6")->probability, 0.1);
    EXPECT_DOUBLE_EQ(h.find_edge("L4", "L6")->weight, 10.0);
    EXPECT_DOUBLE_EQ(h.find_edge("L6", "L7")->probability, 0.6);
    EXPECT_DOUBLE_EQ(h.find_edge("AV2", "L2")->probability, 0.6);
    EXPECT_DOUBLE_EQ(g.find_edge("L4", "L6")->probability, 0.9);
    EXPECT_EQ(h.vertex_count(), g.vertex_count());
    EXPECT_EQ(h.edge_count(), g.edge_count());
}

TEST(ApplyUpdate, EmptyBatchIsIdentity) {
    AttackGraph g = test::manufacturing_graph();
    EXPECT_EQ(apply_update(g, std::vector<EdgeUpdate>{}), g);
}

TEST(ApplyUpdate, UnknownEdgeRejectsWholeBatch) {
    AttackGraph g = test::manufacturing_graph();
    std::vector<EdgeUpdate> batch{{"L4", "L6", 0.1}, {"L1", "L8", 0.5}};
    EXPECT_THROW(apply_update(g, batch), UnknownEdgeError);
    EXPECT_DOUBLE_EQ(g.find_edge("L4", "L6")->probability, 0.9);
}

TEST(ApplyUpdate, OutOfRangeIsDomainError) {
    AttackGraph g = test::manufacturing_graph();
    EXPECT_THROW(apply_update(g, std::vector<EdgeUpdate>{{"L4", "L6", 0.0}}), DomainError);
    EXPECT_THROW(apply_update(g, std::vector<EdgeUpdate>{{"L4", "L6", 1.2}}), DomainError);
    EXPECT_THROW(apply_update(g, std::vector<EdgeUpdate>{{"L4", "L6", ExploitMetrics{1, 1, 1, 1, 1}}}), DomainError);
}

TEST(ApplyUpdate, LaterEntriesWin) {
    AttackGraph g = test::manufacturing_graph();
    AttackGraph h = apply_update(g, std::vector<EdgeUpdate>{{"L4", "L6", 0.1}, {"L4", "L6", 0.4}});
    EXPECT_DOUBLE_EQ(h.find_edge("L4", "L6")->probability, 0.4);
}

TEST(ApplyUpdate, MetricsOnVectorEdge) {
    AttackGraph g = test::manufacturing_graph();
    AttackGraph h = apply_update(g, std::vector<EdgeUpdate>{{"AV1", "L6", ExploitMetrics{1, 0.5, 1, 1, 2}}});
    EXPECT_DOUBLE_EQ(h.find_edge("AV1", "L6")->probability, 0.25);
    ASSERT_TRUE(h.find_edge("AV1", "L6")->metrics.has_value());
    AttackGraph back = apply_update(h, std::vector<EdgeUpdate>{{"AV1", "L6", 0.2}});
    EXPECT_FALSE(back.find_edge("AV1", "L6")->metrics.has_value());
    EXPECT_EQ(back, g);
}

TEST(ParseUpdates, Shapes) {
    auto u = parse_updates_text(R"([{"from":"L4","to":"L6","probability":0.1}])");
    ASSERT_EQ(u.size(), 1u);
    EXPECT_EQ(u[0], (EdgeUpdate{"L4", "L6", 0.1}));
    EXPECT_THROW(parse_updates_text(R"({"from":"L4"})"), ParseError);
    EXPECT_THROW(parse_updates_text(R"([{"from":"L4","to":"L6"}])"), ParseError);
    EXPECT_THROW(parse_updates_text(R"([{"from":"L4","to":"L6","probability":0.1,"weight":3}])"), ParseError);
    EXPECT_THROW(parse_updates_text("[{"), ParseError);
    auto fixture = test::defense_update();
    json again = json::array();
    for (const auto& x : fixture) again.push_back(to_json(x));
    EXPECT_EQ(parse_updates(again), fixture);
}
