#include "doctest.h"
#include "gopt/parser.hpp"

using namespace gopt;

TEST_CASE("running query parses into join of two patterns") {
  const char* q = R"(
    MATCH (v1)-[e1]->(v2), (v2)-[e2]->(v3)
    MATCH (v1)-[e3]->(v3:Place)
    WHERE v3.name = 'China'
    RETURN v2, count(v2) AS cnt
    ORDER BY cnt ASC
    LIMIT 10)";
  GirPlan plan = parse_query(q);
  REQUIRE(validate(plan).empty());
  const GirNode& limit = plan.node(plan.sink);
  REQUIRE(std::holds_alternative<LimitOpL>(limit.data));
  CHECK(std::get<LimitOpL>(limit.data).count == 10);
  const GirNode& order = plan.node(limit.inputs[0]);
  REQUIRE(std::holds_alternative<OrderOpL>(order.data));
  const GirNode& group = plan.node(order.inputs[0]);
  const auto& gop = std::get<GroupOpL>(group.data);
  REQUIRE(gop.keys.size() == 1);
  CHECK(gop.keys[0].alias == "v2");
  REQUIRE(gop.aggs.size() == 1);
  CHECK(gop.aggs[0].fn == AggFn::Count);
  CHECK(gop.aggs[0].alias == "cnt");
  const GirNode& select = plan.node(group.inputs[0]);
  REQUIRE(std::holds_alternative<SelectOpL>(select.data));
  const GirNode& join = plan.node(select.inputs[0]);
  const auto& jop = std::get<JoinOpL>(join.data);
  CHECK(jop.type == JoinType::Inner);
  CHECK(jop.keys == std::vector<std::string>{"v1", "v3"});
  const auto& p1 =
      std::get<MatchPatternOp>(plan.node(join.inputs[0]).data).graph;
  const auto& p2 =
      std::get<MatchPatternOp>(plan.node(join.inputs[1]).data).graph;
  CHECK(p1.vertices.size() == 3);
  CHECK(p1.edges.size() == 2);
  CHECK(p2.vertices.size() == 2);
  CHECK(p2.edges.size() == 1);
  CHECK(p2.find_vertex("v3")->types == TypeConstraint::basic("Place"));
}

TEST_CASE("single node query") {
  GirPlan plan = parse_query("MATCH (a) RETURN a");
  const GirNode& proj = plan.node(plan.sink);
  REQUIRE(std::holds_alternative<ProjectOpL>(proj.data));
  const auto& mp = std::get<MatchPatternOp>(plan.node(proj.inputs[0]).data);
  CHECK(mp.graph.vertices.size() == 1);
}

TEST_CASE("zero-length paths are a syntax error") {
  CHECK_THROWS_AS(parse_query("MATCH (a)-[*0]->(b) RETURN a"), SyntaxError);
}

TEST_CASE("syntax errors carry position") {
  try {
    parse_query("MATCH (a RETURN a");
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.line == 1);
    CHECK(e.col > 1);
  }
}

TEST_CASE("unknown alias in WHERE is rejected") {
  CHECK_THROWS_AS(parse_query("MATCH (a) WHERE b.x = 1 RETURN a"),
                  SyntaxError);
}

TEST_CASE("unknown alias in RETURN is rejected") {
  CHECK_THROWS_AS(parse_query("MATCH (a) RETURN zz"), SyntaxError);
}

TEST_CASE("map props desugar to equality predicates") {
  GirPlan plan = parse_query("MATCH (a:Person {name: 'ann', age: 30}) RETURN a");
  const GirNode& proj = plan.node(plan.sink);
  const auto& mp = std::get<MatchPatternOp>(plan.node(proj.inputs[0]).data);
  const PatternVertex* a = mp.graph.find_vertex("a");
  REQUIRE(a->predicate);
  CHECK(a->predicate->to_string() == "a.name = 'ann' AND a.age = 30");
}

TEST_CASE("edge directions and unions parse") {
  GirPlan plan = parse_query(
      "MATCH (a)<-[e:Knows|Likes]-(b), (a)-[f]-(c) RETURN a, b, c");
  const GirNode& proj = plan.node(plan.sink);
  const auto& g = std::get<MatchPatternOp>(plan.node(proj.inputs[0]).data).graph;
  const PatternEdge* e = g.find_edge("e");
  REQUIRE(e != nullptr);
  CHECK(e->dir == EdgeDir::In);
  CHECK(e->src() == "b");
  CHECK(e->dst() == "a");
  CHECK(e->types == TypeConstraint::of({"Knows", "Likes"}));
  const PatternEdge* f = g.find_edge("f");
  CHECK(f->is_both());
}

TEST_CASE("optional match becomes a left outer join") {
  GirPlan plan = parse_query(
      "MATCH (a)-[e]->(b) OPTIONAL MATCH (b)-[f]->(c) RETURN a, b");
  // project <- join(left_outer)
  const GirNode& proj = plan.node(plan.sink);
  const GirNode& join = plan.node(proj.inputs[0]);
  CHECK(std::get<JoinOpL>(join.data).type == JoinType::LeftOuter);
  CHECK(std::get<JoinOpL>(join.data).keys == std::vector<std::string>{"b"});
}

TEST_CASE("keywords are case-insensitive, identifiers are not") {
  GirPlan plan = parse_query("match (Ann)-[e]->(b) return Ann, b");
  auto aliases = plan.output_aliases(plan.sink);
  CHECK(aliases.count("Ann"));
}

TEST_CASE("aggregates require grouping by the non-aggregated items") {
  GirPlan plan = parse_query("MATCH (a)-[e]->(b) RETURN a, min(b.age)");
  const auto& gop = std::get<GroupOpL>(plan.node(plan.sink).data);
  CHECK(gop.keys.size() == 1);
  CHECK(gop.aggs.size() == 1);
  CHECK(gop.aggs[0].fn == AggFn::Min);
  CHECK(gop.aggs[0].alias == "min(b.age)");
}

TEST_CASE("global aggregate has no keys") {
  GirPlan plan = parse_query("MATCH (a) RETURN count(a)");
  const auto& gop = std::get<GroupOpL>(plan.node(plan.sink).data);
  CHECK(gop.keys.empty());
  CHECK(gop.aggs.size() == 1);
}

TEST_CASE("print_query round-trips parsed plans") {
  const char* queries[] = {
      "MATCH (a)-[e]->(b) RETURN a, b",
      "MATCH (a:Person)-[e:Knows]->(b:Person) WHERE a.age > 30 RETURN b",
      "MATCH (v1)-[e1]->(v2), (v2)-[e2]->(v3) MATCH (v1)-[e3]->(v3:Place) "
      "RETURN v2, count(v2) AS cnt ORDER BY cnt ASC LIMIT 10",
      "MATCH (a:Person|Product)-[e]-(b) RETURN a AS x, b",
      "MATCH (a)-[p:Knows*2]->(b) RETURN a, b",
      "MATCH (a {name: 'x'})-[e]->(b) RETURN a, e, b",
  };
  for (const char* q : queries) {
    CAPTURE(q);
    GirPlan plan = parse_query(q);
    std::string printed = print_query(plan);
    CAPTURE(printed);
    GirPlan reparsed = parse_query(printed);
    CHECK(plans_equal(plan, reparsed));
  }
}

TEST_CASE("DISTINCT only combines with COUNT") {
  CHECK_THROWS_AS(parse_query("MATCH (a) RETURN sum(DISTINCT a.x)"),
                  SyntaxError);
  GirPlan ok = parse_query("MATCH (a)-[e]->(b) RETURN a, count(DISTINCT b)");
  const auto& gop = std::get<GroupOpL>(ok.node(ok.sink).data);
  CHECK(gop.aggs[0].fn == AggFn::CountDistinct);
}
