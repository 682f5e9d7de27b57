#include "doctest.h"
#include "gopt/executor.hpp"
#include "gopt/type_inference.hpp"
#include "support/fixtures.hpp"

using namespace gopt;
using namespace gopt::testing;

namespace {

// The worked example: triangle v1->v2 (e1), v2->v3 (e2), v1->v3 (e3) with
// only v3 typed Place.
PatternGraph example_triangle() {
  PatternGraph p;
  p.vertices.push_back(PatternVertex{"v1", TypeConstraint::all(), nullptr});
  p.vertices.push_back(PatternVertex{"v2", TypeConstraint::all(), nullptr});
  p.vertices.push_back(
      PatternVertex{"v3", TypeConstraint::basic("Place"), nullptr});
  p.edges.push_back(PatternEdge{"e1", "v1", "v2", EdgeDir::Out,
                                TypeConstraint::all(), nullptr});
  p.edges.push_back(PatternEdge{"e2", "v2", "v3", EdgeDir::Out,
                                TypeConstraint::all(), nullptr});
  p.edges.push_back(PatternEdge{"e3", "v1", "v3", EdgeDir::Out,
                                TypeConstraint::all(), nullptr});
  return p;
}

}  // namespace

TEST_CASE("inference narrows the example triangle exactly") {
  InferenceResult r = infer_types(example_triangle(), example_schema());
  REQUIRE(is_valid(r));
  const PatternGraph& p = valid_pattern(r);
  CHECK(p.find_vertex("v1")->types == TypeConstraint::basic("Person"));
  CHECK(p.find_vertex("v2")->types ==
        TypeConstraint::of({"Person", "Product"}));
  CHECK(p.find_vertex("v3")->types == TypeConstraint::basic("Place"));
  CHECK(p.find_edge("e1")->types == TypeConstraint::of({"Knows", "Purchase"}));
  CHECK(p.find_edge("e2")->types ==
        TypeConstraint::of({"LocatedIn", "ProducedIn"}));
  CHECK(p.find_edge("e3")->types == TypeConstraint::basic("LocatedIn"));
}

TEST_CASE("no edge type connects Place to Place") {
  PatternGraph p;
  p.vertices.push_back(
      PatternVertex{"v2", TypeConstraint::basic("Place"), nullptr});
  p.vertices.push_back(
      PatternVertex{"v3", TypeConstraint::basic("Place"), nullptr});
  p.edges.push_back(PatternEdge{"e", "v2", "v3", EdgeDir::Out,
                                TypeConstraint::all(), nullptr});
  InferenceResult r = infer_types(p, example_schema());
  CHECK(!is_valid(r));
}

TEST_CASE("isolated all-typed vertex keeps every type") {
  PatternGraph p;
  p.vertices.push_back(PatternVertex{"v", TypeConstraint::all(), nullptr});
  InferenceResult r = infer_types(p, example_schema());
  REQUIRE(is_valid(r));
  CHECK(valid_pattern(r).find_vertex("v")->types ==
        TypeConstraint::of({"Person", "Product", "Place"}));
}

TEST_CASE("unknown constraint member is invalid immediately") {
  PatternGraph p;
  p.vertices.push_back(
      PatternVertex{"v", TypeConstraint::basic("Ghost"), nullptr});
  InferenceResult r = infer_types(p, example_schema());
  REQUIRE(!is_valid(r));
  CHECK(invalid_alias(r) == "v");
}

TEST_CASE("narrowing never widens and is idempotent") {
  for (int seed = 0; seed < 40; ++seed) {
    RandomPatternSpec spec;
    spec.vertices = 2 + seed % 3;
    spec.extra_edges = seed % 2;
    spec.seed = seed;
    PatternGraph p = random_example_pattern(spec);
    GraphSchema schema = example_schema();
    InferenceResult r = infer_types(p, schema);
    if (!is_valid(r)) continue;
    const PatternGraph& narrowed = valid_pattern(r);
    auto vt = schema.vertex_types();
    auto et = schema.edge_type_names();
    for (const auto& v : narrowed.vertices) {
      auto before = p.find_vertex(v.alias)->types.resolve(vt);
      for (const auto& t : v.types.resolve(vt)) CHECK(before.count(t));
    }
    for (const auto& e : narrowed.edges) {
      auto before = p.find_edge(e.alias)->types.resolve(et);
      for (const auto& t : e.types.resolve(et)) CHECK(before.count(t));
    }
    InferenceResult again = infer_types(narrowed, schema);
    REQUIRE(is_valid(again));
    const PatternGraph& twice = valid_pattern(again);
    for (const auto& v : twice.vertices)
      CHECK(v.types == narrowed.find_vertex(v.alias)->types);
    for (const auto& e : twice.edges)
      CHECK(e.types == narrowed.find_edge(e.alias)->types);
  }
}

TEST_CASE("soundness: inference never excludes a realizable match") {
  // Every oracle match of the original pattern satisfies the narrowed
  // constraints; Invalid means zero matches.
  int checked = 0;
  for (int seed = 0; seed < 30; ++seed) {
    RandomGraphSpec gs;
    gs.vertices = 12 + seed % 10;
    gs.edges = 25 + seed;
    gs.seed = seed;
    DataGraph g = random_example_graph(gs);
    RandomPatternSpec ps;
    ps.vertices = 2 + seed % 3;
    ps.extra_edges = seed % 2;
    ps.seed = seed * 3 + 1;
    ps.allow_both = seed % 4 == 0;
    PatternGraph p = random_example_pattern(ps);
    GraphSchema schema = example_schema();

    ResultSet matches = oracle_match(p, g, Semantics::Homomorphism);
    InferenceResult r = infer_types(p, schema);
    if (!is_valid(r)) {
      CHECK(matches.empty());
      continue;
    }
    const PatternGraph& narrowed = valid_pattern(r);
    for (const auto& rec : matches) {
      ++checked;
      for (const auto& v : narrowed.vertices) {
        const auto& ref = std::get<VertexRef>(rec.at(v.alias));
        CHECK(v.types.contains(g.vertex(ref.id).type));
      }
      for (const auto& e : narrowed.edges) {
        const auto& ref = std::get<EdgeRef>(rec.at(e.alias));
        CHECK(e.types.contains(g.edge(ref.id).type));
      }
    }
  }
  CHECK(checked > 100);  // the corpus actually exercised matches
}
