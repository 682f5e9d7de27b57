#include "doctest.h"
#include "gopt/executor.hpp"
#include "gopt/glogue.hpp"
#include "support/fixtures.hpp"

using namespace gopt;
using namespace gopt::testing;

namespace {

PatternGraph basic_pattern(
    std::vector<std::pair<std::string, std::string>> verts,
    std::vector<std::tuple<std::string, std::string, std::string, std::string>>
        edges) {
  PatternGraph p;
  for (auto& [alias, type] : verts)
    p.vertices.push_back(
        PatternVertex{alias, TypeConstraint::basic(type), nullptr});
  int i = 0;
  for (auto& [from, to, type, alias] : edges) {
    std::string a = alias.empty() ? "e" + std::to_string(i) : alias;
    ++i;
    p.edges.push_back(PatternEdge{a, from, to, EdgeDir::Out,
                                  TypeConstraint::basic(type), nullptr});
  }
  return p;
}

}  // namespace

TEST_CASE("canonical codes identify isomorphic patterns") {
  // Triangle written with two different alias orders.
  auto t1 = basic_pattern({{"a", "Person"}, {"b", "Person"}, {"c", "Place"}},
                          {{"a", "b", "Knows", ""},
                           {"b", "c", "LocatedIn", ""},
                           {"a", "c", "LocatedIn", ""}});
  auto t2 = basic_pattern({{"x", "Place"}, {"y", "Person"}, {"z", "Person"}},
                          {{"y", "z", "Knows", ""},
                           {"z", "x", "LocatedIn", ""},
                           {"y", "x", "LocatedIn", ""}});
  CHECK(canonicalize(t1) == canonicalize(t2));
}

TEST_CASE("a directed 2-path differs from its reversal with asymmetric types") {
  auto p1 = basic_pattern({{"a", "Person"}, {"b", "Product"}},
                          {{"a", "b", "Purchase", ""}});
  PatternGraph p2 = p1;
  std::swap(p2.edges[0].from, p2.edges[0].to);
  // Purchase now runs Product->Person: structurally distinct.
  CHECK(canonicalize(p1) != canonicalize(p2));
}

TEST_CASE("all 2-vertex basic patterns get pairwise distinct codes") {
  // Exhaustive over a 2-type schema: types A, B; edges K: A->A, L: A->B.
  std::vector<PatternGraph> patterns;
  const std::vector<std::string> vt{"A", "B"};
  for (const auto& t0 : vt)
    for (const auto& t1 : vt)
      for (int mask = 0; mask < 16; ++mask) {
        PatternGraph p;
        p.vertices.push_back(
            PatternVertex{"u", TypeConstraint::basic(t0), nullptr});
        p.vertices.push_back(
            PatternVertex{"v", TypeConstraint::basic(t1), nullptr});
        int eid = 0;
        auto add = [&](const std::string& from, const std::string& to,
                       const std::string& type) {
          p.edges.push_back(PatternEdge{"e" + std::to_string(eid++), from, to,
                                        EdgeDir::Out,
                                        TypeConstraint::basic(type), nullptr});
        };
        if (mask & 1) add("u", "v", "K");
        if (mask & 2) add("v", "u", "K");
        if (mask & 4) add("u", "v", "L");
        if (mask & 8) add("v", "u", "L");
        if (p.edges.empty()) continue;
        patterns.push_back(std::move(p));
      }
  // Codes must collide exactly for isomorphic pairs (vertex swap).
  std::map<std::string, int> by_code;
  for (const auto& p : patterns) ++by_code[canonicalize(p)];
  // Count patterns up to isomorphism by brute force: swapped-vertex pairs.
  // With 2 vertices the only nontrivial mapping is the swap, so the number
  // of distinct codes must equal the number of swap-orbits.
  std::set<std::string> seen;
  int orbits = 0;
  for (const auto& p : patterns) {
    PatternGraph swapped = p;
    std::swap(swapped.vertices[0], swapped.vertices[1]);
    std::string key_a = canonicalize(p);
    if (seen.insert(key_a).second) ++orbits;
  }
  CHECK(static_cast<int>(by_code.size()) == orbits);
}

TEST_CASE("canonicalize rejects non-basic constraints") {
  PatternGraph p;
  p.vertices.push_back(PatternVertex{"v", TypeConstraint::all(), nullptr});
  CHECK_THROWS_AS(canonicalize(p), PatternError);
}

TEST_CASE("glogue of a single Knows edge") {
  DataGraph g;
  g.add_vertex(1, "Person");
  g.add_vertex(2, "Person");
  g.add_edge(10, 1, 2, "Knows");
  g.finalize();
  Glogue gl = Glogue::build(g, 2);
  auto edge = basic_pattern({{"a", "Person"}, {"b", "Person"}},
                            {{"a", "b", "Knows", ""}});
  CHECK(gl.lookup(canonicalize(edge)) == 1);
}

TEST_CASE("glogue on a self-loop counts homomorphisms") {
  DataGraph g;
  g.add_vertex(1, "Person");
  g.add_edge(10, 1, 1, "Knows");
  g.finalize();
  Glogue gl = Glogue::build(g, 3);
  auto edge = basic_pattern({{"a", "Person"}, {"b", "Person"}},
                            {{"a", "b", "Knows", ""}});
  CHECK(gl.lookup(canonicalize(edge)) == 1);
  auto path2 = basic_pattern(
      {{"a", "Person"}, {"b", "Person"}, {"c", "Person"}},
      {{"a", "b", "Knows", ""}, {"b", "c", "Knows", ""}});
  CHECK(gl.lookup(canonicalize(path2)) == 1);
  // The loop pattern itself.
  auto loop = basic_pattern({{"a", "Person"}}, {{"a", "a", "Knows", ""}});
  CHECK(gl.lookup(canonicalize(loop)) == 1);
}

TEST_CASE("every stored frequency equals the oracle count") {
  // Criterion 4 runs many graphs in the acceptance suite; spot-check the
  // mechanism here on a couple of random graphs via oracle_match.
  for (int seed : {3, 7}) {
    RandomGraphSpec spec;
    spec.vertices = 16;
    spec.edges = 30;
    spec.seed = seed;
    DataGraph g = random_example_graph(spec);
    Glogue gl = Glogue::build(g, 3);
    CHECK(!gl.patterns().empty());
    int checked = 0;
    for (const auto& [code, freq] : gl.patterns()) {
      ++checked;
      (void)code;
      CHECK(freq > 0);
    }
    CHECK(checked > 0);
    // Re-counting a few known shapes through the oracle.
    auto knows = basic_pattern({{"a", "Person"}, {"b", "Person"}},
                               {{"a", "b", "Knows", ""}});
    auto via_oracle =
        oracle_match(knows, g, Semantics::Homomorphism).size();
    CHECK(gl.lookup(canonicalize(knows)) ==
          static_cast<int64_t>(via_oracle));
    auto wedge = basic_pattern(
        {{"a", "Person"}, {"b", "Person"}, {"c", "Place"}},
        {{"a", "b", "Knows", ""}, {"b", "c", "LocatedIn", ""}});
    CHECK(gl.lookup(canonicalize(wedge)) ==
          static_cast<int64_t>(
              oracle_match(wedge, g, Semantics::Homomorphism).size()));
  }
}

TEST_CASE("stats JSON round-trips") {
  DataGraph g = random_example_graph({14, 28, 5});
  Glogue gl = Glogue::build(g, 3);
  Glogue back = Glogue::from_json(gl.to_json());
  CHECK(back.k() == gl.k());
  CHECK(back.patterns() == gl.patterns());
  CHECK(back.type_freq().vertex_counts == gl.type_freq().vertex_counts);
  CHECK(back.type_freq().triplet_counts == gl.type_freq().triplet_counts);
}

TEST_CASE("expand ratios reproduce the worked example") {
  DataGraph g = cardinality_fixture();
  Glogue gl = Glogue::build(g, 3);
  GraphSchema schema = example_schema();
  GlogueQuery gq(gl, &schema);

  // Opening e2 with union types: (LocatedIn+ProducedIn)/(Person+Product).
  double s2 = gq.expand_ratio(TypeConstraint::of({"LocatedIn", "ProducedIn"}),
                              TypeConstraint::of({"Person", "Product"}),
                              TypeConstraint::basic("Place"), false);
  CHECK(s2 == doctest::Approx(1.0));
  // Closing e3: LocatedIn/(Person * Place).
  double s3 = gq.expand_ratio(TypeConstraint::basic("LocatedIn"),
                              TypeConstraint::basic("Person"),
                              TypeConstraint::basic("Place"), true);
  CHECK(s3 == doctest::Approx(0.2));
  // All-typed edge numerator covers the whole edge count.
  double sall = gq.expand_ratio(TypeConstraint::all(),
                                TypeConstraint::all(),
                                TypeConstraint::all(), false);
  CHECK(sall ==
        doctest::Approx(static_cast<double>(gl.type_freq().total_edges()) /
                        static_cast<double>(gl.type_freq().total_vertices())));
}

TEST_CASE("get_freq reproduces the worked estimate of 14") {
  DataGraph g = cardinality_fixture();
  Glogue gl = Glogue::build(g, 3);
  GraphSchema schema = example_schema();
  GlogueQuery gq(gl, &schema);

  // P_s: (v1:Person)-[e1:Knows|Purchase]->(v2:Person|Product).
  PatternGraph ps;
  ps.vertices.push_back(
      PatternVertex{"v1", TypeConstraint::basic("Person"), nullptr});
  ps.vertices.push_back(
      PatternVertex{"v2", TypeConstraint::of({"Person", "Product"}), nullptr});
  ps.edges.push_back(PatternEdge{"e1", "v1", "v2", EdgeDir::Out,
                                 TypeConstraint::of({"Knows", "Purchase"}),
                                 nullptr});
  CHECK(gq.get_freq(ps) == doctest::Approx(70.0));

  // P_t: close the triangle with e2 (union) and e3 (LocatedIn).
  PatternGraph pt = ps;
  pt.vertices.push_back(
      PatternVertex{"v3", TypeConstraint::basic("Place"), nullptr});
  pt.edges.push_back(PatternEdge{"e2", "v2", "v3", EdgeDir::Out,
                                 TypeConstraint::of({"LocatedIn", "ProducedIn"}),
                                 nullptr});
  pt.edges.push_back(PatternEdge{"e3", "v1", "v3", EdgeDir::Out,
                                 TypeConstraint::basic("LocatedIn"), nullptr});
  CHECK(gq.get_freq(pt) == doctest::Approx(14.0));
}

TEST_CASE("single all-typed vertex estimates |V|") {
  DataGraph g = cardinality_fixture();
  Glogue gl = Glogue::build(g, 2);
  GlogueQuery gq(gl);
  PatternGraph p;
  p.vertices.push_back(PatternVertex{"v", TypeConstraint::all(), nullptr});
  CHECK(gq.get_freq(p) == doctest::Approx(35.0));
}

TEST_CASE("basic patterns within k are exact") {
  DataGraph g = random_example_graph({18, 36, 11});
  Glogue gl = Glogue::build(g, 3);
  GraphSchema schema = example_schema();
  GlogueQuery gq(gl, &schema);
  auto tri = basic_pattern(
      {{"a", "Person"}, {"b", "Product"}, {"c", "Place"}},
      {{"a", "b", "Purchase", ""},
       {"b", "c", "ProducedIn", ""},
       {"a", "c", "LocatedIn", ""}});
  auto exact = oracle_match(tri, g, Semantics::Homomorphism).size();
  CHECK(gq.get_freq(tri) == doctest::Approx(static_cast<double>(exact)));
}

TEST_CASE("monotone zero on unrealizable elements") {
  DataGraph g = cardinality_fixture();
  Glogue gl = Glogue::build(g, 2);
  GraphSchema schema = example_schema();
  schema.add_vertex_type("Ghost");
  GlogueQuery gq(gl, &schema);
  PatternGraph p;
  p.vertices.push_back(
      PatternVertex{"v", TypeConstraint::basic("Ghost"), nullptr});
  CHECK(gq.get_freq(p) == doctest::Approx(0.0));
}

TEST_CASE("union freq equals the sum of basic instantiations for edges") {
  DataGraph g = random_example_graph({20, 45, 23});
  Glogue gl = Glogue::build(g, 2);
  GraphSchema schema = example_schema();
  GlogueQuery gq(gl, &schema);
  // Exhaustive over single-edge patterns with union endpoints.
  const std::vector<std::string> vt{"Person", "Product", "Place"};
  for (size_t i = 0; i < vt.size(); ++i)
    for (size_t j = 0; j < vt.size(); ++j) {
      if (i == j) continue;
      PatternGraph u;
      u.vertices.push_back(
          PatternVertex{"a", TypeConstraint::of({vt[i], vt[j]}), nullptr});
      u.vertices.push_back(PatternVertex{"b", TypeConstraint::all(), nullptr});
      u.edges.push_back(PatternEdge{"e", "a", "b", EdgeDir::Out,
                                    TypeConstraint::all(), nullptr});
      double whole = gq.get_freq(u);
      double parts = 0;
      for (const auto& t : {vt[i], vt[j]}) {
        PatternGraph b = u;
        b.vertices[0].types = TypeConstraint::basic(t);
        parts += gq.get_freq(b);
      }
      CHECK(whole == doctest::Approx(parts));
    }
}

TEST_CASE("memoized estimates are stable and permutation-invariant") {
  DataGraph g = random_example_graph({16, 30, 5});
  Glogue gl = Glogue::build(g, 3);
  GlogueQuery gq(gl);
  auto p = basic_pattern(
      {{"a", "Person"}, {"b", "Person"}, {"c", "Place"}},
      {{"a", "b", "Knows", ""}, {"b", "c", "LocatedIn", ""}});
  double f1 = gq.get_freq(p);
  PatternGraph shuffled = p;
  std::swap(shuffled.vertices[0], shuffled.vertices[2]);
  std::reverse(shuffled.edges.begin(), shuffled.edges.end());
  CHECK(gq.get_freq(shuffled) == doctest::Approx(f1));
  CHECK(gq.get_freq(p) == doctest::Approx(f1));
}

TEST_CASE("predicates multiply the fixed selectivity") {
  DataGraph g = cardinality_fixture();
  Glogue gl = Glogue::build(g, 2);
  GlogueQuery gq(gl);
  PatternGraph p;
  p.vertices.push_back(
      PatternVertex{"v", TypeConstraint::basic("Person"), nullptr});
  double base = gq.get_freq(p);
  p.vertices[0].predicate = parse_expr_text("v.id = 3");
  CHECK(gq.get_freq(p) == doctest::Approx(base * 0.1));
}

TEST_CASE("k outside the supported range is rejected") {
  DataGraph g = cardinality_fixture();
  CHECK_THROWS_AS(Glogue::build(g, 5), StatsError);
  CHECK_THROWS_AS(Glogue::build(g, 1), StatsError);
}
