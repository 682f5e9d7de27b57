#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "gopt/graph.hpp"

using namespace gopt;

namespace {

// The running example schema: Person/Product/Place with four triplets.
GraphSchema example_schema() {
  GraphSchema s;
  s.add_vertex_type("Person");
  s.add_vertex_type("Product");
  s.add_vertex_type("Place");
  s.add_edge_triplet({"Person", "Knows", "Person"});
  s.add_edge_triplet({"Person", "Purchase", "Product"});
  s.add_edge_triplet({"Person", "LocatedIn", "Place"});
  s.add_edge_triplet({"Product", "ProducedIn", "Place"});
  return s;
}

}  // namespace

TEST_CASE("load_graph on the empty document") {
  DataGraph g = graph_from_json_text(R"({"vertices":[],"edges":[]})");
  CHECK(g.vertex_count() == 0);
  CHECK(g.edge_count() == 0);
}

TEST_CASE("load_graph builds symmetric adjacency") {
  const char* text = R"({
    "vertices":[
      {"id":1,"type":"Person","props":{"name":"ann"}},
      {"id":2,"type":"Product"},
      {"id":3,"type":"Place"}],
    "edges":[
      {"id":10,"src":1,"dst":2,"type":"Purchase"},
      {"id":11,"src":1,"dst":3,"type":"LocatedIn"},
      {"id":12,"src":2,"dst":3,"type":"ProducedIn"},
      {"id":13,"src":1,"dst":1,"type":"Knows"}]})";
  DataGraph g = graph_from_json_text(text);
  CHECK(g.vertex_count() == 3);
  CHECK(g.edge_count() == 4);
  // Every edge appears once in its source's out list and once in its
  // destination's in list.
  size_t out_total = 0, in_total = 0;
  for (const auto& [id, v] : g.vertices()) {
    out_total += v.out_edges.size();
    in_total += v.in_edges.size();
  }
  CHECK(out_total == 4);
  CHECK(in_total == 4);
  CHECK(g.vertex(1).out_edges.size() == 3);
  CHECK(g.vertex(1).in_edges.size() == 1);  // the self-loop
  CHECK(g.vertex_prop(1, "name")->as_string() == "ann");
}

TEST_CASE("load_graph rejects dangling endpoints") {
  const char* text = R"({
    "vertices":[{"id":1,"type":"Person"}],
    "edges":[{"id":10,"src":1,"dst":99,"type":"Knows"}]})";
  CHECK_THROWS_AS(graph_from_json_text(text), GraphError);
}

TEST_CASE("load_graph checks declared property kinds") {
  GraphSchema s;
  s.add_vertex_type("Person", {{"age", PropertyValue::Kind::Int}});
  const char* bad = R"({
    "vertices":[{"id":1,"type":"Person","props":{"age":"old"}}],
    "edges":[]})";
  CHECK_THROWS_AS(graph_from_json_text(bad, &s), GraphError);
  const char* good = R"({
    "vertices":[{"id":1,"type":"Person","props":{"age":30}}],
    "edges":[]})";
  CHECK_NOTHROW(graph_from_json_text(good, &s));
}

TEST_CASE("schema JSON round-trips the paper schema") {
  const char* text = R"({
    "vertex_types":[
      {"name":"Person","props":{"name":"string","age":"int"}},
      {"name":"Product"},
      {"name":"Place"}],
    "edge_types":[
      {"name":"Knows","src":"Person","dst":"Person"},
      {"name":"Purchase","src":"Person","dst":"Product"},
      {"name":"LocatedIn","src":"Person","dst":"Place"},
      {"name":"ProducedIn","src":"Product","dst":"Place"}]})";
  GraphSchema s = schema_from_json_text(text);
  CHECK(s.vertex_types().size() == 3);
  CHECK(s.edge_triplets().size() == 4);
  CHECK(s.vertex_props("Person")->at("age") == PropertyValue::Kind::Int);
}

TEST_CASE("schema with no edge types is valid") {
  GraphSchema s = schema_from_json_text(
      R"({"vertex_types":[{"name":"Person"}],"edge_types":[]})");
  CHECK(s.vertex_types().size() == 1);
  CHECK(s.edge_triplets().empty());
}

TEST_CASE("schema rejects a triplet with an unknown endpoint") {
  const char* text = R"({
    "vertex_types":[{"name":"Person"}],
    "edge_types":[{"name":"Knows","src":"Person","dst":"Ghost"}]})";
  CHECK_THROWS_AS(schema_from_json_text(text), GraphError);
}

TEST_CASE("extract_schema reads types off the graph") {
  DataGraph g;
  SUBCASE("empty graph") {
    g.finalize();
    GraphSchema s = extract_schema(g);
    CHECK(s.vertex_types().empty());
    CHECK(s.edge_triplets().empty());
  }
  SUBCASE("single edge") {
    g.add_vertex(1, "Person");
    g.add_vertex(2, "Person");
    g.add_edge(5, 1, 2, "Knows");
    g.finalize();
    GraphSchema s = extract_schema(g);
    CHECK(s.vertex_types() == std::set<std::string>{"Person"});
    CHECK(s.edge_triplets() ==
          std::set<EdgeTriplet>{{"Person", "Knows", "Person"}});
  }
}

TEST_CASE("schema_adjacent_types matches the example schema") {
  GraphSchema s = example_schema();
  SUBCASE("Place has no outgoing triplets") {
    auto n = schema_adjacent_types(s, "Place", Direction::Out);
    CHECK(n.vertex_types.empty());
    CHECK(n.triplets.empty());
  }
  SUBCASE("Person reaches all three types going out") {
    auto n = schema_adjacent_types(s, "Person", Direction::Out);
    CHECK(n.vertex_types ==
          std::set<std::string>{"Person", "Product", "Place"});
    CHECK(n.triplets.size() == 3);
  }
  SUBCASE("Place is entered from Person and Product") {
    auto n = schema_adjacent_types(s, "Place", Direction::In);
    CHECK(n.vertex_types == std::set<std::string>{"Person", "Product"});
  }
  SUBCASE("unknown type") {
    CHECK_THROWS_AS(schema_adjacent_types(s, "Ghost", Direction::Out),
                    GraphError);
  }
}

TEST_CASE("type_frequencies counts exactly") {
  DataGraph g;
  SUBCASE("empty graph gives an all-zero table") {
    g.finalize();
    TypeFrequencyTable t = type_frequencies(g);
    CHECK(t.total_vertices() == 0);
    CHECK(t.total_edges() == 0);
  }
  SUBCASE("constructed fixture") {
    for (int i = 0; i < 5; ++i) g.add_vertex(i, "Person");
    for (int i = 5; i < 8; ++i) g.add_vertex(i, "Place");
    g.add_edge(100, 0, 5, "LocatedIn");
    g.add_edge(101, 1, 5, "LocatedIn");
    g.finalize();
    TypeFrequencyTable t = type_frequencies(g);
    CHECK(t.vertex_freq("Person") == 5);
    CHECK(t.vertex_freq("Place") == 3);
    CHECK(t.triplet_freq({"Person", "LocatedIn", "Place"}) == 2);
    CHECK(t.total_vertices() == static_cast<int64_t>(g.vertex_count()));
    CHECK(t.total_edges() == static_cast<int64_t>(g.edge_count()));
  }
}

TEST_CASE("TypeConstraint normalization and intersection") {
  auto u = TypeConstraint::of({"A", "B"});
  CHECK(u.kind() == TypeConstraint::Kind::Union);
  auto b = TypeConstraint::of({"A"});
  CHECK(b.kind() == TypeConstraint::Kind::Basic);
  CHECK(TypeConstraint::all().intersect(u) == u);
  CHECK(u.intersect(b) == b);
  CHECK(u.intersect(TypeConstraint::basic("C")).empty());
  CHECK(TypeConstraint::all().resolve({"X", "Y"}) ==
        std::set<std::string>{"X", "Y"});
}

#include "support/fixtures.hpp"

TEST_CASE("extracted schema is contained in the generating schema") {
  // The generator retains its own schema as the oracle.
  GraphSchema declared = gopt::testing::example_schema();
  for (int seed : {5, 21, 63}) {
    DataGraph g = gopt::testing::random_example_graph({30, 70, seed});
    GraphSchema extracted = extract_schema(g);
    for (const auto& t : extracted.edge_triplets())
      CHECK(declared.edge_triplets().count(t));
    for (const auto& v : extracted.vertex_types())
      CHECK(declared.vertex_types().count(v));
    // And the graph validates against the declared schema.
    CHECK_NOTHROW(type_frequencies(g));
  }
}
