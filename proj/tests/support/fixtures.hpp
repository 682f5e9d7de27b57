#pragma once

#include <random>

#include "gopt/executor.hpp"
#include "gopt/glogue.hpp"
#include "gopt/graph.hpp"
#include "gopt/pattern.hpp"

namespace gopt::testing {

// The running example schema: Person/Product/Place with four triplets.
inline GraphSchema example_schema() {
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

// A fixture whose type frequencies reproduce the worked cardinality
// numbers: 10 Person, 20 Product, 5 Place; 30 Knows, 40 Purchase,
// 10 LocatedIn, 20 ProducedIn.
inline DataGraph cardinality_fixture() {
  DataGraph g;
  int64_t id = 0;
  for (int i = 0; i < 10; ++i) g.add_vertex(id++, "Person");
  for (int i = 0; i < 20; ++i) g.add_vertex(id++, "Product");
  for (int i = 0; i < 5; ++i) g.add_vertex(id++, "Place");
  int64_t eid = 1000;
  // Person ids 0..9, Product ids 10..29, Place ids 30..34.
  for (int i = 0; i < 30; ++i)
    g.add_edge(eid++, i % 10, (i * 3 + 1) % 10, "Knows");
  for (int i = 0; i < 40; ++i)
    g.add_edge(eid++, i % 10, 10 + (i * 7) % 20, "Purchase");
  for (int i = 0; i < 10; ++i)
    g.add_edge(eid++, i % 10, 30 + i % 5, "LocatedIn");
  for (int i = 0; i < 20; ++i)
    g.add_edge(eid++, 10 + i % 20, 30 + (i * 3) % 5, "ProducedIn");
  g.finalize();
  return g;
}

struct RandomGraphSpec {
  int vertices = 20;
  int edges = 40;
  int seed = 1;
};

// A random graph conforming to the example schema.
inline DataGraph random_example_graph(const RandomGraphSpec& spec) {
  std::mt19937_64 rng(static_cast<uint64_t>(spec.seed));
  DataGraph g;
  std::vector<int64_t> person, product, place;
  for (int i = 0; i < spec.vertices; ++i) {
    int pick = static_cast<int>(rng() % 5);
    std::string type = pick < 3 ? "Person" : (pick == 3 ? "Product" : "Place");
    PropertyMap props;
    props.emplace("id", PropertyValue(static_cast<int64_t>(i)));
    props.emplace("score", PropertyValue(static_cast<int64_t>(rng() % 100)));
    g.add_vertex(i, type, std::move(props));
    if (type == "Person") person.push_back(i);
    if (type == "Product") product.push_back(i);
    if (type == "Place") place.push_back(i);
  }
  auto pick_from = [&](const std::vector<int64_t>& v) -> int64_t {
    return v[rng() % v.size()];
  };
  int64_t eid = 10000;
  for (int i = 0; i < spec.edges; ++i) {
    int kind = static_cast<int>(rng() % 4);
    PropertyMap props;
    props.emplace("w", PropertyValue(static_cast<int64_t>(rng() % 10)));
    switch (kind) {
      case 0:
        if (person.empty()) break;
        g.add_edge(eid++, pick_from(person), pick_from(person), "Knows",
                   std::move(props));
        break;
      case 1:
        if (person.empty() || product.empty()) break;
        g.add_edge(eid++, pick_from(person), pick_from(product), "Purchase",
                   std::move(props));
        break;
      case 2:
        if (person.empty() || place.empty()) break;
        g.add_edge(eid++, pick_from(person), pick_from(place), "LocatedIn",
                   std::move(props));
        break;
      default:
        if (product.empty() || place.empty()) break;
        g.add_edge(eid++, pick_from(product), pick_from(place), "ProducedIn",
                   std::move(props));
        break;
    }
  }
  g.finalize();
  return g;
}

// A random connected pattern over the example schema with a mix of
// Basic/Union/All constraints. Directed edges follow schema triplets so
// patterns are usually satisfiable; inference handles the rest.
struct RandomPatternSpec {
  int vertices = 3;
  int extra_edges = 1;
  int seed = 1;
  bool allow_both = false;
  bool with_predicates = false;
};

// Patterns are grown over ground types consistent with the schema, so
// type inference nearly always validates them; constraints then loosen
// the ground truth into Basic/Union/All mixes.
inline PatternGraph random_example_pattern(const RandomPatternSpec& spec) {
  std::mt19937_64 rng(static_cast<uint64_t>(spec.seed) * 77 + 13);
  const std::vector<std::string> vtypes{"Person", "Product", "Place"};
  const std::vector<EdgeTriplet> triplets{
      {"Person", "Knows", "Person"},
      {"Person", "Purchase", "Product"},
      {"Person", "LocatedIn", "Place"},
      {"Product", "ProducedIn", "Place"}};
  const std::vector<std::string> enames{"Knows", "Purchase", "LocatedIn",
                                        "ProducedIn"};

  std::vector<std::string> ground(static_cast<size_t>(spec.vertices));
  ground[0] = "Person";  // every triplet is reachable from Person

  PatternGraph p;
  int eid = 0;
  auto edge_constraint = [&](const std::string& name) {
    int pick = static_cast<int>(rng() % 6);
    if (pick == 0) return TypeConstraint::all();
    if (pick == 1) {
      std::set<std::string> names{name, enames[rng() % enames.size()]};
      return TypeConstraint::of(std::move(names));
    }
    return TypeConstraint::basic(name);
  };
  auto add_edge = [&](int a, int b, const EdgeTriplet& t, bool forward) {
    EdgeDir dir = EdgeDir::Out;
    if (spec.allow_both && rng() % 4 == 0) dir = EdgeDir::Both;
    std::string from = "v" + std::to_string(forward ? a : b);
    std::string to = "v" + std::to_string(forward ? b : a);
    if (dir != EdgeDir::Both && rng() % 3 == 0) {
      std::swap(from, to);
      dir = EdgeDir::In;  // same arrow, written from the other side
    }
    ExprPtr pred;
    std::string alias = "e" + std::to_string(eid++);
    if (spec.with_predicates && rng() % 3 == 0) {
      pred = Expr::cmp(CmpOp::Le, Expr::property(alias, "w"),
                       Expr::lit(PropertyValue(static_cast<int64_t>(
                           4 + rng() % 6))));
    }
    p.edges.push_back(PatternEdge{alias, from, to, dir,
                                  edge_constraint(t.edge_type), pred});
  };

  // Spanning structure: attach vertex i to an earlier one via a triplet
  // that fits the earlier vertex's ground type in either direction.
  for (int i = 1; i < spec.vertices; ++i) {
    int j = static_cast<int>(rng() % i);
    std::vector<std::pair<EdgeTriplet, bool>> fits;  // (triplet, j-is-src)
    for (const auto& t : triplets) {
      if (t.src_type == ground[static_cast<size_t>(j)])
        fits.emplace_back(t, true);
      if (t.dst_type == ground[static_cast<size_t>(j)])
        fits.emplace_back(t, false);
    }
    auto [t, j_src] = fits[rng() % fits.size()];
    ground[static_cast<size_t>(i)] = j_src ? t.dst_type : t.src_type;
    // Edge runs j->i when j is the src side, else i->j.
    if (j_src)
      add_edge(j, i, t, true);
    else
      add_edge(i, j, t, true);
  }

  // Extra edges between compatible ground types (self-loops allowed).
  for (int n = 0; n < spec.extra_edges; ++n) {
    int a = static_cast<int>(rng() % spec.vertices);
    int b = static_cast<int>(rng() % spec.vertices);
    std::vector<std::pair<EdgeTriplet, bool>> fits;
    for (const auto& t : triplets) {
      if (t.src_type == ground[static_cast<size_t>(a)] &&
          t.dst_type == ground[static_cast<size_t>(b)])
        fits.emplace_back(t, true);
      if (t.src_type == ground[static_cast<size_t>(b)] &&
          t.dst_type == ground[static_cast<size_t>(a)])
        fits.emplace_back(t, false);
    }
    if (fits.empty()) continue;
    auto [t, fwd] = fits[rng() % fits.size()];
    if (fwd)
      add_edge(a, b, t, true);
    else
      add_edge(b, a, t, true);
  }

  for (int i = 0; i < spec.vertices; ++i) {
    const std::string& gt = ground[static_cast<size_t>(i)];
    TypeConstraint c = TypeConstraint::basic(gt);
    int pick = static_cast<int>(rng() % 4);
    if (pick == 0) c = TypeConstraint::all();
    if (pick == 1) {
      std::set<std::string> two{gt, vtypes[rng() % vtypes.size()]};
      c = TypeConstraint::of(std::move(two));
    }
    ExprPtr pred;
    if (spec.with_predicates && rng() % 4 == 0) {
      pred = Expr::cmp(CmpOp::Ge,
                       Expr::property("v" + std::to_string(i), "score"),
                       Expr::lit(PropertyValue(static_cast<int64_t>(
                           rng() % 60))));
    }
    p.vertices.push_back(PatternVertex{"v" + std::to_string(i), c, pred});
  }
  return p;
}

}  // namespace gopt::testing
