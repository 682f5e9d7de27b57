#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gopt/value.hpp"

namespace gopt {

class GraphError : public std::runtime_error {
 public:
  explicit GraphError(const std::string& what) : std::runtime_error(what) {}
};

struct EdgeTriplet {
  std::string src_type;
  std::string edge_type;
  std::string dst_type;

  auto operator<=>(const EdgeTriplet&) const = default;
  std::string to_string() const {
    return src_type + "|" + edge_type + "|" + dst_type;
  }
};

// A type constraint on a pattern vertex or edge: one named type, a union
// of named types, or every applicable type. The empty set is representable
// only as the result of constraint intersection; type inference reports it
// as INVALID before any constraint escapes into a validated pattern.
class TypeConstraint {
 public:
  enum class Kind { All, Basic, Union };

  TypeConstraint() : kind_(Kind::All) {}

  static TypeConstraint all() { return TypeConstraint(); }
  static TypeConstraint basic(std::string name);
  static TypeConstraint of(std::set<std::string> names);  // normalizes

  Kind kind() const { return kind_; }
  bool is_all() const { return kind_ == Kind::All; }
  bool is_basic() const { return kind_ == Kind::Basic; }
  const std::set<std::string>& names() const { return names_; }
  bool empty() const { return kind_ != Kind::All && names_.empty(); }

  bool contains(const std::string& name) const {
    return is_all() || names_.count(name) > 0;
  }

  // Resolves against a concrete universe of type names (All expands).
  std::set<std::string> resolve(const std::set<std::string>& universe) const;

  TypeConstraint intersect(const TypeConstraint& o) const;

  bool operator==(const TypeConstraint& o) const = default;
  std::string to_string() const;

 private:
  Kind kind_;
  std::set<std::string> names_;
};

enum class Direction { Out, In };

// Vertex and edge type declarations plus the triplet connectivity used by
// type inference. Property declarations are optional.
class GraphSchema {
 public:
  void add_vertex_type(
      const std::string& name,
      const std::map<std::string, PropertyValue::Kind>& props = {});
  void add_edge_triplet(
      const EdgeTriplet& t,
      const std::map<std::string, PropertyValue::Kind>& props = {});

  const std::set<std::string>& vertex_types() const { return vertex_types_; }
  const std::set<EdgeTriplet>& edge_triplets() const { return triplets_; }
  std::set<std::string> edge_type_names() const;

  bool has_vertex_type(const std::string& t) const {
    return vertex_types_.count(t) > 0;
  }
  bool has_edge_type(const std::string& t) const;

  // All triplets leaving (Out) or entering (In) vertex type t.
  std::vector<EdgeTriplet> adjacent_triplets(const std::string& t,
                                             Direction dir) const;

  const std::map<std::string, PropertyValue::Kind>* vertex_props(
      const std::string& type) const;
  const std::map<std::string, PropertyValue::Kind>* edge_props(
      const std::string& type) const;

 private:
  std::set<std::string> vertex_types_;
  std::set<EdgeTriplet> triplets_;
  std::map<std::string, std::map<std::string, PropertyValue::Kind>>
      vertex_props_;
  std::map<std::string, std::map<std::string, PropertyValue::Kind>>
      edge_props_;
};

// Result of schema_adjacent_types.
struct SchemaNeighborhood {
  std::set<std::string> vertex_types;
  std::set<EdgeTriplet> triplets;
};

SchemaNeighborhood schema_adjacent_types(const GraphSchema& schema,
                                         const std::string& t, Direction dir);

struct Vertex {
  int64_t id = 0;
  std::string type;
  PropertyMap props;
  std::vector<int64_t> out_edges;
  std::vector<int64_t> in_edges;
};

struct Edge {
  int64_t id = 0;
  int64_t src = 0;
  int64_t dst = 0;
  std::string type;
  PropertyMap props;
};

// In-memory directed property graph. Immutable after finalize(); self-loops
// and parallel edges are permitted.
class DataGraph {
 public:
  void add_vertex(int64_t id, std::string type, PropertyMap props = {});
  void add_edge(int64_t id, int64_t src, int64_t dst, std::string type,
                PropertyMap props = {});

  // Builds adjacency and checks integrity (dangling endpoints, id reuse).
  void finalize();

  size_t vertex_count() const { return vertices_.size(); }
  size_t edge_count() const { return edges_.size(); }

  const Vertex& vertex(int64_t id) const;
  const Edge& edge(int64_t id) const;
  bool has_vertex(int64_t id) const { return vertices_.count(id) > 0; }

  const std::map<int64_t, Vertex>& vertices() const { return vertices_; }
  const std::map<int64_t, Edge>& edges() const { return edges_; }

  const PropertyValue* vertex_prop(int64_t id, const std::string& name) const;
  const PropertyValue* edge_prop(int64_t id, const std::string& name) const;

 private:
  std::map<int64_t, Vertex> vertices_;
  std::map<int64_t, Edge> edges_;
  bool finalized_ = false;
};

struct TypeFrequencyTable {
  std::map<std::string, int64_t> vertex_counts;
  std::map<EdgeTriplet, int64_t> triplet_counts;

  int64_t vertex_freq(const std::string& type) const;
  // Total over all triplets carrying this edge type name.
  int64_t edge_name_freq(const std::string& name) const;
  int64_t triplet_freq(const EdgeTriplet& t) const;
  int64_t total_vertices() const;
  int64_t total_edges() const;
};

DataGraph load_graph(const std::string& path,
                     const GraphSchema* schema = nullptr);
DataGraph graph_from_json_text(const std::string& text,
                               const GraphSchema* schema = nullptr);
GraphSchema load_schema(const std::string& path);
GraphSchema schema_from_json_text(const std::string& text);
GraphSchema extract_schema(const DataGraph& graph);
TypeFrequencyTable type_frequencies(const DataGraph& graph);

}  // namespace gopt
