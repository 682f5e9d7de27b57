#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gopt/expr.hpp"
#include "gopt/graph.hpp"

namespace gopt {

enum class EdgeDir { Out, In, Both };
enum class PathOpt { Arbitrary, Simple, Trail };

const char* to_string(EdgeDir d);
const char* to_string(PathOpt o);

struct PatternVertex {
  std::string alias;
  TypeConstraint types;
  ExprPtr predicate;  // may be null
  bool output = true;
  std::set<std::string> columns;  // properties retained by FieldTrim
};

// A pattern edge as written in the query. `from` is the traversal origin,
// so with dir=In the stored-graph arrow runs to→from. src()/dst() give the
// arrow endpoints; for Both edges they are just the written order.
struct PatternEdge {
  std::string alias;
  std::string from;
  std::string to;
  EdgeDir dir = EdgeDir::Out;
  TypeConstraint types;
  ExprPtr predicate;
  bool output = true;
  std::set<std::string> columns;

  bool is_both() const { return dir == EdgeDir::Both; }
  const std::string& src() const { return dir == EdgeDir::In ? to : from; }
  const std::string& dst() const { return dir == EdgeDir::In ? from : to; }
};

// Bookkeeping for an unrolled EXPAND_PATH: the physical plan restores the
// path value from the listed elements and enforces the option.
struct PathSpec {
  std::string alias;
  std::string start;
  std::string end;
  std::vector<std::string> edge_aliases;    // in hop order
  std::vector<std::string> inner_vertices;  // between hops
  PathOpt opt = PathOpt::Arbitrary;
};

class PatternError : public std::runtime_error {
 public:
  explicit PatternError(const std::string& what) : std::runtime_error(what) {}
};

class PatternGraph {
 public:
  std::vector<PatternVertex> vertices;
  std::vector<PatternEdge> edges;
  std::vector<PathSpec> paths;

  PatternVertex* find_vertex(const std::string& alias);
  const PatternVertex* find_vertex(const std::string& alias) const;
  PatternEdge* find_edge(const std::string& alias);
  const PatternEdge* find_edge(const std::string& alias) const;
  bool has_alias(const std::string& alias) const;

  std::vector<const PatternEdge*> incident_edges(const std::string& v) const;

  // All vertex and edge aliases, vertices first, each sorted.
  std::vector<std::string> all_aliases() const;

  bool connected() const;
  // Throws PatternError on duplicate aliases, dangling endpoints, or a
  // disconnected pattern.
  void validate() const;
};

}  // namespace gopt
