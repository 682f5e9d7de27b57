#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "gopt/graph.hpp"
#include "gopt/physical.hpp"

namespace gopt {

struct VertexRef {
  int64_t id = 0;
  auto operator<=>(const VertexRef&) const = default;
};

struct EdgeRef {
  int64_t id = 0;
  auto operator<=>(const EdgeRef&) const = default;
};

struct PathRef {
  // Alternating vertex/edge ids: v0, e0, v1, e1, ..., vn.
  std::vector<int64_t> elements;
  auto operator<=>(const PathRef&) const = default;
};

// A bound value in a record: graph reference or computed scalar.
using Value = std::variant<VertexRef, EdgeRef, PathRef, PropertyValue>;

bool value_equal(const Value& a, const Value& b);
// Total deterministic order across all value kinds (variant index first).
bool value_less(const Value& a, const Value& b);
std::string value_to_string(const Value& v);

using Record = std::map<std::string, Value>;

bool record_less(const Record& a, const Record& b);

using ResultSet = std::vector<Record>;

// Multiset comparison after canonical sorting.
bool results_equal_multiset(ResultSet a, ResultSet b);
// Projects each record onto the given aliases (all must be present).
ResultSet project_results(const ResultSet& in,
                          const std::set<std::string>& aliases);

struct OpStats {
  int op_id = 0;
  std::string kind;
  int64_t output_rows = 0;
};

struct ExecStats {
  std::vector<OpStats> per_op;
  int64_t total_intermediate = 0;  // sum of outputs excluding the sink
  int64_t props_fetched = 0;

  std::string to_json() const;
};

// Evaluates an expression over a record; graph resolves property access.
// When `stats` is given, property reads through refs are charged to it
// unless the property was prefetched for that alias.
PropertyValue eval_expr(const Expr& e, const Record& rec,
                        const DataGraph& graph);

struct ExecOptions {
  // Charge lazy property reads (LateProject accounting). When false, reads
  // are free at eval time and prefetch sets are charged at scan/expand.
  bool charge_lazy_reads = true;
};

std::pair<ResultSet, ExecStats> execute(const PhysPlan& plan,
                                        const DataGraph& graph,
                                        const ExecOptions& options = {});

class ExecError : public std::runtime_error {
 public:
  explicit ExecError(const std::string& what) : std::runtime_error(what) {}
};

class SizeGuardError : public std::runtime_error {
 public:
  explicit SizeGuardError(const std::string& what)
      : std::runtime_error(what) {}
};

// Exhaustive homomorphism enumeration of a pattern over a graph, with
// optional pre-bound anchors. Applies element predicates, path options,
// and the edge-distinct filter when requested. Guards: pattern <= 6
// vertices, graph <= 120 vertices.
ResultSet oracle_match(const PatternGraph& pattern, const DataGraph& graph,
                       Semantics semantics, const Record& anchors = {});

}  // namespace gopt
