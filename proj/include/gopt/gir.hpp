#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gopt/expr.hpp"
#include "gopt/pattern.hpp"

namespace gopt {

enum class Semantics { Homomorphism, EdgeDistinct };
enum class VertexOpt { Src, Dst, Other };
enum class JoinType { Inner, LeftOuter, RightOuter, FullOuter, Semi, Anti };
enum class AggFn { Count, CountDistinct, Sum, Avg, Min, Max, First };

const char* to_string(Semantics s);
const char* to_string(JoinType t);
const char* to_string(AggFn f);
const char* to_string(VertexOpt o);

class PlanError : public std::runtime_error {
 public:
  explicit PlanError(const std::string& what) : std::runtime_error(what) {}
};

// --- pattern-sentence operators (live inside MATCH_PATTERN) ---

struct GetVertexOp {
  std::string tag;  // empty: previous op / scan anchor
  std::string alias;
  TypeConstraint types;
  VertexOpt opt = VertexOpt::Dst;
  ExprPtr predicate;
};

struct ExpandEdgeOp {
  std::string tag;
  std::string alias;
  TypeConstraint types;
  EdgeDir dir = EdgeDir::Out;
  ExprPtr predicate;
};

struct ExpandPathOp {
  std::string tag;
  std::string alias;
  ExpandEdgeOp hop_edge;  // per-hop edge template; inner vertices are AllType
  int length = 1;
  PathOpt opt = PathOpt::Arbitrary;
};

using PatternOp = std::variant<GetVertexOp, ExpandEdgeOp, ExpandPathOp>;

// --- plan operators ---

// Context for a pattern that continues from bound aliases produced by its
// input (introduced by ComSubPattern).
struct PatternAnchor {
  PatternGraph context;  // the already-computed prefix
};

struct MatchPatternOp {
  PatternGraph graph;
  std::optional<PatternAnchor> anchor;
};

struct ProjectColumn {
  ExprPtr expr;
  std::string alias;
};

struct ProjectOpL {
  std::vector<ProjectColumn> columns;
};

struct SelectOpL {
  ExprPtr condition;
};

struct OrderKey {
  ExprPtr expr;
  bool ascending = true;
};

struct OrderOpL {
  std::vector<OrderKey> keys;
};

struct LimitOpL {
  int64_t count = 0;
};

struct AggCall {
  AggFn fn = AggFn::Count;
  ExprPtr arg;  // null for bare COUNT(*) style counts
  std::string alias;
};

struct GroupOpL {
  std::vector<ProjectColumn> keys;
  std::vector<AggCall> aggs;
};

struct UnfoldOpL {
  std::string tag;
  std::string alias;
};

struct JoinOpL {
  std::vector<std::string> keys;
  JoinType type = JoinType::Inner;
};

struct UnionOpL {};

using GirOpData = std::variant<MatchPatternOp, ProjectOpL, SelectOpL, OrderOpL,
                               LimitOpL, GroupOpL, UnfoldOpL, JoinOpL, UnionOpL>;

struct GirNode {
  int id = -1;
  std::vector<int> inputs;
  GirOpData data;

  const char* kind_name() const;
};

struct GirPlan {
  Semantics semantics = Semantics::Homomorphism;
  std::vector<GirNode> nodes;  // position == id
  int sink = -1;

  GirNode& node(int id) { return nodes.at(static_cast<size_t>(id)); }
  const GirNode& node(int id) const { return nodes.at(static_cast<size_t>(id)); }

  // Aliases visible in records emitted by node `id`.
  std::set<std::string> output_aliases(int id) const;
  // Topological order ending at the sink (ids unreachable from sink omitted).
  std::vector<int> topo_order() const;
};

struct Diagnostic {
  std::string message;
};

// Full structural validation: DAG shape, alias rules, tag resolution.
std::vector<Diagnostic> validate(const GirPlan& plan);

// Derives the pattern-graph view of a MATCH_PATTERN body, unrolling each
// EXPAND_PATH of length l into l edges with l-1 fresh all-typed vertices.
PatternGraph to_pattern_graph(const std::vector<PatternOp>& body);

// Fluent-ish construction of GirPlans, mirroring one pattern section at a
// time plus relational composition over finished fragments.
class GirBuilder {
 public:
  GirBuilder& pattern_start();
  GirBuilder& get_v(const std::string& tag, const std::string& alias,
                    TypeConstraint types, VertexOpt opt = VertexOpt::Dst,
                    ExprPtr predicate = nullptr);
  GirBuilder& expand_e(const std::string& tag, const std::string& alias,
                       TypeConstraint types, EdgeDir dir,
                       ExprPtr predicate = nullptr);
  // The path's end vertex is bound by the following get_v, like expand_e.
  GirBuilder& expand_path(const std::string& tag, const std::string& alias,
                          TypeConstraint edge_types, EdgeDir dir, int length,
                          PathOpt opt);
  int pattern_end();

  int select(int input, ExprPtr condition);
  int project(int input, std::vector<ProjectColumn> columns);
  int group(int input, std::vector<ProjectColumn> keys,
            std::vector<AggCall> aggs);
  int order(int input, std::vector<OrderKey> keys);
  int limit(int input, int64_t count);
  int join(int left, int right, std::vector<std::string> keys, JoinType type);
  int set_union(int left, int right);
  int unfold(int input, const std::string& tag, const std::string& alias);

  GirPlan finish(int sink, Semantics semantics = Semantics::Homomorphism);

  // The plan under construction, for alias resolution while building.
  const GirPlan& peek() const { return plan_; }

 private:
  int add_node(GirOpData data, std::vector<int> inputs);

  GirPlan plan_;
  std::vector<PatternOp> pattern_in_progress_;
  bool in_pattern_ = false;
};

// Plan-JSON serialization (External Interfaces format).
std::string plan_to_json(const GirPlan& plan);
GirPlan plan_from_json(const std::string& text);

// Structural equality with ids normalized by topological order.
bool plans_equal(const GirPlan& a, const GirPlan& b);

// Renders a plan back to query text for the grammar-expressible subset.
// Throws PlanError when the plan has no textual form.
std::string print_query(const GirPlan& plan);

}  // namespace gopt
