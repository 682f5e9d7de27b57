#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gopt/gir.hpp"
#include "gopt/pattern.hpp"

namespace gopt {

// --- physical operators ---

struct ScanOp {
  std::string alias;
  TypeConstraint types;
  ExprPtr predicate;
  std::set<std::string> prefetch;  // properties fetched eagerly
};

struct IndexScanOp {
  std::string alias;
  TypeConstraint types;
  std::string pk_prop;
  PropertyValue key;
  ExprPtr residual_predicate;
  std::set<std::string> prefetch;
};

// Expands one edge from a bound vertex. When `fused_target` is set the op
// also binds the far endpoint (EVFusion); otherwise a GetVOp follows.
struct ExpandOp {
  std::string base_tag;
  std::string edge_alias;
  TypeConstraint edge_types;
  EdgeDir dir = EdgeDir::Out;
  ExprPtr edge_predicate;
  std::optional<std::string> fused_target;
  bool drop_edge_binding = false;  // edge alias not kept in the record
  std::set<std::string> prefetch;
};

struct GetVOp {
  std::string edge_tag;
  std::string base_tag;  // expansion source, for opt=Other
  std::string alias;
  TypeConstraint types;
  VertexOpt opt = VertexOpt::Dst;
  ExprPtr predicate;
  bool bound = false;  // alias already bound: filter instead of bind
  std::set<std::string> prefetch;
};

// Worst-case-optimal closing of one vertex over several edges: intersects
// neighbor candidate sets, then unfolds with edge-multiplicity fidelity.
struct IntersectEdge {
  std::string base_tag;
  std::string edge_alias;
  TypeConstraint edge_types;
  EdgeDir dir = EdgeDir::Out;
  ExprPtr edge_predicate;
  bool drop_edge_binding = false;
};

struct ExpandIntersectOp {
  std::vector<IntersectEdge> edges;
  std::string target_alias;
  TypeConstraint target_types;
  ExprPtr target_predicate;
  std::set<std::string> prefetch;
};

// Degree computation replacing Expand+GetV+Group (DegFusion).
struct ExpandDegreeOp {
  std::string base_tag;
  TypeConstraint edge_types;
  EdgeDir dir = EdgeDir::Out;
  TypeConstraint target_types;
  std::string alias;  // the count column
};

struct SelectOpP {
  ExprPtr condition;
};

struct ProjectOpP {
  std::vector<ProjectColumn> columns;
};

struct GroupOpP {
  std::vector<ProjectColumn> keys;
  std::vector<AggCall> aggs;
};

struct OrderOpP {
  std::vector<OrderKey> keys;
};

struct LimitOpP {
  int64_t count = 0;
};

struct UnfoldOpP {
  std::string tag;
  std::string alias;
};

struct HashJoinOp {
  std::vector<std::string> keys;
  JoinType type = JoinType::Inner;
};

struct UnionOpP {};

struct EdgeDistinctFilterOp {
  std::vector<std::string> edge_aliases;
};

struct PathAssembleOp {
  PathSpec spec;
  bool drop_elements = true;  // remove unrolled bindings after assembly
};

using PhysOpData =
    std::variant<ScanOp, IndexScanOp, ExpandOp, GetVOp, ExpandIntersectOp,
                 ExpandDegreeOp, SelectOpP, ProjectOpP, GroupOpP, OrderOpP,
                 LimitOpP, UnfoldOpP, HashJoinOp, UnionOpP,
                 EdgeDistinctFilterOp, PathAssembleOp>;

struct PhysNode {
  int id = -1;
  std::vector<int> inputs;
  PhysOpData data;
  // Optimizer annotations for explain output.
  double est_freq = -1;
  double est_cost = -1;

  const char* kind_name() const;
};

struct PhysPlan {
  Semantics semantics = Semantics::Homomorphism;
  std::vector<PhysNode> nodes;
  int sink = -1;

  PhysNode& node(int id) { return nodes.at(static_cast<size_t>(id)); }
  const PhysNode& node(int id) const {
    return nodes.at(static_cast<size_t>(id));
  }
  int add(PhysOpData data, std::vector<int> inputs);
  std::vector<int> topo_order() const;
};

std::string phys_plan_to_json(const PhysPlan& plan);

}  // namespace gopt
