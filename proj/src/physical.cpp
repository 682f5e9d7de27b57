#include "gopt/physical.hpp"

#include "json.hpp"

namespace gopt {

const char* PhysNode::kind_name() const {
  struct Visitor {
    const char* operator()(const ScanOp&) { return "Scan"; }
    const char* operator()(const IndexScanOp&) { return "IndexScan"; }
    const char* operator()(const ExpandOp& op) {
      return op.fused_target ? "Expand" : "ExpandEdge";
    }
    const char* operator()(const GetVOp&) { return "GetV"; }
    const char* operator()(const ExpandIntersectOp&) {
      return "ExpandIntersect";
    }
    const char* operator()(const ExpandDegreeOp&) { return "ExpandDegree"; }
    const char* operator()(const SelectOpP&) { return "Select"; }
    const char* operator()(const ProjectOpP&) { return "Project"; }
    const char* operator()(const GroupOpP&) { return "Group"; }
    const char* operator()(const OrderOpP&) { return "Order"; }
    const char* operator()(const LimitOpP&) { return "Limit"; }
    const char* operator()(const UnfoldOpP&) { return "Unfold"; }
    const char* operator()(const HashJoinOp&) { return "HashJoin"; }
    const char* operator()(const UnionOpP&) { return "Union"; }
    const char* operator()(const EdgeDistinctFilterOp&) {
      return "EdgeDistinctFilter";
    }
    const char* operator()(const PathAssembleOp&) { return "PathAssemble"; }
  };
  return std::visit(Visitor{}, data);
}

int PhysPlan::add(PhysOpData data, std::vector<int> inputs) {
  PhysNode n;
  n.id = static_cast<int>(nodes.size());
  n.inputs = std::move(inputs);
  n.data = std::move(data);
  nodes.push_back(std::move(n));
  return nodes.back().id;
}

std::vector<int> PhysPlan::topo_order() const {
  std::vector<int> order;
  std::set<int> seen;
  std::vector<std::pair<int, bool>> stack{{sink, false}};
  while (!stack.empty()) {
    auto [id, expanded] = stack.back();
    stack.pop_back();
    if (expanded) {
      order.push_back(id);
      continue;
    }
    if (seen.count(id)) continue;
    seen.insert(id);
    stack.push_back({id, true});
    for (int in : node(id).inputs) stack.push_back({in, false});
  }
  return order;
}

namespace {

using nlohmann::json;

json constraint_json(const TypeConstraint& c) {
  if (c.is_all()) return nullptr;
  if (c.is_basic()) return *c.names().begin();
  return json(c.names());
}

json expr_json(const ExprPtr& e) {
  return e ? json(e->to_string()) : json(nullptr);
}

json params_json(const PhysNode& n) {
  struct Visitor {
    json operator()(const ScanOp& op) {
      return json{{"alias", op.alias},
                  {"types", constraint_json(op.types)},
                  {"predicate", expr_json(op.predicate)},
                  {"prefetch", op.prefetch}};
    }
    json operator()(const IndexScanOp& op) {
      return json{{"alias", op.alias},
                  {"types", constraint_json(op.types)},
                  {"pk_prop", op.pk_prop},
                  {"key", op.key.to_string()},
                  {"residual", expr_json(op.residual_predicate)},
                  {"prefetch", op.prefetch}};
    }
    json operator()(const ExpandOp& op) {
      json j{{"base", op.base_tag},
             {"edge_alias", op.edge_alias},
             {"types", constraint_json(op.edge_types)},
             {"dir", to_string(op.dir)},
             {"predicate", expr_json(op.edge_predicate)},
             {"fused", op.fused_target.has_value()},
             {"prefetch", op.prefetch}};
      if (op.fused_target) j["target"] = *op.fused_target;
      if (op.drop_edge_binding) j["drop_edge"] = true;
      return j;
    }
    json operator()(const GetVOp& op) {
      return json{{"edge_tag", op.edge_tag},
                  {"alias", op.alias},
                  {"types", constraint_json(op.types)},
                  {"opt", to_string(op.opt)},
                  {"predicate", expr_json(op.predicate)},
                  {"bound", op.bound},
                  {"prefetch", op.prefetch}};
    }
    json operator()(const ExpandIntersectOp& op) {
      json edges = json::array();
      for (const auto& e : op.edges)
        edges.push_back(json{{"base", e.base_tag},
                             {"edge_alias", e.edge_alias},
                             {"types", constraint_json(e.edge_types)},
                             {"dir", to_string(e.dir)},
                             {"predicate", expr_json(e.edge_predicate)}});
      return json{{"edges", edges},
                  {"target", op.target_alias},
                  {"target_types", constraint_json(op.target_types)},
                  {"target_predicate", expr_json(op.target_predicate)},
                  {"prefetch", op.prefetch}};
    }
    json operator()(const ExpandDegreeOp& op) {
      return json{{"base", op.base_tag},
                  {"types", constraint_json(op.edge_types)},
                  {"dir", to_string(op.dir)},
                  {"target_types", constraint_json(op.target_types)},
                  {"alias", op.alias}};
    }
    json operator()(const SelectOpP& op) {
      return json{{"condition", expr_json(op.condition)}};
    }
    json operator()(const ProjectOpP& op) {
      json cols = json::array();
      for (const auto& c : op.columns)
        cols.push_back(json{{"expr", expr_json(c.expr)}, {"alias", c.alias}});
      return json{{"columns", cols}};
    }
    json operator()(const GroupOpP& op) {
      json keys = json::array();
      for (const auto& k : op.keys)
        keys.push_back(json{{"expr", expr_json(k.expr)}, {"alias", k.alias}});
      json aggs = json::array();
      for (const auto& a : op.aggs)
        aggs.push_back(json{{"fn", to_string(a.fn)},
                            {"expr", expr_json(a.arg)},
                            {"alias", a.alias}});
      return json{{"keys", keys}, {"aggregations", aggs}};
    }
    json operator()(const OrderOpP& op) {
      json keys = json::array();
      for (const auto& k : op.keys)
        keys.push_back(
            json{{"expr", expr_json(k.expr)}, {"ascending", k.ascending}});
      return json{{"keys", keys}};
    }
    json operator()(const LimitOpP& op) { return json{{"count", op.count}}; }
    json operator()(const UnfoldOpP& op) {
      return json{{"tag", op.tag}, {"alias", op.alias}};
    }
    json operator()(const HashJoinOp& op) {
      return json{{"keys", op.keys}, {"join_type", to_string(op.type)}};
    }
    json operator()(const UnionOpP&) { return json::object(); }
    json operator()(const EdgeDistinctFilterOp& op) {
      return json{{"edges", op.edge_aliases}};
    }
    json operator()(const PathAssembleOp& op) {
      return json{{"alias", op.spec.alias},
                  {"start", op.spec.start},
                  {"end", op.spec.end},
                  {"edges", op.spec.edge_aliases},
                  {"opt", to_string(op.spec.opt)}};
    }
  };
  return std::visit(Visitor{}, n.data);
}

}  // namespace

std::string phys_plan_to_json(const PhysPlan& plan) {
  json ops = json::array();
  for (const auto& n : plan.nodes) {
    json op{{"id", n.id},
            {"kind", n.kind_name()},
            {"params", params_json(n)},
            {"inputs", n.inputs}};
    if (n.est_freq >= 0) op["est_freq"] = n.est_freq;
    if (n.est_cost >= 0) op["est_cost"] = n.est_cost;
    ops.push_back(op);
  }
  json j{{"semantics", to_string(plan.semantics)},
         {"ops", ops},
         {"sink", plan.sink}};
  return j.dump(2);
}

}  // namespace gopt
