#include <algorithm>

#include "gopt/rbo.hpp"

namespace gopt {

namespace {

// Every alias referenced by any node other than `except`, including
// filters and path assembly.
std::set<std::string> referenced_aliases(const PhysPlan& plan,
                                         int except_producer) {
  std::set<std::string> refs;
  auto add_expr = [&](const ExprPtr& e) {
    if (!e) return;
    auto tags = expr_tags(e);
    refs.insert(tags.begin(), tags.end());
  };
  for (const auto& n : plan.nodes) {
    struct Visitor {
      std::set<std::string>& refs;
      const std::function<void(const ExprPtr&)>& add;

      void operator()(const ScanOp& op) { add(op.predicate); }
      void operator()(const IndexScanOp& op) { add(op.residual_predicate); }
      void operator()(const ExpandOp& op) {
        refs.insert(op.base_tag);
        add(op.edge_predicate);
      }
      void operator()(const GetVOp& op) {
        refs.insert(op.edge_tag);
        if (!op.base_tag.empty()) refs.insert(op.base_tag);
        add(op.predicate);
      }
      void operator()(const ExpandIntersectOp& op) {
        for (const auto& e : op.edges) {
          refs.insert(e.base_tag);
          add(e.edge_predicate);
        }
        add(op.target_predicate);
      }
      void operator()(const ExpandDegreeOp& op) { refs.insert(op.base_tag); }
      void operator()(const SelectOpP& op) { add(op.condition); }
      void operator()(const ProjectOpP& op) {
        for (const auto& c : op.columns) add(c.expr);
      }
      void operator()(const GroupOpP& op) {
        for (const auto& k : op.keys) add(k.expr);
        for (const auto& a : op.aggs) add(a.arg);
      }
      void operator()(const OrderOpP& op) {
        for (const auto& k : op.keys) add(k.expr);
      }
      void operator()(const LimitOpP&) {}
      void operator()(const UnfoldOpP& op) { refs.insert(op.tag); }
      void operator()(const HashJoinOp& op) {
        refs.insert(op.keys.begin(), op.keys.end());
      }
      void operator()(const UnionOpP&) {}
      void operator()(const EdgeDistinctFilterOp& op) {
        refs.insert(op.edge_aliases.begin(), op.edge_aliases.end());
      }
      void operator()(const PathAssembleOp& op) {
        refs.insert(op.spec.start);
        refs.insert(op.spec.end);
        refs.insert(op.spec.edge_aliases.begin(), op.spec.edge_aliases.end());
        refs.insert(op.spec.inner_vertices.begin(),
                    op.spec.inner_vertices.end());
      }
    };
    if (n.id == except_producer) continue;
    std::function<void(const ExprPtr&)> add = add_expr;
    std::visit(Visitor{refs, add}, n.data);
  }
  return refs;
}

// The constraint of the op that binds `alias`, if findable.
const TypeConstraint* binding_constraint(const PhysPlan& plan,
                                         const std::string& alias) {
  for (const auto& n : plan.nodes) {
    if (const auto* s = std::get_if<ScanOp>(&n.data)) {
      if (s->alias == alias) return &s->types;
    } else if (const auto* is = std::get_if<IndexScanOp>(&n.data)) {
      if (is->alias == alias) return &is->types;
    } else if (const auto* g = std::get_if<GetVOp>(&n.data)) {
      if (g->alias == alias && !g->bound) return &g->types;
    } else if (const auto* x = std::get_if<ExpandOp>(&n.data)) {
      if (x->fused_target && *x->fused_target == alias) return nullptr;
    } else if (const auto* ix = std::get_if<ExpandIntersectOp>(&n.data)) {
      if (ix->target_alias == alias) return &ix->target_types;
    }
  }
  return nullptr;
}

std::map<int, std::vector<int>> consumers_of(const PhysPlan& plan) {
  std::map<int, std::vector<int>> out;
  for (const auto& n : plan.nodes)
    for (int in : n.inputs) out[in].push_back(n.id);
  return out;
}

}  // namespace

bool ev_fusion(PhysPlan& plan, const GraphSchema& schema) {
  auto cons = consumers_of(plan);
  for (auto& n : plan.nodes) {
    auto* expand = std::get_if<ExpandOp>(&n.data);
    if (!expand || expand->fused_target) continue;
    auto it = cons.find(n.id);
    if (it == cons.end() || it->second.size() != 1) continue;
    PhysNode& next = plan.node(it->second[0]);
    auto* getv = std::get_if<GetVOp>(&next.data);
    if (!getv || getv->edge_tag != expand->edge_alias) continue;
    if (getv->bound || getv->predicate) continue;

    // The edge alias must be dead beyond this pair.
    auto refs = referenced_aliases(plan, n.id);
    refs.erase(std::string());
    bool edge_live = refs.count(expand->edge_alias) > 0;
    // The GetV itself references it; recompute ignoring that node.
    {
      std::set<std::string> other;
      for (const auto& m : plan.nodes) {
        if (m.id == n.id || m.id == next.id) continue;
        PhysPlan probe;
        probe.nodes = {m};
        probe.sink = 0;
        auto tags = referenced_aliases(probe, -1);
        other.insert(tags.begin(), tags.end());
      }
      edge_live = other.count(expand->edge_alias) > 0;
    }
    if (edge_live) continue;

    // Target type must be implied by (source types, edge types).
    const TypeConstraint* src_types =
        binding_constraint(plan, expand->base_tag);
    if (!src_types) continue;
    auto src_set = src_types->resolve(schema.vertex_types());
    auto edge_set = expand->edge_types.resolve(schema.edge_type_names());
    std::set<std::string> implied;
    for (const auto& t : schema.edge_triplets()) {
      if (!edge_set.count(t.edge_type)) continue;
      bool fwd = expand->dir != EdgeDir::In && src_set.count(t.src_type);
      bool rev = expand->dir != EdgeDir::Out && src_set.count(t.dst_type);
      if (fwd) implied.insert(t.dst_type);
      if (rev) implied.insert(t.src_type);
    }
    auto target_set = getv->types.resolve(schema.vertex_types());
    bool covered = std::all_of(
        implied.begin(), implied.end(),
        [&](const std::string& t) { return target_set.count(t) > 0; });
    if (implied.empty() || !covered) continue;

    expand->fused_target = getv->alias;
    expand->drop_edge_binding = true;
    expand->prefetch = getv->prefetch;
    // Bypass the GetV node.
    for (auto& m : plan.nodes)
      for (auto& in : m.inputs)
        if (in == next.id) in = n.id;
    if (plan.sink == next.id) plan.sink = n.id;
    return true;
  }
  return false;
}

bool deg_fusion(PhysPlan& plan) {
  auto cons = consumers_of(plan);
  for (size_t idx = 0; idx < plan.nodes.size(); ++idx) {
    const int group_id = plan.nodes[idx].id;
    const auto* group = std::get_if<GroupOpP>(&plan.nodes[idx].data);
    if (!group) continue;
    if (group->keys.size() != 1 || group->aggs.size() != 1) continue;
    const ProjectColumn key = group->keys[0];
    const AggCall agg = group->aggs[0];
    if (agg.fn != AggFn::CountDistinct || !agg.arg ||
        agg.arg->kind != Expr::Kind::TagRef)
      continue;
    if (key.expr->kind != Expr::Kind::TagRef) continue;

    // Look through the pattern's trim projection (bare tag refs only).
    int child_id = plan.nodes[idx].inputs[0];
    {
      const auto* proj = std::get_if<ProjectOpP>(&plan.node(child_id).data);
      if (proj) {
        bool passthrough = std::all_of(
            proj->columns.begin(), proj->columns.end(),
            [](const ProjectColumn& c) {
              return c.expr->kind == Expr::Kind::TagRef &&
                     c.expr->tag == c.alias;
            });
        if (!passthrough) continue;
        auto it = cons.find(child_id);
        if (it == cons.end() || it->second.size() != 1) continue;
        child_id = plan.node(child_id).inputs[0];
      }
    }
    const auto* expand = std::get_if<ExpandOp>(&plan.node(child_id).data);
    if (!expand || !expand->fused_target) continue;
    if (*expand->fused_target != agg.arg->tag) continue;
    if (expand->base_tag != key.expr->tag) continue;
    if (expand->edge_predicate) continue;
    // The expand source must come straight from a scan of the key alias,
    // so rows are distinct per source vertex.
    const int scan_id = plan.node(child_id).inputs[0];
    const auto* scan = std::get_if<ScanOp>(&plan.node(scan_id).data);
    const auto* iscan = std::get_if<IndexScanOp>(&plan.node(scan_id).data);
    std::string scan_alias = scan ? scan->alias : (iscan ? iscan->alias : "");
    if (scan_alias != expand->base_tag) continue;
    auto it = cons.find(child_id);
    if (it == cons.end() || it->second.size() != 1) continue;

    ExpandDegreeOp deg;
    deg.base_tag = expand->base_tag;
    deg.edge_types = expand->edge_types;
    deg.dir = expand->dir;
    deg.target_types = TypeConstraint::all();
    deg.alias = agg.alias;

    ProjectOpP proj;
    proj.columns.push_back(
        ProjectColumn{Expr::tag_ref(key.expr->tag), key.alias});
    proj.columns.push_back(ProjectColumn{Expr::tag_ref(agg.alias), agg.alias});

    int deg_id = plan.add(std::move(deg), {scan_id});
    int proj_id = plan.add(std::move(proj), {deg_id});
    for (auto& m : plan.nodes)
      for (auto& in : m.inputs)
        if (in == group_id) in = proj_id;
    if (plan.sink == group_id) plan.sink = proj_id;
    return true;
  }
  return false;
}

bool pk_index(PhysPlan& plan, const BackendProfile& backend) {
  for (auto& n : plan.nodes) {
    auto* scan = std::get_if<ScanOp>(&n.data);
    if (!scan || !scan->predicate) continue;
    if (!scan->types.is_basic()) continue;
    const std::string& vtype = *scan->types.names().begin();
    const std::string* pk = backend.pk_for(vtype);
    if (!pk) continue;

    std::vector<ExprPtr> residual;
    std::optional<PropertyValue> key;
    for (const auto& c : Expr::split_and(scan->predicate)) {
      bool is_pk_eq = !key && c->kind == Expr::Kind::Cmp &&
                      c->cmp_op == CmpOp::Eq &&
                      c->args[0]->kind == Expr::Kind::Property &&
                      c->args[0]->tag == scan->alias &&
                      c->args[0]->prop == *pk &&
                      c->args[1]->kind == Expr::Kind::Literal;
      if (is_pk_eq)
        key = c->args[1]->literal;
      else
        residual.push_back(c);
    }
    if (!key) continue;

    IndexScanOp is;
    is.alias = scan->alias;
    is.types = scan->types;
    is.pk_prop = *pk;
    is.key = *key;
    is.residual_predicate = Expr::join_and(residual);
    is.prefetch = scan->prefetch;
    n.data = std::move(is);
    return true;
  }
  return false;
}

bool late_project(PhysPlan& plan, const BackendProfile& backend) {
  if (backend.distributed) return false;
  bool changed = false;
  for (auto& n : plan.nodes) {
    auto clear = [&](std::set<std::string>& prefetch) {
      if (!prefetch.empty()) {
        prefetch.clear();
        changed = true;
      }
    };
    if (auto* s = std::get_if<ScanOp>(&n.data)) clear(s->prefetch);
    else if (auto* is = std::get_if<IndexScanOp>(&n.data)) clear(is->prefetch);
    else if (auto* x = std::get_if<ExpandOp>(&n.data)) clear(x->prefetch);
    else if (auto* g = std::get_if<GetVOp>(&n.data)) clear(g->prefetch);
    else if (auto* ix = std::get_if<ExpandIntersectOp>(&n.data))
      clear(ix->prefetch);
  }
  return changed;
}

namespace {

// Drops nodes no longer reachable from the sink and renumbers ids.
void compact_phys(PhysPlan& plan) {
  PhysPlan out;
  out.semantics = plan.semantics;
  std::map<int, int> remap;
  for (int id : plan.topo_order()) {
    PhysNode n = plan.node(id);
    remap[id] = static_cast<int>(out.nodes.size());
    n.id = remap[id];
    for (auto& in : n.inputs) in = remap.at(in);
    out.nodes.push_back(std::move(n));
  }
  out.sink = remap.at(plan.sink);
  plan = std::move(out);
}

}  // namespace

void apply_physical_rules(PhysPlan& plan, const GraphSchema& schema,
                          const BackendProfile& backend,
                          const std::set<std::string>& enabled,
                          std::vector<std::string>* trace) {
  auto fire = [&](const char* name, auto&& fn) {
    if (!enabled.count(name)) return;
    size_t guard = plan.nodes.size() * 2 + 8;
    while (fn() && guard-- > 0) {
      if (trace) trace->push_back(name);
      compact_phys(plan);
    }
  };
  fire("ev_fusion", [&] { return ev_fusion(plan, schema); });
  fire("deg_fusion", [&] { return deg_fusion(plan); });
  fire("pk_index", [&] { return pk_index(plan, backend); });
  fire("late_project", [&] { return late_project(plan, backend); });
}

}  // namespace gopt
