#include "gopt/pipeline.hpp"

#include <algorithm>
#include <functional>

namespace gopt {

namespace {

EdgeDir dir_from(const PatternEdge& e, const std::string& base) {
  if (e.is_both()) return EdgeDir::Both;
  return base == e.src() ? EdgeDir::Out : EdgeDir::In;
}

VertexOpt opt_for(EdgeDir dir) {
  switch (dir) {
    case EdgeDir::Out: return VertexOpt::Dst;
    case EdgeDir::In: return VertexOpt::Src;
    case EdgeDir::Both: return VertexOpt::Other;
  }
  return VertexOpt::Dst;
}

// Ordered edges for one expansion: cheapest opening ratio first when
// statistics are available, written order otherwise.
std::vector<std::string> expansion_order(const PatternGraph& pattern,
                                         const Transformation& t,
                                         const GlogueQuery* gq) {
  if (!gq) return t.edges;
  return expansion_edge_order(*gq, pattern, t);
}

}  // namespace

CboStepPtr user_order_plan(const PatternGraph& pattern,
                           const std::set<std::string>& anchors) {
  std::set<std::string> bound = anchors;
  std::set<std::string> open_edges;
  for (const auto& e : pattern.edges) open_edges.insert(e.alias);

  CboStepPtr cur;
  SubPattern covered;
  if (!anchors.empty()) {
    auto step = std::make_shared<CboStep>();
    step->kind = CboStep::Kind::Anchor;
    covered.verts = anchors;
    step->covers = covered;
    cur = step;
  } else {
    auto step = std::make_shared<CboStep>();
    step->kind = CboStep::Kind::Scan;
    step->scan_vertex = pattern.vertices[0].alias;
    bound.insert(step->scan_vertex);
    covered.verts.insert(step->scan_vertex);
    step->covers = covered;
    cur = step;
  }

  while (!open_edges.empty()) {
    // Next new vertex reachable from the bound set, in declaration order.
    std::string next;
    for (const auto& v : pattern.vertices) {
      if (bound.count(v.alias)) continue;
      for (const auto* e : pattern.incident_edges(v.alias)) {
        const std::string other = e->from == v.alias ? e->to : e->from;
        if (bound.count(other)) {
          next = v.alias;
          break;
        }
      }
      if (!next.empty()) break;
    }
    Transformation t;
    t.kind = Transformation::Kind::VertexExpansion;
    if (next.empty()) {
      // Only closed edges among bound vertices remain.
      t.loop_close = true;
      t.vertex = *bound.begin();
      for (const auto& ea : open_edges) t.edges.push_back(ea);
      open_edges.clear();
    } else {
      t.vertex = next;
      for (const auto* e : pattern.incident_edges(next)) {
        const std::string other = e->from == next ? e->to : e->from;
        if ((bound.count(other) || other == next) &&
            open_edges.count(e->alias)) {
          t.edges.push_back(e->alias);
          open_edges.erase(e->alias);
        }
      }
      bound.insert(next);
      covered.verts.insert(next);
    }
    for (const auto& ea : t.edges) covered.edges.insert(ea);
    auto step = std::make_shared<CboStep>();
    step->kind = CboStep::Kind::Expand;
    step->sub = cur;
    step->trans = std::move(t);
    step->covers = covered;
    cur = step;
  }
  return cur;
}

namespace {

class PatternLowerer {
 public:
  PatternLowerer(PhysPlan& plan, const PatternGraph& pattern,
                 const BackendProfile& backend, int input,
                 const GlogueQuery* gq)
      : plan_(plan),
        pattern_(pattern),
        backend_(backend),
        input_(input),
        gq_(gq) {}

  int lower(const CboStepPtr& step) {
    switch (step->kind) {
      case CboStep::Kind::Scan: {
        const PatternVertex* v = pattern_.find_vertex(step->scan_vertex);
        ScanOp op;
        op.alias = v->alias;
        op.types = v->types;
        op.predicate = v->predicate;
        op.prefetch = v->columns;
        int id = plan_.add(std::move(op), {});
        annotate(id, step->covers);
        if (gq_)
          plan_.node(id).est_cost =
              backend_.alpha_of("scan") * plan_.node(id).est_freq;
        return id;
      }
      case CboStep::Kind::Anchor: {
        if (input_ < 0)
          throw PlanError("anchored pattern lowered without an input");
        return input_;
      }
      case CboStep::Kind::Expand:
        return lower_expand(step);
      case CboStep::Kind::Join: {
        int l = lower(step->left);
        int r = lower(step->right);
        HashJoinOp op;
        op.keys = step->trans.keys;
        op.type = JoinType::Inner;
        int id = plan_.add(std::move(op), {l, r});
        annotate(id, step->covers);
        if (gq_)
          plan_.node(id).est_cost =
              cost_join(*gq_, subpattern_view(pattern_, step->left->covers),
                        subpattern_view(pattern_, step->right->covers),
                        backend_) +
              comm_cost(step->covers);
        return id;
      }
    }
    throw PlanError("unreachable step kind");
  }

 private:
  void annotate(int id, const SubPattern& covers) {
    if (!gq_ || covers.verts.empty()) return;
    plan_.node(id).est_freq =
        gq_->get_freq(subpattern_view(pattern_, covers));
  }

  double comm_cost(const SubPattern& covers) const {
    if (!gq_ || !backend_.distributed) return 0;
    return gq_->get_freq(subpattern_view(pattern_, covers));
  }

  int lower_expand(const CboStepPtr& step) {
    int cur = lower(step->sub);
    const Transformation& t = step->trans;
    std::set<std::string> bound;
    for (const auto& v : step->sub->covers.verts) bound.insert(v);
    if (input_ >= 0 && step->sub->kind == CboStep::Kind::Anchor)
      bound = step->sub->covers.verts;

    auto edges = expansion_order(pattern_, t, gq_);
    bool use_intersect =
        backend_.expand_style == BackendProfile::ExpandStyle::Intersect &&
        !t.loop_close && edges.size() >= 2;

    if (use_intersect) {
      // Self-loops on the new vertex cannot join the intersection; they
      // close afterwards.
      std::vector<std::string> probes, loops;
      for (const auto& ea : edges) {
        const PatternEdge* e = pattern_.find_edge(ea);
        (e->from == e->to ? loops : probes).push_back(ea);
      }
      if (probes.size() >= 2) {
        ExpandIntersectOp op;
        const PatternVertex* target = pattern_.find_vertex(t.vertex);
        for (const auto& ea : probes) {
          const PatternEdge* e = pattern_.find_edge(ea);
          const std::string& base = e->from == t.vertex ? e->to : e->from;
          IntersectEdge probe;
          probe.base_tag = base;
          probe.edge_alias = e->alias;
          probe.edge_types = e->types;
          probe.dir = dir_from(*e, base);
          probe.edge_predicate = e->predicate;
          op.edges.push_back(std::move(probe));
        }
        op.target_alias = target->alias;
        op.target_types = target->types;
        op.target_predicate = target->predicate;
        op.prefetch = target->columns;
        cur = plan_.add(std::move(op), {cur});
        annotate(cur, step->covers);
        if (gq_)
          plan_.node(cur).est_cost =
              cost_expand_intersect(*gq_, pattern_, step->sub->covers, t,
                                    backend_) +
              comm_cost(step->covers);
        for (const auto& ea : loops) cur = close_edge(cur, ea, t.vertex);
        return cur;
      }
    }

    // Into-style: append edges one at a time, first binds the new vertex.
    bool vertex_bound = t.loop_close;
    for (const auto& ea : edges) {
      const PatternEdge* e = pattern_.find_edge(ea);
      bool to_new = !t.loop_close &&
                    (e->from == t.vertex || e->to == t.vertex) &&
                    e->from != e->to;
      if (to_new && !vertex_bound) {
        const std::string& base = e->from == t.vertex ? e->to : e->from;
        const PatternVertex* target = pattern_.find_vertex(t.vertex);
        EdgeDir dir = dir_from(*e, base);
        ExpandOp x;
        x.base_tag = base;
        x.edge_alias = e->alias;
        x.edge_types = e->types;
        x.dir = dir;
        x.edge_predicate = e->predicate;
        x.prefetch = e->columns;
        cur = plan_.add(std::move(x), {cur});
        GetVOp g;
        g.edge_tag = e->alias;
        g.base_tag = base;
        g.alias = target->alias;
        g.types = target->types;
        g.opt = opt_for(dir);
        g.predicate = target->predicate;
        g.prefetch = target->columns;
        cur = plan_.add(std::move(g), {cur});
        vertex_bound = true;
      } else {
        cur = close_edge(cur, ea, t.vertex);
      }
      annotate(cur, partial_covers(step, ea));
    }
    annotate(cur, step->covers);
    if (gq_) {
      const SubPattern& src = step->sub->covers;
      double compute =
          backend_.expand_style == BackendProfile::ExpandStyle::Into
              ? cost_expand_into(*gq_, pattern_, src, t, backend_)
              : cost_expand_intersect(*gq_, pattern_, src, t, backend_);
      plan_.node(cur).est_cost = compute + comm_cost(step->covers);
    }
    return cur;
  }

  // Expand an edge whose both endpoints are already bound.
  int close_edge(int cur, const std::string& edge_alias,
                 const std::string& target_hint) {
    const PatternEdge* e = pattern_.find_edge(edge_alias);
    const std::string base =
        e->from == target_hint && e->from != e->to ? e->to : e->from;
    const std::string other = e->from == base ? e->to : e->from;
    EdgeDir dir = dir_from(*e, base);
    ExpandOp x;
    x.base_tag = base;
    x.edge_alias = e->alias;
    x.edge_types = e->types;
    x.dir = dir;
    x.edge_predicate = e->predicate;
    x.prefetch = e->columns;
    cur = plan_.add(std::move(x), {cur});
    GetVOp g;
    g.edge_tag = e->alias;
    g.base_tag = base;
    g.alias = other;
    g.types = TypeConstraint::all();
    g.opt = opt_for(dir);
    g.bound = true;
    cur = plan_.add(std::move(g), {cur});
    return cur;
  }

  SubPattern partial_covers(const CboStepPtr& step, const std::string& upto) {
    SubPattern s = step->sub->covers;
    if (!step->trans.loop_close) s.verts.insert(step->trans.vertex);
    auto edges = expansion_order(pattern_, step->trans, gq_);
    for (const auto& ea : edges) {
      s.edges.insert(ea);
      if (ea == upto) break;
    }
    return s;
  }

  PhysPlan& plan_;
  const PatternGraph& pattern_;
  const BackendProfile& backend_;
  int input_;
  const GlogueQuery* gq_;
};

}  // namespace

int lower_pattern(PhysPlan& plan, const PatternGraph& pattern,
                  const MatchPatternOp& op, const CboStepPtr& step,
                  const BackendProfile& backend, Semantics semantics,
                  int input, const std::set<std::string>& pass_through,
                  const GlogueQuery* gq) {
  PatternLowerer lowerer(plan, pattern, backend, input, gq);
  int cur = lowerer.lower(step);

  if (semantics == Semantics::EdgeDistinct && !pattern.edges.empty()) {
    EdgeDistinctFilterOp filter;
    if (op.anchor)
      for (const auto& e : op.anchor->context.edges)
        filter.edge_aliases.push_back(e.alias);
    for (const auto& e : pattern.edges)
      filter.edge_aliases.push_back(e.alias);
    cur = plan.add(std::move(filter), {cur});
  }

  for (const auto& spec : pattern.paths)
    cur = plan.add(PathAssembleOp{spec, true}, {cur});

  // Trim to the pattern's declared outputs plus pass-through aliases.
  ProjectOpP proj;
  std::set<std::string> outputs = pass_through;
  for (const auto& v : pattern.vertices)
    if (v.output) outputs.insert(v.alias);
  for (const auto& e : pattern.edges)
    if (e.output) outputs.insert(e.alias);
  for (const auto& p : pattern.paths) outputs.insert(p.alias);
  for (const auto& a : outputs)
    proj.columns.push_back(ProjectColumn{Expr::tag_ref(a), a});
  cur = plan.add(std::move(proj), {cur});
  return cur;
}

namespace {

int lower_relational(PhysPlan& phys, const GirNode& n,
                     const std::vector<int>& inputs) {
  struct Visitor {
    PhysPlan& phys;
    const std::vector<int>& inputs;

    int operator()(const MatchPatternOp&) {
      throw PlanError("pattern reached relational lowering");
    }
    int operator()(const ProjectOpL& op) {
      return phys.add(ProjectOpP{op.columns}, inputs);
    }
    int operator()(const SelectOpL& op) {
      return phys.add(SelectOpP{op.condition}, inputs);
    }
    int operator()(const OrderOpL& op) {
      return phys.add(OrderOpP{op.keys}, inputs);
    }
    int operator()(const LimitOpL& op) {
      return phys.add(LimitOpP{op.count}, inputs);
    }
    int operator()(const GroupOpL& op) {
      return phys.add(GroupOpP{op.keys, op.aggs}, inputs);
    }
    int operator()(const UnfoldOpL& op) {
      return phys.add(UnfoldOpP{op.tag, op.alias}, inputs);
    }
    int operator()(const JoinOpL& op) {
      return phys.add(HashJoinOp{op.keys, op.type}, inputs);
    }
    int operator()(const UnionOpL&) { return phys.add(UnionOpP{}, inputs); }
  };
  return std::visit(Visitor{phys, inputs}, n.data);
}

}  // namespace

RunOutcome plan_gir(const GirPlan& plan, const DataGraph& graph,
                    const GraphSchema& schema,
                    const PipelineOptions& options) {
  RunOutcome out;

  auto diags = validate(plan);
  if (!diags.empty())
    throw PlanError("invalid plan: " + diags[0].message);

  // Heuristic rewrites first, then inference, then cost-based ordering.
  std::set<std::string> logical(kLogicalRuleNames.begin(),
                                kLogicalRuleNames.end());
  std::set<std::string> enabled_logical;
  for (const auto& r : options.enabled_rules)
    if (logical.count(r)) enabled_logical.insert(r);
  ApplyResult rewritten =
      apply(plan, default_logical_dag(enabled_logical));
  out.rule_trace = rewritten.trace;
  GirPlan& logical_plan = rewritten.plan;

  for (auto& n : logical_plan.nodes) {
    auto* mp = std::get_if<MatchPatternOp>(&n.data);
    if (!mp) continue;
    InferenceResult inferred = infer_types(mp->graph, schema);
    if (!is_valid(inferred)) {
      out.unsatisfiable = true;
      out.diagnostic = "unsatisfiable pattern: no valid types for '" +
                       invalid_alias(inferred) + "'";
      out.optimized_logical = logical_plan;
      return out;
    }
    PatternGraph narrowed = valid_pattern(inferred);
    // Inference rebuilds constraints; keep trim flags and columns.
    mp->graph = std::move(narrowed);
    if (mp->anchor) {
      for (auto& v : mp->anchor->context.vertices) {
        if (const PatternVertex* nv = mp->graph.find_vertex(v.alias))
          v.types = nv->types;
      }
    }
  }

  std::optional<GlogueQuery> gq;
  if (options.stats) gq.emplace(*options.stats, &schema);

  PhysPlan phys;
  phys.semantics = logical_plan.semantics;
  std::map<int, int> phys_of;
  for (int id : logical_plan.topo_order()) {
    const GirNode& n = logical_plan.node(id);
    if (const auto* mp = std::get_if<MatchPatternOp>(&n.data)) {
      std::set<std::string> anchors;
      if (mp->anchor)
        for (const auto& v : mp->anchor->context.vertices)
          anchors.insert(v.alias);
      CboStepPtr step;
      if (gq) {
        OptimizeResult opt = optimize_pattern(mp->graph, *gq, options.backend,
                                              options.pruning, anchors);
        step = opt.plan;
      } else {
        step = user_order_plan(mp->graph, anchors);
      }
      int input = -1;
      std::set<std::string> pass;
      if (!n.inputs.empty()) {
        input = phys_of.at(n.inputs[0]);
        pass = logical_plan.output_aliases(n.inputs[0]);
      }
      phys_of[id] =
          lower_pattern(phys, mp->graph, *mp, step, options.backend,
                        logical_plan.semantics, input, pass,
                        gq ? &*gq : nullptr);
    } else {
      std::vector<int> inputs;
      for (int in : n.inputs) inputs.push_back(phys_of.at(in));
      phys_of[id] = lower_relational(phys, n, inputs);
    }
  }
  phys.sink = phys_of.at(logical_plan.sink);

  std::set<std::string> physical(kPhysicalRuleNames.begin(),
                                 kPhysicalRuleNames.end());
  std::set<std::string> enabled_physical;
  for (const auto& r : options.enabled_rules)
    if (physical.count(r)) enabled_physical.insert(r);
  apply_physical_rules(phys, schema, options.backend, enabled_physical,
                       &out.rule_trace);

  out.optimized_logical = std::move(logical_plan);
  out.physical = std::move(phys);
  (void)graph;
  return out;
}

RunOutcome run_gir(const GirPlan& plan, const DataGraph& graph,
                   const GraphSchema& schema,
                   const PipelineOptions& options) {
  RunOutcome out = plan_gir(plan, graph, schema, options);
  if (out.unsatisfiable) return out;
  auto [results, stats] = execute(out.physical, graph);
  out.results = std::move(results);
  out.stats = std::move(stats);
  return out;
}

}  // namespace gopt
