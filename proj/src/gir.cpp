#include "gopt/gir.hpp"

#include <algorithm>
#include <map>

namespace gopt {

const char* to_string(Semantics s) {
  return s == Semantics::Homomorphism ? "homomorphism" : "edge_distinct";
}

const char* to_string(JoinType t) {
  switch (t) {
    case JoinType::Inner: return "inner";
    case JoinType::LeftOuter: return "left_outer";
    case JoinType::RightOuter: return "right_outer";
    case JoinType::FullOuter: return "full_outer";
    case JoinType::Semi: return "semi";
    case JoinType::Anti: return "anti";
  }
  return "?";
}

const char* to_string(AggFn f) {
  switch (f) {
    case AggFn::Count: return "count";
    case AggFn::CountDistinct: return "count_distinct";
    case AggFn::Sum: return "sum";
    case AggFn::Avg: return "avg";
    case AggFn::Min: return "min";
    case AggFn::Max: return "max";
    case AggFn::First: return "first";
  }
  return "?";
}

const char* to_string(VertexOpt o) {
  switch (o) {
    case VertexOpt::Src: return "src";
    case VertexOpt::Dst: return "dst";
    case VertexOpt::Other: return "other";
  }
  return "?";
}

const char* GirNode::kind_name() const {
  struct Visitor {
    const char* operator()(const MatchPatternOp&) { return "match_pattern"; }
    const char* operator()(const ProjectOpL&) { return "project"; }
    const char* operator()(const SelectOpL&) { return "select"; }
    const char* operator()(const OrderOpL&) { return "order"; }
    const char* operator()(const LimitOpL&) { return "limit"; }
    const char* operator()(const GroupOpL&) { return "group"; }
    const char* operator()(const UnfoldOpL&) { return "unfold"; }
    const char* operator()(const JoinOpL&) { return "join"; }
    const char* operator()(const UnionOpL&) { return "union"; }
  };
  return std::visit(Visitor{}, data);
}

std::set<std::string> GirPlan::output_aliases(int id) const {
  const GirNode& n = node(id);
  struct Visitor {
    const GirPlan& plan;
    const GirNode& n;

    std::set<std::string> operator()(const MatchPatternOp& op) {
      std::set<std::string> out;
      if (op.anchor) {
        for (const auto& v : op.anchor->context.vertices)
          if (v.output) out.insert(v.alias);
        for (const auto& e : op.anchor->context.edges)
          if (e.output) out.insert(e.alias);
      }
      if (!n.inputs.empty()) {
        auto in = plan.output_aliases(n.inputs[0]);
        out.insert(in.begin(), in.end());
      }
      for (const auto& v : op.graph.vertices)
        if (v.output) out.insert(v.alias);
      for (const auto& e : op.graph.edges)
        if (e.output) out.insert(e.alias);
      for (const auto& p : op.graph.paths) out.insert(p.alias);
      return out;
    }
    std::set<std::string> operator()(const ProjectOpL& op) {
      std::set<std::string> out;
      for (const auto& c : op.columns) out.insert(c.alias);
      return out;
    }
    std::set<std::string> operator()(const SelectOpL&) {
      return plan.output_aliases(n.inputs[0]);
    }
    std::set<std::string> operator()(const OrderOpL&) {
      return plan.output_aliases(n.inputs[0]);
    }
    std::set<std::string> operator()(const LimitOpL&) {
      return plan.output_aliases(n.inputs[0]);
    }
    std::set<std::string> operator()(const GroupOpL& op) {
      std::set<std::string> out;
      for (const auto& k : op.keys) out.insert(k.alias);
      for (const auto& a : op.aggs) out.insert(a.alias);
      return out;
    }
    std::set<std::string> operator()(const UnfoldOpL& op) {
      auto out = plan.output_aliases(n.inputs[0]);
      out.insert(op.alias);
      return out;
    }
    std::set<std::string> operator()(const JoinOpL& op) {
      auto out = plan.output_aliases(n.inputs[0]);
      if (op.type != JoinType::Semi && op.type != JoinType::Anti) {
        auto r = plan.output_aliases(n.inputs[1]);
        out.insert(r.begin(), r.end());
      }
      return out;
    }
    std::set<std::string> operator()(const UnionOpL&) {
      return plan.output_aliases(n.inputs[0]);
    }
  };
  return std::visit(Visitor{*this, n}, n.data);
}

std::vector<int> GirPlan::topo_order() const {
  std::vector<int> order;
  std::set<int> seen;
  // Post-order DFS from the sink.
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

PatternGraph to_pattern_graph(const std::vector<PatternOp>& body) {
  PatternGraph g;
  std::string prev_alias;  // alias of the previous op's output
  const ExpandEdgeOp* pending_edge = nullptr;
  const ExpandPathOp* pending_path = nullptr;
  std::string pending_tag;

  auto ensure_vertex = [&](const std::string& alias, const TypeConstraint& tc,
                           ExprPtr pred) -> PatternVertex* {
    if (PatternVertex* v = g.find_vertex(alias)) {
      v->types = v->types.intersect(tc);
      if (pred)
        v->predicate = v->predicate
                           ? Expr::logic(BoolOp::And, v->predicate, pred)
                           : pred;
      return v;
    }
    g.vertices.push_back(PatternVertex{alias, tc, pred});
    return &g.vertices.back();
  };

  auto check_opt = [](EdgeDir dir, VertexOpt opt) {
    bool ok = (dir == EdgeDir::Out && opt == VertexOpt::Dst) ||
              (dir == EdgeDir::In && opt == VertexOpt::Src) ||
              (dir == EdgeDir::Both && opt == VertexOpt::Other);
    if (!ok)
      throw PlanError("get_v opt '" + std::string(to_string(opt)) +
                      "' does not match expand direction '" + to_string(dir) +
                      "'");
  };

  for (const auto& op : body) {
    if (const auto* gv = std::get_if<GetVertexOp>(&op)) {
      if (pending_edge) {
        check_opt(pending_edge->dir, gv->opt);
        ensure_vertex(gv->alias, gv->types, gv->predicate);
        g.edges.push_back(PatternEdge{pending_edge->alias, pending_tag,
                                      gv->alias, pending_edge->dir,
                                      pending_edge->types,
                                      pending_edge->predicate});
        pending_edge = nullptr;
      } else if (pending_path) {
        const ExpandPathOp& ep = *pending_path;
        check_opt(ep.hop_edge.dir, gv->opt);
        PathSpec spec;
        spec.alias = ep.alias;
        spec.start = pending_tag;
        spec.opt = ep.opt;
        std::string cur = pending_tag;
        for (int i = 0; i < ep.length; ++i) {
          bool last = i + 1 == ep.length;
          std::string edge_alias = ep.alias + "#e" + std::to_string(i);
          std::string next =
              last ? gv->alias : ep.alias + "#v" + std::to_string(i);
          ensure_vertex(next, last ? gv->types : TypeConstraint::all(),
                        last ? gv->predicate : nullptr);
          if (!last) {
            g.find_vertex(next)->output = false;
            spec.inner_vertices.push_back(next);
          }
          g.edges.push_back(PatternEdge{edge_alias, cur, next,
                                        ep.hop_edge.dir, ep.hop_edge.types,
                                        ep.hop_edge.predicate});
          g.edges.back().output = false;
          spec.edge_aliases.push_back(edge_alias);
          cur = next;
        }
        spec.end = cur;
        g.paths.push_back(std::move(spec));
        pending_path = nullptr;
      } else {
        // Anchor vertex retrieved directly from the graph.
        ensure_vertex(gv->alias, gv->types, gv->predicate);
      }
      prev_alias = gv->alias;
    } else if (const auto* ee = std::get_if<ExpandEdgeOp>(&op)) {
      if (pending_edge || pending_path)
        throw PlanError("expand without a closing get_v");
      pending_tag = ee->tag.empty() ? prev_alias : ee->tag;
      if (pending_tag.empty() || !g.find_vertex(pending_tag))
        throw PlanError("expand_e references unknown tag '" + pending_tag +
                        "'");
      pending_edge = ee;
      prev_alias = ee->alias;
    } else if (const auto* ep = std::get_if<ExpandPathOp>(&op)) {
      if (pending_edge || pending_path)
        throw PlanError("expand without a closing get_v");
      if (ep->length < 1) throw PlanError("expand_path length must be >= 1");
      pending_tag = ep->tag.empty() ? prev_alias : ep->tag;
      if (pending_tag.empty() || !g.find_vertex(pending_tag))
        throw PlanError("expand_path references unknown tag '" + pending_tag +
                        "'");
      pending_path = ep;
      prev_alias = ep->alias;
    }
  }
  if (pending_edge || pending_path)
    throw PlanError("pattern ends with a dangling expand");
  g.validate();
  return g;
}

// --- builder ---

int GirBuilder::add_node(GirOpData data, std::vector<int> inputs) {
  GirNode n;
  n.id = static_cast<int>(plan_.nodes.size());
  n.inputs = std::move(inputs);
  n.data = std::move(data);
  plan_.nodes.push_back(std::move(n));
  return plan_.nodes.back().id;
}

GirBuilder& GirBuilder::pattern_start() {
  if (in_pattern_) throw PlanError("nested pattern_start");
  in_pattern_ = true;
  pattern_in_progress_.clear();
  return *this;
}

GirBuilder& GirBuilder::get_v(const std::string& tag, const std::string& alias,
                              TypeConstraint types, VertexOpt opt,
                              ExprPtr predicate) {
  if (!in_pattern_) throw PlanError("get_v outside a pattern section");
  pattern_in_progress_.push_back(
      GetVertexOp{tag, alias, std::move(types), opt, std::move(predicate)});
  return *this;
}

GirBuilder& GirBuilder::expand_e(const std::string& tag,
                                 const std::string& alias,
                                 TypeConstraint types, EdgeDir dir,
                                 ExprPtr predicate) {
  if (!in_pattern_) throw PlanError("expand_e outside a pattern section");
  pattern_in_progress_.push_back(
      ExpandEdgeOp{tag, alias, std::move(types), dir, std::move(predicate)});
  return *this;
}

GirBuilder& GirBuilder::expand_path(const std::string& tag,
                                    const std::string& alias,
                                    TypeConstraint edge_types, EdgeDir dir,
                                    int length, PathOpt opt) {
  if (!in_pattern_) throw PlanError("expand_path outside a pattern section");
  ExpandPathOp op;
  op.tag = tag;
  op.alias = alias;
  op.hop_edge = ExpandEdgeOp{"", alias + "#hop", std::move(edge_types), dir};
  op.length = length;
  op.opt = opt;
  pattern_in_progress_.push_back(std::move(op));
  return *this;
}

int GirBuilder::pattern_end() {
  if (!in_pattern_) throw PlanError("pattern_end without pattern_start");
  in_pattern_ = false;
  MatchPatternOp op;
  op.graph = to_pattern_graph(pattern_in_progress_);
  pattern_in_progress_.clear();
  return add_node(std::move(op), {});
}

int GirBuilder::select(int input, ExprPtr condition) {
  return add_node(SelectOpL{std::move(condition)}, {input});
}

int GirBuilder::project(int input, std::vector<ProjectColumn> columns) {
  return add_node(ProjectOpL{std::move(columns)}, {input});
}

int GirBuilder::group(int input, std::vector<ProjectColumn> keys,
                      std::vector<AggCall> aggs) {
  return add_node(GroupOpL{std::move(keys), std::move(aggs)}, {input});
}

int GirBuilder::order(int input, std::vector<OrderKey> keys) {
  return add_node(OrderOpL{std::move(keys)}, {input});
}

int GirBuilder::limit(int input, int64_t count) {
  if (count < 0) throw PlanError("limit count must be >= 0");
  return add_node(LimitOpL{count}, {input});
}

int GirBuilder::join(int left, int right, std::vector<std::string> keys,
                     JoinType type) {
  return add_node(JoinOpL{std::move(keys), type}, {left, right});
}

int GirBuilder::set_union(int left, int right) {
  return add_node(UnionOpL{}, {left, right});
}

int GirBuilder::unfold(int input, const std::string& tag,
                       const std::string& alias) {
  return add_node(UnfoldOpL{tag, alias}, {input});
}

GirPlan GirBuilder::finish(int sink, Semantics semantics) {
  if (in_pattern_) throw PlanError("finish inside a pattern section");
  plan_.sink = sink;
  plan_.semantics = semantics;
  auto diags = gopt::validate(plan_);
  if (!diags.empty()) throw PlanError("invalid plan: " + diags[0].message);
  return plan_;
}

// --- validation ---

namespace {

void check_expr_tags(const ExprPtr& e, const std::set<std::string>& available,
                     const std::string& where,
                     std::vector<Diagnostic>& diags) {
  if (!e) return;
  for (const auto& tag : expr_tags(e)) {
    if (!available.count(tag))
      diags.push_back(
          {where + " references tag '" + tag + "' not available upstream"});
  }
}

}  // namespace

std::vector<Diagnostic> validate(const GirPlan& plan) {
  std::vector<Diagnostic> diags;
  if (plan.sink < 0 || plan.sink >= static_cast<int>(plan.nodes.size())) {
    diags.push_back({"plan has no valid sink"});
    return diags;
  }
  for (const auto& n : plan.nodes) {
    for (int in : n.inputs) {
      if (in < 0 || in >= static_cast<int>(plan.nodes.size())) {
        diags.push_back({"node " + std::to_string(n.id) + " has bad input"});
        return diags;
      }
      if (in >= n.id)
        diags.push_back({"node " + std::to_string(n.id) +
                         " input does not precede it (cycle)"});
    }
  }
  if (!diags.empty()) return diags;

  // Exactly one sink: every non-sink node reachable from the sink must be
  // someone's input; nodes outside the sink cone are diagnosed.
  auto order = plan.topo_order();
  std::set<int> reachable(order.begin(), order.end());
  for (const auto& n : plan.nodes) {
    if (!reachable.count(n.id))
      diags.push_back({"node " + std::to_string(n.id) +
                       " is not reachable from the sink"});
  }

  for (int id : order) {
    const GirNode& n = plan.node(id);
    std::set<std::string> avail;
    for (int in : n.inputs) {
      auto s = plan.output_aliases(in);
      avail.insert(s.begin(), s.end());
    }
    struct Visitor {
      const GirPlan& plan;
      const GirNode& n;
      std::set<std::string>& avail;
      std::vector<Diagnostic>& diags;

      void operator()(const MatchPatternOp& op) {
        try {
          op.graph.validate();
        } catch (const PatternError& e) {
          diags.push_back({std::string("pattern in node ") +
                           std::to_string(n.id) + ": " + e.what()});
        }
        if (op.anchor && n.inputs.empty())
          diags.push_back({"anchored pattern without an input"});
        std::set<std::string> local = avail;
        for (const auto& v : op.graph.vertices) local.insert(v.alias);
        for (const auto& e : op.graph.edges) local.insert(e.alias);
        for (const auto& v : op.graph.vertices)
          check_expr_tags(v.predicate, local, "predicate on " + v.alias,
                          diags);
        for (const auto& e : op.graph.edges)
          check_expr_tags(e.predicate, local, "predicate on " + e.alias,
                          diags);
      }
      void operator()(const ProjectOpL& op) {
        std::set<std::string> seen;
        for (const auto& c : op.columns) {
          check_expr_tags(c.expr, avail, "project", diags);
          if (!seen.insert(c.alias).second)
            diags.push_back({"duplicate project alias '" + c.alias + "'"});
        }
      }
      void operator()(const SelectOpL& op) {
        check_expr_tags(op.condition, avail, "select", diags);
      }
      void operator()(const OrderOpL& op) {
        for (const auto& k : op.keys)
          check_expr_tags(k.expr, avail, "order", diags);
      }
      void operator()(const LimitOpL&) {}
      void operator()(const GroupOpL& op) {
        std::set<std::string> seen;
        for (const auto& k : op.keys) {
          check_expr_tags(k.expr, avail, "group key", diags);
          if (!seen.insert(k.alias).second)
            diags.push_back({"duplicate group alias '" + k.alias + "'"});
        }
        for (const auto& a : op.aggs) {
          check_expr_tags(a.arg, avail, "aggregate", diags);
          if (!seen.insert(a.alias).second)
            diags.push_back({"duplicate group alias '" + a.alias + "'"});
        }
      }
      void operator()(const UnfoldOpL& op) {
        if (!avail.count(op.tag))
          diags.push_back({"unfold references unknown tag '" + op.tag + "'"});
      }
      void operator()(const JoinOpL& op) {
        auto left = plan.output_aliases(n.inputs[0]);
        auto right = plan.output_aliases(n.inputs[1]);
        std::set<std::string> shared;
        std::set_intersection(left.begin(), left.end(), right.begin(),
                              right.end(),
                              std::inserter(shared, shared.begin()));
        for (const auto& k : op.keys) {
          if (!left.count(k) || !right.count(k))
            diags.push_back({"join key '" + k + "' missing from an input"});
        }
        for (const auto& s : shared) {
          if (std::find(op.keys.begin(), op.keys.end(), s) == op.keys.end())
            diags.push_back({"alias '" + s +
                             "' is shared by both join inputs but is not a "
                             "join key"});
        }
      }
      void operator()(const UnionOpL&) {
        auto left = plan.output_aliases(n.inputs[0]);
        auto right = plan.output_aliases(n.inputs[1]);
        if (left != right)
          diags.push_back({"union inputs have different output aliases"});
      }
    };
    if ((std::holds_alternative<JoinOpL>(n.data) ||
         std::holds_alternative<UnionOpL>(n.data)) &&
        n.inputs.size() != 2) {
      diags.push_back({"binary operator with arity != 2"});
      continue;
    }
    if (!std::holds_alternative<MatchPatternOp>(n.data) && n.inputs.empty()) {
      diags.push_back(
          {std::string(n.kind_name()) + " node has no input"});
      continue;
    }
    std::visit(Visitor{plan, n, avail, diags}, n.data);
  }
  return diags;
}

}  // namespace gopt
