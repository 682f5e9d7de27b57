#include "gopt/rbo.hpp"

#include <algorithm>
#include <functional>

namespace gopt {

const std::vector<std::string> kLogicalRuleNames = {
    "filter_into_join", "filter_into_pattern", "field_trim",
    "join_to_pattern", "com_sub_pattern"};
const std::vector<std::string> kPhysicalRuleNames = {
    "ev_fusion", "deg_fusion", "pk_index", "late_project"};
const std::vector<std::string> kAllRuleNames = [] {
  std::vector<std::string> all = kLogicalRuleNames;
  all.insert(all.end(), kPhysicalRuleNames.begin(), kPhysicalRuleNames.end());
  return all;
}();

GirPlan compact(const GirPlan& plan) {
  GirPlan out;
  out.semantics = plan.semantics;
  auto order = plan.topo_order();
  std::map<int, int> remap;
  for (int id : order) {
    GirNode n = plan.node(id);
    remap[id] = static_cast<int>(out.nodes.size());
    n.id = remap[id];
    for (auto& in : n.inputs) in = remap.at(in);
    out.nodes.push_back(std::move(n));
  }
  out.sink = remap.at(plan.sink);
  return out;
}

namespace {

bool single_alias_of(const ExprPtr& e, std::string* alias) {
  auto tags = expr_tags(e);
  if (tags.size() != 1) return false;
  *alias = *tags.begin();
  return true;
}

}  // namespace

// --- FilterIntoJoin ---

bool filter_into_join(GirPlan& plan) {
  for (size_t idx = 0; idx < plan.nodes.size(); ++idx) {
    const int sel_id = plan.nodes[idx].id;
    const auto* sel = std::get_if<SelectOpL>(&plan.nodes[idx].data);
    if (!sel) continue;
    const int join_id = plan.nodes[idx].inputs[0];
    const auto* join = std::get_if<JoinOpL>(&plan.node(join_id).data);
    if (!join) continue;
    const JoinType jt = join->type;

    auto left_out = plan.output_aliases(plan.node(join_id).inputs[0]);
    auto right_out = plan.output_aliases(plan.node(join_id).inputs[1]);
    bool left_ok = jt == JoinType::Inner || jt == JoinType::LeftOuter ||
                   jt == JoinType::Semi || jt == JoinType::Anti;
    bool right_ok = jt == JoinType::Inner || jt == JoinType::RightOuter;

    std::vector<ExprPtr> stay, to_left, to_right;
    for (const auto& c : Expr::split_and(sel->condition)) {
      auto tags = expr_tags(c);
      bool in_left = std::all_of(
          tags.begin(), tags.end(),
          [&](const std::string& t) { return left_out.count(t) > 0; });
      bool in_right = std::all_of(
          tags.begin(), tags.end(),
          [&](const std::string& t) { return right_out.count(t) > 0; });
      if (!tags.empty() && in_left && left_ok)
        to_left.push_back(c);
      else if (!tags.empty() && in_right && right_ok)
        to_right.push_back(c);
      else
        stay.push_back(c);
    }
    if (to_left.empty() && to_right.empty()) continue;

    auto push_side = [&](size_t side, const std::vector<ExprPtr>& conjuncts) {
      if (conjuncts.empty()) return;
      GirNode ns;
      ns.id = static_cast<int>(plan.nodes.size());
      ns.inputs = {plan.node(join_id).inputs[side]};
      ns.data = SelectOpL{Expr::join_and(conjuncts)};
      plan.nodes.push_back(std::move(ns));
      plan.node(join_id).inputs[side] = plan.nodes.back().id;
    };
    push_side(0, to_left);
    push_side(1, to_right);

    if (stay.empty()) {
      int bypass = plan.node(sel_id).inputs[0];
      for (auto& m : plan.nodes)
        for (auto& in : m.inputs)
          if (in == sel_id) in = bypass;
      if (plan.sink == sel_id) plan.sink = bypass;
    } else {
      std::get<SelectOpL>(plan.node(sel_id).data).condition =
          Expr::join_and(stay);
    }
    plan = compact(plan);
    return true;
  }
  return false;
}

// --- FilterIntoPattern ---

bool filter_into_pattern(GirPlan& plan) {
  for (size_t idx = 0; idx < plan.nodes.size(); ++idx) {
    const int sel_id = plan.nodes[idx].id;
    auto* sel = std::get_if<SelectOpL>(&plan.nodes[idx].data);
    if (!sel) continue;
    const int child_id = plan.nodes[idx].inputs[0];
    auto* mp = std::get_if<MatchPatternOp>(&plan.node(child_id).data);
    if (!mp) continue;

    std::vector<ExprPtr> stay, pushed;
    for (const auto& c : Expr::split_and(sel->condition)) {
      std::string alias;
      if (!single_alias_of(c, &alias)) {
        stay.push_back(c);
        continue;
      }
      if (PatternVertex* v = mp->graph.find_vertex(alias)) {
        v->predicate =
            v->predicate ? Expr::logic(BoolOp::And, v->predicate, c) : c;
        pushed.push_back(c);
      } else if (PatternEdge* e = mp->graph.find_edge(alias)) {
        e->predicate =
            e->predicate ? Expr::logic(BoolOp::And, e->predicate, c) : c;
        pushed.push_back(c);
      } else {
        stay.push_back(c);
      }
    }
    if (pushed.empty()) continue;
    if (stay.empty()) {
      for (auto& m : plan.nodes)
        for (auto& in : m.inputs)
          if (in == sel_id) in = child_id;
      if (plan.sink == sel_id) plan.sink = child_id;
    } else {
      sel->condition = Expr::join_and(stay);
    }
    plan = compact(plan);
    return true;
  }
  return false;
}

// --- FieldTrim ---

namespace {

struct Needs {
  std::set<std::string> aliases;
  std::map<std::string, std::set<std::string>> props;
};

void add_expr_needs(const ExprPtr& e, Needs& n) {
  if (!e) return;
  for (const auto& t : expr_tags(e)) n.aliases.insert(t);
  e->collect_props(n.props);
}

}  // namespace

bool field_trim(GirPlan& plan) {
  // Downward dataflow of required aliases/properties from the sink.
  std::map<int, Needs> need;
  auto order = plan.topo_order();
  {
    Needs sink_needs;
    sink_needs.aliases = plan.output_aliases(plan.sink);
    need[plan.sink] = sink_needs;
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const GirNode& n = plan.node(*it);
    Needs& mine = need[n.id];

    struct Visitor {
      const GirPlan& plan;
      const GirNode& n;
      Needs& mine;
      std::map<int, Needs>& need;

      void propagate(int input, Needs in_needs) {
        Needs& target = need[input];
        target.aliases.insert(in_needs.aliases.begin(),
                              in_needs.aliases.end());
        for (auto& [a, ps] : in_needs.props)
          target.props[a].insert(ps.begin(), ps.end());
      }

      void operator()(const MatchPatternOp& op) {
        if (n.inputs.empty()) return;
        Needs in;
        std::set<std::string> own;
        for (const auto& v : op.graph.vertices) own.insert(v.alias);
        for (const auto& e : op.graph.edges) own.insert(e.alias);
        for (const auto& p : op.graph.paths) own.insert(p.alias);
        for (const auto& a : mine.aliases)
          if (!own.count(a)) in.aliases.insert(a);
        for (const auto& [a, ps] : mine.props)
          if (!own.count(a)) in.props[a] = ps;
        if (op.anchor) {
          // The whole context stays live: anchor vertices seed the
          // expansion, and context edge bindings feed this pattern's
          // edge-distinct filter and any inherited path assembly.
          for (const auto& v : op.anchor->context.vertices)
            in.aliases.insert(v.alias);
          for (const auto& e : op.anchor->context.edges)
            in.aliases.insert(e.alias);
        }
        propagate(n.inputs[0], std::move(in));
      }
      void operator()(const ProjectOpL& op) {
        Needs in;
        for (const auto& c : op.columns) {
          add_expr_needs(c.expr, in);
          // Pass-through element columns forward later property reads to
          // the underlying alias.
          if (c.expr->kind == Expr::Kind::TagRef) {
            auto pit = mine.props.find(c.alias);
            if (pit != mine.props.end())
              in.props[c.expr->tag].insert(pit->second.begin(),
                                           pit->second.end());
          }
        }
        propagate(n.inputs[0], std::move(in));
      }
      void operator()(const SelectOpL& op) {
        Needs in = mine;
        add_expr_needs(op.condition, in);
        propagate(n.inputs[0], std::move(in));
      }
      void operator()(const OrderOpL& op) {
        Needs in = mine;
        for (const auto& k : op.keys) add_expr_needs(k.expr, in);
        propagate(n.inputs[0], std::move(in));
      }
      void operator()(const LimitOpL&) { propagate(n.inputs[0], mine); }
      void operator()(const GroupOpL& op) {
        Needs in;
        for (const auto& k : op.keys) {
          add_expr_needs(k.expr, in);
          if (k.expr->kind == Expr::Kind::TagRef) {
            auto pit = mine.props.find(k.alias);
            if (pit != mine.props.end())
              in.props[k.expr->tag].insert(pit->second.begin(),
                                           pit->second.end());
          }
        }
        for (const auto& a : op.aggs) add_expr_needs(a.arg, in);
        propagate(n.inputs[0], std::move(in));
      }
      void operator()(const UnfoldOpL& op) {
        Needs in = mine;
        in.aliases.erase(op.alias);
        in.aliases.insert(op.tag);
        propagate(n.inputs[0], std::move(in));
      }
      void operator()(const JoinOpL& op) {
        auto left_out = plan.output_aliases(n.inputs[0]);
        auto right_out = plan.output_aliases(n.inputs[1]);
        Needs l, r;
        for (const auto& a : mine.aliases) {
          if (left_out.count(a)) l.aliases.insert(a);
          if (right_out.count(a)) r.aliases.insert(a);
        }
        for (const auto& [a, ps] : mine.props) {
          if (left_out.count(a)) l.props[a] = ps;
          if (right_out.count(a)) r.props[a] = ps;
        }
        for (const auto& k : op.keys) {
          l.aliases.insert(k);
          r.aliases.insert(k);
        }
        propagate(n.inputs[0], std::move(l));
        propagate(n.inputs[1], std::move(r));
      }
      void operator()(const UnionOpL&) {
        propagate(n.inputs[0], mine);
        propagate(n.inputs[1], mine);
      }
    };
    std::visit(Visitor{plan, n, mine, need}, n.data);
  }

  // Apply liveness to every pattern.
  bool changed = false;
  for (auto& n : plan.nodes) {
    auto* mp = std::get_if<MatchPatternOp>(&n.data);
    if (!mp) continue;
    const Needs& mine = need[n.id];
    for (auto& v : mp->graph.vertices) {
      bool live = mine.aliases.count(v.alias) > 0;
      std::set<std::string> cols;
      auto pit = mine.props.find(v.alias);
      if (pit != mine.props.end()) cols = pit->second;
      if (v.predicate) {
        std::map<std::string, std::set<std::string>> pp;
        v.predicate->collect_props(pp);
        if (pp.count(v.alias))
          cols.insert(pp[v.alias].begin(), pp[v.alias].end());
      }
      if (v.output != live || v.columns != cols) {
        v.output = live;
        v.columns = std::move(cols);
        changed = true;
      }
    }
    for (auto& e : mp->graph.edges) {
      // Output flags control the post-pattern trim only; the in-pattern
      // edge-distinct filter and path assembly read bindings before it.
      bool live = mine.aliases.count(e.alias) > 0;
      std::set<std::string> cols;
      auto pit = mine.props.find(e.alias);
      if (pit != mine.props.end()) cols = pit->second;
      if (e.predicate) {
        std::map<std::string, std::set<std::string>> pp;
        e.predicate->collect_props(pp);
        if (pp.count(e.alias))
          cols.insert(pp[e.alias].begin(), pp[e.alias].end());
      }
      if (e.output != live || e.columns != cols) {
        e.output = live;
        e.columns = std::move(cols);
        changed = true;
      }
    }
  }
  return changed;
}

// --- JoinToPattern ---

namespace {

bool merge_patterns(const PatternGraph& left, const PatternGraph& right,
                    const std::vector<std::string>& keys,
                    PatternGraph* merged) {
  std::set<std::string> key_set(keys.begin(), keys.end());
  *merged = left;
  for (const auto& rv : right.vertices) {
    if (PatternVertex* lv = merged->find_vertex(rv.alias)) {
      if (!key_set.count(rv.alias)) return false;
      lv->types = lv->types.intersect(rv.types);
      if (lv->types.empty()) return false;
      if (rv.predicate) {
        if (!lv->predicate)
          lv->predicate = rv.predicate;
        else if (!lv->predicate->equals(*rv.predicate))
          lv->predicate = Expr::logic(BoolOp::And, lv->predicate, rv.predicate);
      }
      lv->output = lv->output || rv.output;
      lv->columns.insert(rv.columns.begin(), rv.columns.end());
    } else {
      if (key_set.count(rv.alias)) return false;  // key missing on the left
      merged->vertices.push_back(rv);
    }
  }
  for (const auto& re : right.edges) {
    if (PatternEdge* le = merged->find_edge(re.alias)) {
      if (!key_set.count(re.alias)) return false;
      bool same = le->src() == re.src() && le->dst() == re.dst() &&
                  le->is_both() == re.is_both();
      bool same_both = le->is_both() && re.is_both() &&
                       ((le->from == re.from && le->to == re.to) ||
                        (le->from == re.to && le->to == re.from));
      if (!(same || same_both)) return false;
      le->types = le->types.intersect(re.types);
      if (le->types.empty()) return false;
      if (re.predicate) {
        if (!le->predicate)
          le->predicate = re.predicate;
        else if (!le->predicate->equals(*re.predicate))
          le->predicate = Expr::logic(BoolOp::And, le->predicate, re.predicate);
      }
      le->output = le->output || re.output;
      le->columns.insert(re.columns.begin(), re.columns.end());
    } else {
      if (key_set.count(re.alias)) return false;
      merged->edges.push_back(re);
    }
  }
  for (const auto& rp : right.paths) merged->paths.push_back(rp);
  return merged->connected();
}

// A projection that only renames nothing: bare tag refs aliased to
// themselves. Such projections commute with joins.
bool is_passthrough_project(const GirNode& n, const GirPlan& plan, int* input) {
  const auto* pr = std::get_if<ProjectOpL>(&n.data);
  if (!pr) return false;
  for (const auto& c : pr->columns) {
    if (c.expr->kind != Expr::Kind::TagRef || c.expr->tag != c.alias)
      return false;
  }
  (void)plan;
  *input = n.inputs[0];
  return true;
}

}  // namespace

bool join_to_pattern(GirPlan& plan) {
  if (plan.semantics != Semantics::Homomorphism) return false;
  for (size_t idx = 0; idx < plan.nodes.size(); ++idx) {
    const int join_node_id = plan.nodes[idx].id;
    const auto* join = std::get_if<JoinOpL>(&plan.nodes[idx].data);
    if (!join || join->type != JoinType::Inner) continue;
    if (join->keys.empty()) continue;
    const std::vector<std::string> keys = join->keys;

    int left_id = plan.nodes[idx].inputs[0];
    int right_id = plan.nodes[idx].inputs[1];
    std::set<std::string> passthrough, right_pass;
    int direct;
    if (is_passthrough_project(plan.node(left_id), plan, &direct)) {
      for (const auto& c :
           std::get<ProjectOpL>(plan.node(left_id).data).columns)
        passthrough.insert(c.alias);
      left_id = direct;
    }
    if (is_passthrough_project(plan.node(right_id), plan, &direct)) {
      for (const auto& c :
           std::get<ProjectOpL>(plan.node(right_id).data).columns)
        right_pass.insert(c.alias);
      right_id = direct;
    }

    const auto* left = std::get_if<MatchPatternOp>(&plan.node(left_id).data);
    const auto* right = std::get_if<MatchPatternOp>(&plan.node(right_id).data);
    if (!left || !right) continue;
    if (left->anchor || right->anchor) continue;
    if (!plan.node(left_id).inputs.empty() ||
        !plan.node(right_id).inputs.empty())
      continue;

    PatternGraph merged;
    if (!merge_patterns(left->graph, right->graph, keys, &merged)) continue;

    // Compute the combined projection before touching the node vector.
    bool needs_project = !passthrough.empty() || !right_pass.empty();
    std::set<std::string> cols = passthrough;
    cols.insert(right_pass.begin(), right_pass.end());
    if (needs_project) {
      if (passthrough.empty()) {
        auto lo = plan.output_aliases(left_id);
        cols.insert(lo.begin(), lo.end());
      }
      if (right_pass.empty()) {
        auto ro = plan.output_aliases(right_id);
        cols.insert(ro.begin(), ro.end());
      }
    }

    MatchPatternOp op;
    op.graph = std::move(merged);
    GirNode replacement;
    replacement.id = static_cast<int>(plan.nodes.size());
    replacement.data = std::move(op);
    plan.nodes.push_back(std::move(replacement));
    int result_id = plan.nodes.back().id;

    if (needs_project) {
      ProjectOpL proj;
      for (const auto& a : cols)
        proj.columns.push_back(ProjectColumn{Expr::tag_ref(a), a});
      GirNode pn;
      pn.id = static_cast<int>(plan.nodes.size());
      pn.inputs = {result_id};
      pn.data = std::move(proj);
      plan.nodes.push_back(std::move(pn));
      result_id = plan.nodes.back().id;
    }

    for (auto& m : plan.nodes)
      for (auto& in : m.inputs)
        if (in == join_node_id) in = result_id;
    if (plan.sink == join_node_id) plan.sink = result_id;
    plan = compact(plan);
    return true;
  }
  return false;
}

// --- ComSubPattern ---

namespace {

// Common subpattern anchored on alias equality: equal alias, equal
// constraint, equal predicate. Returns the largest connected component.
PatternGraph common_subpattern(const PatternGraph& a, const PatternGraph& b) {
  PatternGraph common;
  for (const auto& va : a.vertices) {
    const PatternVertex* vb = b.find_vertex(va.alias);
    if (!vb) continue;
    if (!(va.types == vb->types)) continue;
    bool pred_eq = (!va.predicate && !vb->predicate) ||
                   (va.predicate && vb->predicate &&
                    va.predicate->equals(*vb->predicate));
    if (!pred_eq) continue;
    common.vertices.push_back(va);
  }
  for (const auto& ea : a.edges) {
    const PatternEdge* eb = b.find_edge(ea.alias);
    if (!eb) continue;
    if (!(ea.types == eb->types) || ea.is_both() != eb->is_both()) continue;
    if (ea.src() != eb->src() || ea.dst() != eb->dst()) continue;
    bool pred_eq = (!ea.predicate && !eb->predicate) ||
                   (ea.predicate && eb->predicate &&
                    ea.predicate->equals(*eb->predicate));
    if (!pred_eq) continue;
    if (!common.find_vertex(ea.from) || !common.find_vertex(ea.to)) continue;
    common.edges.push_back(ea);
  }
  if (common.vertices.empty()) return {};

  // Largest connected component (ties: more edges, then lexicographic).
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& e : common.edges) {
    adj[e.from].push_back(e.to);
    adj[e.to].push_back(e.from);
  }
  std::set<std::string> seen;
  PatternGraph best;
  for (const auto& v : common.vertices) {
    if (seen.count(v.alias)) continue;
    std::set<std::string> comp;
    std::vector<std::string> stack{v.alias};
    while (!stack.empty()) {
      std::string cur = stack.back();
      stack.pop_back();
      if (!comp.insert(cur).second) continue;
      seen.insert(cur);
      for (const auto& nx : adj[cur]) stack.push_back(nx);
    }
    PatternGraph comp_graph;
    for (const auto& cv : common.vertices)
      if (comp.count(cv.alias)) comp_graph.vertices.push_back(cv);
    for (const auto& ce : common.edges)
      if (comp.count(ce.from)) comp_graph.edges.push_back(ce);
    if (comp_graph.vertices.size() > best.vertices.size() ||
        (comp_graph.vertices.size() == best.vertices.size() &&
         comp_graph.edges.size() > best.edges.size()))
      best = std::move(comp_graph);
  }
  return best;
}

// The branch pattern continuing from the common part: remaining edges plus
// all their endpoints (anchor vertices included for validity).
PatternGraph branch_remainder(const PatternGraph& full,
                              const PatternGraph& common) {
  PatternGraph out;
  std::set<std::string> common_edges;
  for (const auto& e : common.edges) common_edges.insert(e.alias);
  std::set<std::string> needed_vertices;
  for (const auto& e : full.edges) {
    if (common_edges.count(e.alias)) continue;
    out.edges.push_back(e);
    needed_vertices.insert(e.from);
    needed_vertices.insert(e.to);
  }
  for (const auto& v : full.vertices) {
    if (needed_vertices.count(v.alias) || !common.find_vertex(v.alias))
      out.vertices.push_back(v);
  }
  out.paths = full.paths;
  return out;
}

}  // namespace

bool com_sub_pattern(GirPlan& plan) {
  for (size_t idx = 0; idx < plan.nodes.size(); ++idx) {
    const int node_id = plan.nodes[idx].id;
    // Case 1: UNION over two unanchored patterns with a common subpattern.
    if (std::holds_alternative<UnionOpL>(plan.nodes[idx].data)) {
      const int left_in = plan.nodes[idx].inputs[0];
      const int right_in = plan.nodes[idx].inputs[1];
      const auto* l = std::get_if<MatchPatternOp>(&plan.node(left_in).data);
      const auto* r = std::get_if<MatchPatternOp>(&plan.node(right_in).data);
      if (!l || !r || l->anchor || r->anchor) continue;
      if (!plan.node(left_in).inputs.empty() ||
          !plan.node(right_in).inputs.empty())
        continue;
      PatternGraph common = common_subpattern(l->graph, r->graph);
      if (common.vertices.empty()) continue;
      // Both branches must keep work outside the common part.
      PatternGraph lb = branch_remainder(l->graph, common);
      PatternGraph rb = branch_remainder(r->graph, common);
      if (lb.edges.empty() || rb.edges.empty()) continue;

      for (auto& v : common.vertices) {
        v.output = true;
        v.columns.clear();
      }
      for (auto& e : common.edges) e.output = true;

      MatchPatternOp cop;
      cop.graph = common;
      GirNode cn;
      cn.id = static_cast<int>(plan.nodes.size());
      cn.data = std::move(cop);
      plan.nodes.push_back(std::move(cn));
      int common_id = plan.nodes.back().id;

      auto make_branch = [&](PatternGraph g) {
        MatchPatternOp op;
        op.graph = std::move(g);
        op.anchor = PatternAnchor{common};
        GirNode bn;
        bn.id = static_cast<int>(plan.nodes.size());
        bn.inputs = {common_id};
        bn.data = std::move(op);
        plan.nodes.push_back(std::move(bn));
        return plan.nodes.back().id;
      };
      int lb_id = make_branch(std::move(lb));
      int rb_id = make_branch(std::move(rb));
      plan.node(node_id).inputs = {lb_id, rb_id};
      plan = compact(plan);
      return true;
    }

    // Case 2: INNER join whose right side is a pattern expandable from the
    // join keys bound by the left side.
    if (const auto* join = std::get_if<JoinOpL>(&plan.nodes[idx].data)) {
      if (join->type != JoinType::Inner || join->keys.empty()) continue;
      const std::vector<std::string> keys = join->keys;
      const int left_in = plan.nodes[idx].inputs[0];
      const int right_in = plan.nodes[idx].inputs[1];
      const auto* r = std::get_if<MatchPatternOp>(&plan.node(right_in).data);
      if (!r || r->anchor || !plan.node(right_in).inputs.empty()) continue;
      auto left_out = plan.output_aliases(left_in);
      bool keys_are_vertices = true;
      for (const auto& k : keys) {
        if (!r->graph.find_vertex(k) || !left_out.count(k))
          keys_are_vertices = false;
      }
      if (!keys_are_vertices) continue;
      // All shared aliases must be exactly the keys, and the pattern
      // continues from them.
      std::set<std::string> shared;
      for (const auto& a : left_out)
        if (r->graph.has_alias(a)) shared.insert(a);
      std::set<std::string> key_set(keys.begin(), keys.end());
      if (shared != key_set) continue;

      PatternGraph context;
      for (const auto& k : keys)
        context.vertices.push_back(*r->graph.find_vertex(k));
      MatchPatternOp op;
      op.graph = r->graph;
      op.anchor = PatternAnchor{std::move(context)};
      GirNode an;
      an.id = static_cast<int>(plan.nodes.size());
      an.inputs = {left_in};
      an.data = std::move(op);
      plan.nodes.push_back(std::move(an));
      int new_id = plan.nodes.back().id;

      for (auto& m : plan.nodes)
        for (auto& in : m.inputs)
          if (in == node_id) in = new_id;
      if (plan.sink == node_id) plan.sink = new_id;
      plan = compact(plan);
      return true;
    }
  }
  return false;
}

// --- strategy application ---

namespace {

// Decreasing measure for fixpoint termination: pushable predicates
// weighted by the pattern/join boundaries below them dominate, then the
// count of patterns still eligible for merging, then plan size and
// untrimmed outputs. No rule firing may increase it.
size_t rewrite_measure(const GirPlan& plan) {
  size_t boundaries_total = 0;
  auto boundaries_below = [&](int id) {
    size_t count = 0;
    std::set<int> seen;
    std::vector<int> stack{id};
    while (!stack.empty()) {
      int cur = stack.back();
      stack.pop_back();
      if (!seen.insert(cur).second) continue;
      const GirNode& n = plan.node(cur);
      if (std::holds_alternative<MatchPatternOp>(n.data) ||
          std::holds_alternative<JoinOpL>(n.data))
        ++count;
      for (int in : n.inputs) stack.push_back(in);
    }
    return count;
  };
  size_t unanchored = 0;
  size_t flags = 0;
  for (const auto& n : plan.nodes) {
    if (const auto* s = std::get_if<SelectOpL>(&n.data)) {
      boundaries_total += Expr::split_and(s->condition).size() *
                          boundaries_below(n.inputs[0]);
    } else if (const auto* mp = std::get_if<MatchPatternOp>(&n.data)) {
      if (!mp->anchor) ++unanchored;
      for (const auto& v : mp->graph.vertices) flags += v.output ? 1 : 0;
      for (const auto& e : mp->graph.edges) flags += e.output ? 1 : 0;
    }
  }
  return 1000 * boundaries_total + 100 * unanchored + flags +
         plan.nodes.size();
}

}  // namespace

StrategyDag default_logical_dag(const std::set<std::string>& enabled) {
  auto want = [&](const char* name) { return enabled.count(name) > 0; };
  StrategyDag dag;
  auto add = [&](const char* name, std::set<Semantics> gate,
                 bool (*fn)(GirPlan&)) {
    if (!want(name)) return;
    dag.strategies.push_back(
        Strategy{name, {Rule{name, std::move(gate), fn}}});
  };
  add("filter_into_join", {}, filter_into_join);
  add("filter_into_pattern", {}, filter_into_pattern);
  add("field_trim", {}, field_trim);
  add("join_to_pattern", {Semantics::Homomorphism}, join_to_pattern);
  add("com_sub_pattern", {}, com_sub_pattern);
  // Pattern merges invalidate earlier liveness, so trim once more at the
  // tail of the DAG.
  add("field_trim", {}, field_trim);
  return dag;
}

ApplyResult apply(const GirPlan& plan, const StrategyDag& dag) {
  ApplyResult result;
  result.plan = plan;
  for (const auto& strategy : dag.strategies) {
    // Fixpoint per strategy, bounded by a conservative iteration cap.
    size_t cap = 64 + 8 * result.plan.nodes.size() +
                 8 * [&] {
                   size_t conjuncts = 0;
                   for (const auto& n : result.plan.nodes)
                     if (const auto* s = std::get_if<SelectOpL>(&n.data))
                       conjuncts += Expr::split_and(s->condition).size();
                   return conjuncts;
                 }();
    bool changed = true;
    size_t iterations = 0;
    while (changed) {
      if (++iterations > cap)
        throw PlanError("strategy '" + strategy.name +
                        "' failed to reach a fixpoint");
      changed = false;
      for (const auto& rule : strategy.rules) {
        if (!rule.semantics_gate.empty() &&
            !rule.semantics_gate.count(result.plan.semantics))
          continue;
        size_t before = rewrite_measure(result.plan);
        if (rule.apply(result.plan)) {
          changed = true;
          result.trace.push_back(rule.name);
          auto diags = validate(result.plan);
          if (!diags.empty())
            throw PlanError("rule '" + rule.name +
                            "' produced an invalid plan: " +
                            diags[0].message);
          if (rewrite_measure(result.plan) > before)
            throw PlanError("rule '" + rule.name +
                            "' increased the rewrite measure");
        }
      }
    }
  }
  return result;
}

}  // namespace gopt
