#include <functional>
#include <map>
#include <sstream>

#include "gopt/gir.hpp"
#include "gopt/parser.hpp"
#include "json.hpp"

namespace gopt {

namespace {

using nlohmann::json;

json constraint_to_json(const TypeConstraint& c) {
  if (c.is_all()) return nullptr;
  if (c.is_basic()) return *c.names().begin();
  return json(c.names());
}

TypeConstraint constraint_from_json(const json& j) {
  if (j.is_null()) return TypeConstraint::all();
  if (j.is_string()) return TypeConstraint::basic(j.get<std::string>());
  std::set<std::string> names;
  for (const auto& n : j) names.insert(n.get<std::string>());
  return TypeConstraint::of(std::move(names));
}

json expr_to_json(const ExprPtr& e) {
  if (!e) return nullptr;
  return e->to_string();
}

ExprPtr expr_from_json(const json& j) {
  if (j.is_null()) return nullptr;
  return parse_expr_text(j.get<std::string>());
}

json pattern_to_json(const PatternGraph& g) {
  json jv = json::array();
  for (const auto& v : g.vertices) {
    json o{{"alias", v.alias}, {"types", constraint_to_json(v.types)}};
    if (v.predicate) o["predicate"] = expr_to_json(v.predicate);
    if (!v.output) o["output"] = false;
    if (!v.columns.empty()) o["columns"] = json(v.columns);
    jv.push_back(o);
  }
  json je = json::array();
  for (const auto& e : g.edges) {
    json o{{"alias", e.alias}, {"from", e.from},   {"to", e.to},
           {"dir", to_string(e.dir)}, {"types", constraint_to_json(e.types)}};
    if (e.predicate) o["predicate"] = expr_to_json(e.predicate);
    if (!e.output) o["output"] = false;
    if (!e.columns.empty()) o["columns"] = json(e.columns);
    je.push_back(o);
  }
  json jp = json::array();
  for (const auto& p : g.paths) {
    jp.push_back(json{{"alias", p.alias},
                      {"start", p.start},
                      {"end", p.end},
                      {"edges", p.edge_aliases},
                      {"inner_vertices", p.inner_vertices},
                      {"opt", to_string(p.opt)}});
  }
  json out{{"vertices", jv}, {"edges", je}};
  if (!jp.empty()) out["paths"] = jp;
  return out;
}

EdgeDir dir_from_string(const std::string& s) {
  if (s == "out") return EdgeDir::Out;
  if (s == "in") return EdgeDir::In;
  if (s == "both") return EdgeDir::Both;
  throw PlanError("unknown edge direction: " + s);
}

PathOpt path_opt_from_string(const std::string& s) {
  if (s == "arbitrary") return PathOpt::Arbitrary;
  if (s == "simple") return PathOpt::Simple;
  if (s == "trail") return PathOpt::Trail;
  throw PlanError("unknown path option: " + s);
}

PatternGraph pattern_from_json(const json& j) {
  PatternGraph g;
  for (const auto& jv : j.value("vertices", json::array())) {
    PatternVertex v;
    v.alias = jv.at("alias").get<std::string>();
    v.types = constraint_from_json(jv.value("types", json()));
    v.predicate = expr_from_json(jv.value("predicate", json()));
    v.output = jv.value("output", true);
    for (const auto& c : jv.value("columns", json::array()))
      v.columns.insert(c.get<std::string>());
    g.vertices.push_back(std::move(v));
  }
  for (const auto& je : j.value("edges", json::array())) {
    PatternEdge e;
    e.alias = je.at("alias").get<std::string>();
    e.from = je.at("from").get<std::string>();
    e.to = je.at("to").get<std::string>();
    e.dir = dir_from_string(je.at("dir").get<std::string>());
    e.types = constraint_from_json(je.value("types", json()));
    e.predicate = expr_from_json(je.value("predicate", json()));
    e.output = je.value("output", true);
    for (const auto& c : je.value("columns", json::array()))
      e.columns.insert(c.get<std::string>());
    g.edges.push_back(std::move(e));
  }
  for (const auto& jp : j.value("paths", json::array())) {
    PathSpec p;
    p.alias = jp.at("alias").get<std::string>();
    p.start = jp.at("start").get<std::string>();
    p.end = jp.at("end").get<std::string>();
    for (const auto& a : jp.at("edges")) p.edge_aliases.push_back(a);
    for (const auto& a : jp.value("inner_vertices", json::array()))
      p.inner_vertices.push_back(a);
    p.opt = path_opt_from_string(jp.at("opt").get<std::string>());
    g.paths.push_back(std::move(p));
  }
  return g;
}

AggFn agg_from_string(const std::string& s) {
  if (s == "count") return AggFn::Count;
  if (s == "count_distinct") return AggFn::CountDistinct;
  if (s == "sum") return AggFn::Sum;
  if (s == "avg") return AggFn::Avg;
  if (s == "min") return AggFn::Min;
  if (s == "max") return AggFn::Max;
  if (s == "first") return AggFn::First;
  throw PlanError("unknown aggregate: " + s);
}

JoinType join_from_string(const std::string& s) {
  if (s == "inner") return JoinType::Inner;
  if (s == "left_outer") return JoinType::LeftOuter;
  if (s == "right_outer") return JoinType::RightOuter;
  if (s == "full_outer") return JoinType::FullOuter;
  if (s == "semi") return JoinType::Semi;
  if (s == "anti") return JoinType::Anti;
  throw PlanError("unknown join type: " + s);
}

json params_to_json(const GirNode& n) {
  struct Visitor {
    json operator()(const MatchPatternOp& op) {
      json j{{"pattern", pattern_to_json(op.graph)}};
      if (op.anchor) j["anchor"] = pattern_to_json(op.anchor->context);
      return j;
    }
    json operator()(const ProjectOpL& op) {
      json cols = json::array();
      for (const auto& c : op.columns)
        cols.push_back(json{{"expr", expr_to_json(c.expr)},
                            {"alias", c.alias}});
      return json{{"columns", cols}};
    }
    json operator()(const SelectOpL& op) {
      return json{{"condition", expr_to_json(op.condition)}};
    }
    json operator()(const OrderOpL& op) {
      json keys = json::array();
      for (const auto& k : op.keys)
        keys.push_back(json{{"expr", expr_to_json(k.expr)},
                            {"ascending", k.ascending}});
      return json{{"keys", keys}};
    }
    json operator()(const LimitOpL& op) { return json{{"count", op.count}}; }
    json operator()(const GroupOpL& op) {
      json keys = json::array();
      for (const auto& k : op.keys)
        keys.push_back(json{{"expr", expr_to_json(k.expr)},
                            {"alias", k.alias}});
      json aggs = json::array();
      for (const auto& a : op.aggs)
        aggs.push_back(json{{"fn", to_string(a.fn)},
                            {"expr", expr_to_json(a.arg)},
                            {"alias", a.alias}});
      return json{{"keys", keys}, {"aggregations", aggs}};
    }
    json operator()(const UnfoldOpL& op) {
      return json{{"tag", op.tag}, {"alias", op.alias}};
    }
    json operator()(const JoinOpL& op) {
      return json{{"keys", op.keys}, {"join_type", to_string(op.type)}};
    }
    json operator()(const UnionOpL&) { return json::object(); }
  };
  return std::visit(Visitor{}, n.data);
}

GirOpData params_from_json(const std::string& kind, const json& p) {
  if (kind == "match_pattern") {
    MatchPatternOp op;
    op.graph = pattern_from_json(p.at("pattern"));
    if (p.contains("anchor"))
      op.anchor = PatternAnchor{pattern_from_json(p.at("anchor"))};
    return op;
  }
  if (kind == "project") {
    ProjectOpL op;
    for (const auto& c : p.at("columns"))
      op.columns.push_back(ProjectColumn{expr_from_json(c.at("expr")),
                                         c.at("alias").get<std::string>()});
    return op;
  }
  if (kind == "select")
    return SelectOpL{expr_from_json(p.at("condition"))};
  if (kind == "order") {
    OrderOpL op;
    for (const auto& k : p.at("keys"))
      op.keys.push_back(OrderKey{expr_from_json(k.at("expr")),
                                 k.at("ascending").get<bool>()});
    return op;
  }
  if (kind == "limit") return LimitOpL{p.at("count").get<int64_t>()};
  if (kind == "group") {
    GroupOpL op;
    for (const auto& k : p.at("keys"))
      op.keys.push_back(ProjectColumn{expr_from_json(k.at("expr")),
                                      k.at("alias").get<std::string>()});
    for (const auto& a : p.at("aggregations"))
      op.aggs.push_back(AggCall{agg_from_string(a.at("fn").get<std::string>()),
                                expr_from_json(a.at("expr")),
                                a.at("alias").get<std::string>()});
    return op;
  }
  if (kind == "unfold")
    return UnfoldOpL{p.at("tag").get<std::string>(),
                     p.at("alias").get<std::string>()};
  if (kind == "join") {
    JoinOpL op;
    for (const auto& k : p.at("keys")) op.keys.push_back(k);
    op.type = join_from_string(p.at("join_type").get<std::string>());
    return op;
  }
  if (kind == "union") return UnionOpL{};
  throw PlanError("unknown operator kind: " + kind);
}

}  // namespace

std::string plan_to_json(const GirPlan& plan) {
  json ops = json::array();
  for (const auto& n : plan.nodes) {
    ops.push_back(json{{"id", n.id},
                       {"kind", n.kind_name()},
                       {"params", params_to_json(n)},
                       {"inputs", n.inputs}});
  }
  json j{{"semantics", to_string(plan.semantics)},
         {"ops", ops},
         {"sink", plan.sink}};
  return j.dump(2);
}

GirPlan plan_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw PlanError(std::string("plan JSON parse error: ") + e.what());
  }
  GirPlan plan;
  std::string sem = j.at("semantics").get<std::string>();
  if (sem == "homomorphism")
    plan.semantics = Semantics::Homomorphism;
  else if (sem == "edge_distinct")
    plan.semantics = Semantics::EdgeDistinct;
  else
    throw PlanError("unknown semantics: " + sem);
  // Ops may be listed in any order; normalize to id order.
  std::map<int, GirNode> by_id;
  for (const auto& jop : j.at("ops")) {
    GirNode n;
    n.id = jop.at("id").get<int>();
    for (const auto& in : jop.at("inputs")) n.inputs.push_back(in.get<int>());
    n.data = params_from_json(jop.at("kind").get<std::string>(),
                              jop.at("params"));
    by_id[n.id] = std::move(n);
  }
  std::map<int, int> remap;
  for (auto& [id, n] : by_id) {
    remap[id] = static_cast<int>(plan.nodes.size());
    n.id = remap[id];
    plan.nodes.push_back(std::move(n));
  }
  for (auto& n : plan.nodes)
    for (auto& in : n.inputs) in = remap.at(in);
  plan.sink = remap.at(j.at("sink").get<int>());
  auto diags = validate(plan);
  if (!diags.empty())
    throw PlanError("invalid plan JSON: " + diags[0].message);
  return plan;
}

bool plans_equal(const GirPlan& a, const GirPlan& b) {
  if (a.semantics != b.semantics) return false;
  auto oa = a.topo_order();
  auto ob = b.topo_order();
  if (oa.size() != ob.size()) return false;
  std::map<int, int> ma, mb;
  for (size_t i = 0; i < oa.size(); ++i) {
    ma[oa[i]] = static_cast<int>(i);
    mb[ob[i]] = static_cast<int>(i);
  }
  auto normalize = [](const GirPlan& p, const std::vector<int>& order,
                      std::map<int, int>& remap) {
    json ops = json::array();
    for (int id : order) {
      GirNode n = p.node(id);
      json inputs = json::array();
      for (int in : n.inputs) inputs.push_back(remap.at(in));
      ops.push_back(json{{"kind", n.kind_name()},
                         {"params", params_to_json(n)},
                         {"inputs", inputs}});
    }
    return ops;
  };
  return normalize(a, oa, ma) == normalize(b, ob, mb);
}

namespace {

std::string types_text(const TypeConstraint& c) {
  if (c.is_all()) return "";
  std::string s = ":";
  bool first = true;
  for (const auto& n : c.names()) {
    if (!first) s += "|";
    first = false;
    s += n;
  }
  return s;
}

// Element predicates print as map props; predicates that aren't pure
// `alias.prop = literal` conjunctions have no textual form.
std::string props_text(const std::string& alias, const ExprPtr& pred) {
  if (!pred) return "";
  std::string s = " {";
  bool first = true;
  for (const auto& c : Expr::split_and(pred)) {
    if (c->kind != Expr::Kind::Cmp || c->cmp_op != CmpOp::Eq ||
        c->args[0]->kind != Expr::Kind::Property ||
        c->args[0]->tag != alias ||
        c->args[1]->kind != Expr::Kind::Literal)
      throw PlanError("predicate on " + alias + " has no textual form");
    if (!first) s += ", ";
    first = false;
    s += c->args[0]->prop + ": " + c->args[1]->literal.to_string();
  }
  return s + "}";
}

// Pattern section back to MATCH text. Only grammar-expressible patterns
// (no anchors, no trim metadata that the grammar cannot state).
std::string pattern_to_match_text(const PatternGraph& g) {
  std::set<std::string> path_edges;
  for (const auto& p : g.paths)
    for (const auto& ea : p.edge_aliases) path_edges.insert(ea);

  // Types and props are printed on the first mention only; a repeated
  // mention would otherwise AND the predicate with itself on re-parse.
  std::set<std::string> mentioned;
  auto node_text = [&](const std::string& alias) {
    const PatternVertex* v = g.find_vertex(alias);
    if (!mentioned.insert(alias).second) return "(" + alias + ")";
    return "(" + alias + types_text(v->types) +
           props_text(alias, v->predicate) + ")";
  };
  auto edge_text = [&](const std::string& from, const std::string& body,
                       EdgeDir dir, const std::string& to) {
    switch (dir) {
      case EdgeDir::Out:
        return from + "-[" + body + "]->" + to;
      case EdgeDir::In:
        return from + "<-[" + body + "]-" + to;
      case EdgeDir::Both:
        return from + "-[" + body + "]-" + to;
    }
    return std::string();
  };

  std::vector<std::string> parts;
  for (const auto& p : g.paths) {
    const PatternEdge* e0 = g.find_edge(p.edge_aliases[0]);
    if (p.opt != PathOpt::Arbitrary)
      throw PlanError("path option has no textual form");
    std::string body = p.alias + types_text(e0->types) + "*" +
                       std::to_string(p.edge_aliases.size());
    parts.push_back(edge_text(node_text(p.start), body, e0->dir,
                              node_text(p.end)));
  }
  for (const auto& e : g.edges) {
    if (path_edges.count(e.alias)) continue;
    std::string body =
        e.alias + types_text(e.types) + props_text(e.alias, e.predicate);
    parts.push_back(edge_text(node_text(e.from), body, e.dir,
                              node_text(e.to)));
  }
  for (const auto& v : g.vertices) {
    if (g.incident_edges(v.alias).empty()) parts.push_back(node_text(v.alias));
  }
  std::ostringstream os;
  for (size_t i = 0; i < parts.size(); ++i)
    os << (i ? ", " : "") << parts[i];
  return os.str();
}

}  // namespace

std::string print_query(const GirPlan& plan) {
  // Expected shape: pattern nodes joined pairwise, then optional select,
  // then project or group, then optional order/limit.
  std::ostringstream os;
  int id = plan.sink;
  std::vector<const GirNode*> tail;
  while (true) {
    const GirNode& n = plan.node(id);
    if (std::holds_alternative<MatchPatternOp>(n.data) ||
        std::holds_alternative<JoinOpL>(n.data))
      break;
    tail.push_back(&n);
    if (n.inputs.size() != 1)
      throw PlanError("plan has no textual form (non-linear tail)");
    id = n.inputs[0];
  }
  // Collect patterns under left-deep inner/left-outer joins.
  std::vector<std::pair<bool, const MatchPatternOp*>> matches;
  std::function<void(int, bool)> collect = [&](int nid, bool optional) {
    const GirNode& n = plan.node(nid);
    if (const auto* mp = std::get_if<MatchPatternOp>(&n.data)) {
      if (mp->anchor) throw PlanError("anchored pattern has no textual form");
      matches.emplace_back(optional, mp);
      return;
    }
    if (const auto* jn = std::get_if<JoinOpL>(&n.data)) {
      if (jn->type != JoinType::Inner && jn->type != JoinType::LeftOuter)
        throw PlanError("join type has no textual form");
      collect(n.inputs[0], optional);
      collect(n.inputs[1], jn->type == JoinType::LeftOuter);
      return;
    }
    throw PlanError("plan has no textual form (unexpected operator)");
  };
  collect(id, false);

  for (const auto& [optional, mp] : matches) {
    if (optional) os << "OPTIONAL ";
    os << "MATCH " << pattern_to_match_text(mp->graph) << "\n";
  }

  // Tail is in sink-to-pattern order; emit in execution order.
  std::string where, ret, order_limit;
  for (auto it = tail.rbegin(); it != tail.rend(); ++it) {
    const GirNode& n = **it;
    if (const auto* s = std::get_if<SelectOpL>(&n.data)) {
      if (!where.empty() || !ret.empty())
        throw PlanError("plan has no textual form (late select)");
      where = "WHERE " + s->condition->to_string() + "\n";
    } else if (const auto* p = std::get_if<ProjectOpL>(&n.data)) {
      if (!ret.empty()) throw PlanError("plan has two projections");
      ret = "RETURN ";
      bool first = true;
      for (const auto& c : p->columns) {
        if (!first) ret += ", ";
        first = false;
        ret += c.expr->to_string();
        if (c.alias != c.expr->to_string()) ret += " AS " + c.alias;
      }
    } else if (const auto* g = std::get_if<GroupOpL>(&n.data)) {
      if (!ret.empty()) throw PlanError("plan has two projections");
      ret = "RETURN ";
      bool first = true;
      for (const auto& k : g->keys) {
        if (!first) ret += ", ";
        first = false;
        ret += k.expr->to_string();
        if (k.alias != k.expr->to_string()) ret += " AS " + k.alias;
      }
      for (const auto& a : g->aggs) {
        if (!first) ret += ", ";
        first = false;
        if (a.fn == AggFn::First) throw PlanError("first() has no textual form");
        std::string display =
            a.fn == AggFn::CountDistinct
                ? "count(distinct " + a.arg->to_string() + ")"
                : std::string(to_string(a.fn)) + "(" + a.arg->to_string() + ")";
        ret += display;
        if (a.alias != display) ret += " AS " + a.alias;
      }
    } else if (const auto* o = std::get_if<OrderOpL>(&n.data)) {
      order_limit += " ORDER BY ";
      bool first = true;
      for (const auto& k : o->keys) {
        if (!first) order_limit += ", ";
        first = false;
        order_limit += k.expr->to_string() + (k.ascending ? " ASC" : " DESC");
      }
    } else if (const auto* l = std::get_if<LimitOpL>(&n.data)) {
      order_limit += " LIMIT " + std::to_string(l->count);
    } else {
      throw PlanError("plan has no textual form (unsupported tail op)");
    }
  }
  if (ret.empty()) throw PlanError("plan has no RETURN-shaped projection");
  os << where << ret << order_limit;
  return os.str();
}

}  // namespace gopt
