#include "gopt/executor.hpp"

#include <algorithm>
#include <functional>

#include "json.hpp"

namespace gopt {

bool value_equal(const Value& a, const Value& b) {
  if (a.index() != b.index()) return false;
  if (const auto* pa = std::get_if<PropertyValue>(&a)) {
    const auto* pb = std::get_if<PropertyValue>(&b);
    return pa->kind() == pb->kind() && *pa == *pb;
  }
  return a == b;
}

bool value_less(const Value& a, const Value& b) {
  if (a.index() != b.index()) return a.index() < b.index();
  if (const auto* pa = std::get_if<PropertyValue>(&a)) {
    const auto* pb = std::get_if<PropertyValue>(&b);
    if (pa->kind() != pb->kind()) return pa->kind() < pb->kind();
    return pa->compare(*pb) < 0;
  }
  if (const auto* va = std::get_if<VertexRef>(&a))
    return va->id < std::get<VertexRef>(b).id;
  if (const auto* ea = std::get_if<EdgeRef>(&a))
    return ea->id < std::get<EdgeRef>(b).id;
  return std::get<PathRef>(a).elements < std::get<PathRef>(b).elements;
}

std::string value_to_string(const Value& v) {
  struct Visitor {
    std::string operator()(const VertexRef& r) {
      return "v#" + std::to_string(r.id);
    }
    std::string operator()(const EdgeRef& r) {
      return "e#" + std::to_string(r.id);
    }
    std::string operator()(const PathRef& r) {
      std::string s = "p[";
      for (size_t i = 0; i < r.elements.size(); ++i)
        s += (i ? "," : "") + std::to_string(r.elements[i]);
      return s + "]";
    }
    std::string operator()(const PropertyValue& p) { return p.to_string(); }
  };
  return std::visit(Visitor{}, v);
}

bool record_less(const Record& a, const Record& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  for (; ia != a.end() && ib != b.end(); ++ia, ++ib) {
    if (ia->first != ib->first) return ia->first < ib->first;
    if (value_less(ia->second, ib->second)) return true;
    if (value_less(ib->second, ia->second)) return false;
  }
  return a.size() < b.size();
}

bool results_equal_multiset(ResultSet a, ResultSet b) {
  if (a.size() != b.size()) return false;
  std::sort(a.begin(), a.end(), record_less);
  std::sort(b.begin(), b.end(), record_less);
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size()) return false;
    auto ia = a[i].begin();
    auto ib = b[i].begin();
    for (; ia != a[i].end(); ++ia, ++ib) {
      if (ia->first != ib->first || !value_equal(ia->second, ib->second))
        return false;
    }
  }
  return true;
}

ResultSet project_results(const ResultSet& in,
                          const std::set<std::string>& aliases) {
  ResultSet out;
  out.reserve(in.size());
  for (const auto& rec : in) {
    Record r;
    for (const auto& a : aliases) {
      auto it = rec.find(a);
      if (it == rec.end())
        throw ExecError("projection alias '" + a + "' missing from record");
      r.emplace(a, it->second);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string ExecStats::to_json() const {
  nlohmann::json ops = nlohmann::json::array();
  for (const auto& s : per_op)
    ops.push_back(nlohmann::json{{"id", s.op_id},
                                 {"kind", s.kind},
                                 {"rows", s.output_rows}});
  return nlohmann::json{{"per_op", ops},
                        {"total_intermediate", total_intermediate},
                        {"props_fetched", props_fetched}}
      .dump(2);
}

// --- expression evaluation ---

namespace {

const PropertyValue* lookup_prop(const Value& v, const std::string& prop,
                                 const DataGraph& graph) {
  if (const auto* vr = std::get_if<VertexRef>(&v))
    return graph.vertex_prop(vr->id, prop);
  if (const auto* er = std::get_if<EdgeRef>(&v)) {
    if (prop == "length") return nullptr;
    return graph.edge_prop(er->id, prop);
  }
  if (const auto* pr = std::get_if<PathRef>(&v)) {
    (void)pr;
    return nullptr;
  }
  return nullptr;
}

struct EvalContext {
  const Record& rec;
  const DataGraph& graph;
  ExecStats* stats = nullptr;
  const std::map<std::string, std::set<std::string>>* prefetched = nullptr;
  bool charge_lazy = false;
};

PropertyValue eval(const Expr& e, const EvalContext& ctx);

PropertyValue eval_property(const Expr& e, const EvalContext& ctx) {
  auto it = ctx.rec.find(e.tag);
  if (it == ctx.rec.end())
    throw EvalError("unknown tag '" + e.tag + "' in expression");
  const Value& v = it->second;
  if (const auto* pr = std::get_if<PathRef>(&v)) {
    if (e.prop == "length")
      return PropertyValue(static_cast<int64_t>(pr->elements.size() / 2));
    throw EvalError("paths expose only the 'length' property");
  }
  if (std::holds_alternative<PropertyValue>(v))
    throw EvalError("scalar value has no property '" + e.prop + "'");
  if (ctx.charge_lazy && ctx.stats) {
    bool prefetched =
        ctx.prefetched && ctx.prefetched->count(e.tag) &&
        ctx.prefetched->at(e.tag).count(e.prop);
    if (!prefetched) ++ctx.stats->props_fetched;
  }
  const PropertyValue* p = lookup_prop(v, e.prop, ctx.graph);
  if (!p)
    throw EvalError("element bound to '" + e.tag + "' has no property '" +
                    e.prop + "'");
  return *p;
}

PropertyValue eval(const Expr& e, const EvalContext& ctx) {
  switch (e.kind) {
    case Expr::Kind::Literal:
      return e.literal;
    case Expr::Kind::Property:
      return eval_property(e, ctx);
    case Expr::Kind::TagRef: {
      auto it = ctx.rec.find(e.tag);
      if (it == ctx.rec.end())
        throw EvalError("unknown tag '" + e.tag + "' in expression");
      if (const auto* p = std::get_if<PropertyValue>(&it->second)) return *p;
      throw EvalError("tag '" + e.tag +
                      "' is a graph element; reference a property");
    }
    case Expr::Kind::Cmp: {
      PropertyValue lhs = eval(*e.args[0], ctx);
      PropertyValue rhs = eval(*e.args[1], ctx);
      if (e.cmp_op == CmpOp::Eq || e.cmp_op == CmpOp::Ne) {
        if (lhs.kind() != rhs.kind())
          throw EvalError("cannot compare values of different kinds");
        bool eq = lhs == rhs;
        return PropertyValue(e.cmp_op == CmpOp::Eq ? eq : !eq);
      }
      int c = lhs.compare(rhs);
      bool r = e.cmp_op == CmpOp::Lt   ? c < 0
               : e.cmp_op == CmpOp::Le ? c <= 0
               : e.cmp_op == CmpOp::Gt ? c > 0
                                       : c >= 0;
      return PropertyValue(r);
    }
    case Expr::Kind::Bool: {
      PropertyValue lhs = eval(*e.args[0], ctx);
      if (e.bool_op == BoolOp::And) {
        if (!lhs.as_bool()) return PropertyValue(false);
        return PropertyValue(eval(*e.args[1], ctx).as_bool());
      }
      if (lhs.as_bool()) return PropertyValue(true);
      return PropertyValue(eval(*e.args[1], ctx).as_bool());
    }
    case Expr::Kind::Not:
      return PropertyValue(!eval(*e.args[0], ctx).as_bool());
    case Expr::Kind::In: {
      PropertyValue needle = eval(*e.args[0], ctx);
      PropertyValue hay = eval(*e.args[1], ctx);
      for (const auto& item : hay.as_list()) {
        if (item.kind() == needle.kind() && item == needle)
          return PropertyValue(true);
      }
      return PropertyValue(false);
    }
    case Expr::Kind::Arith: {
      PropertyValue lhs = eval(*e.args[0], ctx);
      PropertyValue rhs = eval(*e.args[1], ctx);
      if (lhs.kind() == PropertyValue::Kind::Int &&
          rhs.kind() == PropertyValue::Kind::Int) {
        int64_t a = lhs.as_int(), b = rhs.as_int();
        switch (e.arith_op) {
          case ArithOp::Add: return PropertyValue(a + b);
          case ArithOp::Sub: return PropertyValue(a - b);
          case ArithOp::Mul: return PropertyValue(a * b);
          case ArithOp::Div:
            if (b == 0) throw EvalError("division by zero");
            return PropertyValue(a / b);
        }
      }
      if (lhs.kind() == PropertyValue::Kind::Float &&
          rhs.kind() == PropertyValue::Kind::Float) {
        double a = lhs.as_float(), b = rhs.as_float();
        switch (e.arith_op) {
          case ArithOp::Add: return PropertyValue(a + b);
          case ArithOp::Sub: return PropertyValue(a - b);
          case ArithOp::Mul: return PropertyValue(a * b);
          case ArithOp::Div:
            if (b == 0) throw EvalError("division by zero");
            return PropertyValue(a / b);
        }
      }
      if (lhs.kind() == PropertyValue::Kind::String &&
          rhs.kind() == PropertyValue::Kind::String &&
          e.arith_op == ArithOp::Add)
        return PropertyValue(lhs.as_string() + rhs.as_string());
      throw EvalError("arithmetic requires two ints or two floats");
    }
    case Expr::Kind::Neg: {
      PropertyValue v = eval(*e.args[0], ctx);
      if (v.kind() == PropertyValue::Kind::Int)
        return PropertyValue(-v.as_int());
      if (v.kind() == PropertyValue::Kind::Float)
        return PropertyValue(-v.as_float());
      throw EvalError("negation requires a numeric value");
    }
  }
  throw EvalError("unreachable expression kind");
}

bool eval_predicate(const ExprPtr& pred, const EvalContext& ctx) {
  if (!pred) return true;
  return eval(*pred, ctx).as_bool();
}

bool type_matches(const TypeConstraint& c, const std::string& type) {
  return c.contains(type);
}

}  // namespace

PropertyValue eval_expr(const Expr& e, const Record& rec,
                        const DataGraph& graph) {
  EvalContext ctx{rec, graph, nullptr, nullptr, false};
  return eval(e, ctx);
}

// --- physical execution ---

namespace {

class Engine {
 public:
  Engine(const PhysPlan& plan, const DataGraph& graph,
         const ExecOptions& options)
      : plan_(plan), graph_(graph), options_(options) {}

  std::pair<ResultSet, ExecStats> run() {
    auto order = plan_.topo_order();
    for (int id : order) results_[id] = eval_node(id);
    ExecStats stats = std::move(stats_);
    for (const auto& s : stats.per_op)
      if (s.op_id != plan_.sink) stats.total_intermediate += s.output_rows;
    return {std::move(results_[plan_.sink]), std::move(stats)};
  }

 private:
  EvalContext ctx_for(const Record& rec) const {
    return EvalContext{rec, graph_, &stats_, &prefetched_,
                       options_.charge_lazy_reads};
  }

  void charge_prefetch(const std::string& alias,
                       const std::set<std::string>& props, int64_t rows) {
    if (props.empty()) return;
    prefetched_[alias].insert(props.begin(), props.end());
    stats_.props_fetched += static_cast<int64_t>(props.size()) * rows;
  }

  ResultSet eval_node(int id) {
    const PhysNode& n = plan_.node(id);
    ResultSet out = std::visit(
        [&](const auto& op) { return this->exec(op, n); }, n.data);
    stats_.per_op.push_back(
        OpStats{id, n.kind_name(), static_cast<int64_t>(out.size())});
    return out;
  }

  const ResultSet& input(const PhysNode& n, size_t i = 0) {
    return results_.at(n.inputs.at(i));
  }

  // Edges incident to vertex `vid` per direction, as (edge id, other end).
  template <typename Fn>
  void for_each_edge(int64_t vid, EdgeDir dir, Fn&& fn) {
    const Vertex& v = graph_.vertex(vid);
    if (dir == EdgeDir::Out || dir == EdgeDir::Both)
      for (int64_t eid : v.out_edges) fn(eid, graph_.edge(eid).dst, true);
    if (dir == EdgeDir::In || dir == EdgeDir::Both)
      for (int64_t eid : v.in_edges) fn(eid, graph_.edge(eid).src, false);
  }

  ResultSet exec(const ScanOp& op, const PhysNode& n) {
    (void)n;
    ResultSet out;
    for (const auto& [vid, v] : graph_.vertices()) {
      if (!type_matches(op.types, v.type)) continue;
      Record rec{{op.alias, VertexRef{vid}}};
      if (!eval_predicate(op.predicate, ctx_for(rec))) continue;
      out.push_back(std::move(rec));
    }
    charge_prefetch(op.alias, op.prefetch, static_cast<int64_t>(out.size()));
    return out;
  }

  ResultSet exec(const IndexScanOp& op, const PhysNode& n) {
    (void)n;
    // Simulated pk index: one pass filtered on the key property.
    ResultSet out;
    for (const auto& [vid, v] : graph_.vertices()) {
      if (!type_matches(op.types, v.type)) continue;
      auto it = v.props.find(op.pk_prop);
      if (it == v.props.end() || it->second.kind() != op.key.kind() ||
          !(it->second == op.key))
        continue;
      Record rec{{op.alias, VertexRef{vid}}};
      if (!eval_predicate(op.residual_predicate, ctx_for(rec))) continue;
      out.push_back(std::move(rec));
    }
    charge_prefetch(op.alias, op.prefetch, static_cast<int64_t>(out.size()));
    return out;
  }

  ResultSet exec(const ExpandOp& op, const PhysNode& n) {
    ResultSet out;
    for (const Record& rec : input(n)) {
      const auto* base = std::get_if<VertexRef>(&rec.at(op.base_tag));
      if (!base) throw ExecError("expand base is not a vertex");
      for_each_edge(base->id, op.dir, [&](int64_t eid, int64_t other, bool) {
        const Edge& e = graph_.edge(eid);
        if (!type_matches(op.edge_types, e.type)) return;
        Record next = rec;
        next[op.edge_alias] = EdgeRef{eid};
        if (!eval_predicate(op.edge_predicate, ctx_for(next))) return;
        if (op.fused_target) {
          next[*op.fused_target] = VertexRef{other};
          if (op.drop_edge_binding) next.erase(op.edge_alias);
        }
        out.push_back(std::move(next));
      });
    }
    if (!op.prefetch.empty() && op.fused_target)
      charge_prefetch(*op.fused_target, op.prefetch,
                      static_cast<int64_t>(out.size()));
    return out;
  }

  ResultSet exec(const GetVOp& op, const PhysNode& n) {
    ResultSet out;
    for (const Record& rec : input(n)) {
      const auto* er = std::get_if<EdgeRef>(&rec.at(op.edge_tag));
      if (!er) throw ExecError("get_v tag is not an edge");
      const Edge& e = graph_.edge(er->id);
      int64_t target;
      switch (op.opt) {
        case VertexOpt::Src:
          target = e.src;
          break;
        case VertexOpt::Dst:
          target = e.dst;
          break;
        case VertexOpt::Other: {
          const auto* base = std::get_if<VertexRef>(&rec.at(op.base_tag));
          if (!base) throw ExecError("get_v base is not a vertex");
          target = e.src == base->id ? e.dst : e.src;
          break;
        }
      }
      const Vertex& tv = graph_.vertex(target);
      if (!type_matches(op.types, tv.type)) continue;
      if (op.bound) {
        const auto* existing = std::get_if<VertexRef>(&rec.at(op.alias));
        if (!existing || existing->id != target) continue;
        Record next = rec;
        if (!eval_predicate(op.predicate, ctx_for(next))) continue;
        out.push_back(std::move(next));
      } else {
        Record next = rec;
        next[op.alias] = VertexRef{target};
        if (!eval_predicate(op.predicate, ctx_for(next))) continue;
        out.push_back(std::move(next));
      }
    }
    charge_prefetch(op.alias, op.prefetch, static_cast<int64_t>(out.size()));
    return out;
  }

  ResultSet exec(const ExpandIntersectOp& op, const PhysNode& n) {
    ResultSet out;
    for (const Record& rec : input(n)) {
      // Per edge: target vertex -> list of edge ids reaching it.
      std::vector<std::map<int64_t, std::vector<int64_t>>> reach;
      reach.reserve(op.edges.size());
      bool dead = false;
      for (const auto& probe : op.edges) {
        const auto* base = std::get_if<VertexRef>(&rec.at(probe.base_tag));
        if (!base) throw ExecError("intersect base is not a vertex");
        std::map<int64_t, std::vector<int64_t>> m;
        for_each_edge(base->id, probe.dir,
                      [&](int64_t eid, int64_t other, bool) {
                        const Edge& e = graph_.edge(eid);
                        if (!type_matches(probe.edge_types, e.type)) return;
                        if (probe.edge_predicate) {
                          Record tmp = rec;
                          tmp[probe.edge_alias] = EdgeRef{eid};
                          if (!eval_predicate(probe.edge_predicate,
                                              ctx_for(tmp)))
                            return;
                        }
                        m[other].push_back(eid);
                      });
        if (m.empty()) {
          dead = true;
          break;
        }
        reach.push_back(std::move(m));
      }
      if (dead) continue;
      // Intersect candidate target sets.
      std::vector<int64_t> targets;
      for (const auto& [t, ids] : reach[0]) targets.push_back(t);
      for (size_t i = 1; i < reach.size(); ++i) {
        std::vector<int64_t> next;
        for (int64_t t : targets)
          if (reach[i].count(t)) next.push_back(t);
        targets = std::move(next);
      }
      for (int64_t t : targets) {
        const Vertex& tv = graph_.vertex(t);
        if (!type_matches(op.target_types, tv.type)) continue;
        // Unfold with full edge-binding multiplicity.
        std::vector<Record> partial{rec};
        for (size_t i = 0; i < op.edges.size(); ++i) {
          std::vector<Record> next;
          for (const Record& r : partial) {
            for (int64_t eid : reach[i].at(t)) {
              Record nr = r;
              if (!op.edges[i].drop_edge_binding)
                nr[op.edges[i].edge_alias] = EdgeRef{eid};
              next.push_back(std::move(nr));
            }
          }
          partial = std::move(next);
        }
        for (Record& r : partial) {
          r[op.target_alias] = VertexRef{t};
          if (!eval_predicate(op.target_predicate, ctx_for(r))) continue;
          out.push_back(std::move(r));
        }
      }
    }
    if (!op.prefetch.empty())
      charge_prefetch(op.target_alias, op.prefetch,
                      static_cast<int64_t>(out.size()));
    return out;
  }

  ResultSet exec(const ExpandDegreeOp& op, const PhysNode& n) {
    ResultSet out;
    for (const Record& rec : input(n)) {
      const auto* base = std::get_if<VertexRef>(&rec.at(op.base_tag));
      if (!base) throw ExecError("expand_degree base is not a vertex");
      std::set<int64_t> distinct_targets;
      for_each_edge(base->id, op.dir, [&](int64_t eid, int64_t other, bool) {
        const Edge& e = graph_.edge(eid);
        if (!type_matches(op.edge_types, e.type)) return;
        if (!type_matches(op.target_types, graph_.vertex(other).type)) return;
        distinct_targets.insert(other);
      });
      if (distinct_targets.empty()) continue;
      Record next = rec;
      next[op.alias] =
          PropertyValue(static_cast<int64_t>(distinct_targets.size()));
      out.push_back(std::move(next));
    }
    return out;
  }

  ResultSet exec(const SelectOpP& op, const PhysNode& n) {
    ResultSet out;
    for (const Record& rec : input(n))
      if (eval_predicate(op.condition, ctx_for(rec))) out.push_back(rec);
    return out;
  }

  ResultSet exec(const ProjectOpP& op, const PhysNode& n) {
    ResultSet out;
    for (const Record& rec : input(n)) {
      Record next;
      for (const auto& c : op.columns) {
        if (c.expr->kind == Expr::Kind::TagRef) {
          auto it = rec.find(c.expr->tag);
          if (it == rec.end())
            throw EvalError("unknown tag '" + c.expr->tag + "' in project");
          next[c.alias] = it->second;
        } else {
          next[c.alias] = eval(*c.expr, ctx_for(rec));
        }
      }
      out.push_back(std::move(next));
    }
    return out;
  }

  ResultSet exec(const GroupOpP& op, const PhysNode& n) {
    // Deterministic grouping: ordered map over key tuples.
    struct Acc {
      std::vector<Record> rows;
    };
    std::map<std::vector<Value>, Acc, bool (*)(const std::vector<Value>&,
                                               const std::vector<Value>&)>
        groups([](const std::vector<Value>& a, const std::vector<Value>& b) {
          for (size_t i = 0; i < a.size() && i < b.size(); ++i) {
            if (value_less(a[i], b[i])) return true;
            if (value_less(b[i], a[i])) return false;
          }
          return a.size() < b.size();
        });
    for (const Record& rec : input(n)) {
      std::vector<Value> key;
      for (const auto& k : op.keys) {
        if (k.expr->kind == Expr::Kind::TagRef) {
          auto it = rec.find(k.expr->tag);
          if (it == rec.end())
            throw EvalError("unknown tag '" + k.expr->tag + "' in group");
          key.push_back(it->second);
        } else {
          key.push_back(eval(*k.expr, ctx_for(rec)));
        }
      }
      groups[key].rows.push_back(rec);
    }
    ResultSet out;
    if (groups.empty() && op.keys.empty()) {
      // Global aggregate over an empty input: counts are 0, everything
      // else is an evaluation error.
      Record rec;
      for (const auto& a : op.aggs) {
        if (a.fn == AggFn::Count || a.fn == AggFn::CountDistinct)
          rec[a.alias] = PropertyValue(int64_t{0});
        else if (a.fn == AggFn::Sum)
          rec[a.alias] = PropertyValue(int64_t{0});
        else
          throw EvalError(std::string(to_string(a.fn)) +
                          " over an empty group");
      }
      out.push_back(std::move(rec));
      return out;
    }
    for (const auto& [key, acc] : groups) {
      Record rec;
      for (size_t i = 0; i < op.keys.size(); ++i)
        rec[op.keys[i].alias] = key[i];
      for (const auto& a : op.aggs) rec[a.alias] = aggregate(a, acc.rows);
      out.push_back(std::move(rec));
    }
    return out;
  }

  Value aggregate(const AggCall& a, const std::vector<Record>& rows) {
    switch (a.fn) {
      case AggFn::Count:
        return PropertyValue(static_cast<int64_t>(rows.size()));
      case AggFn::CountDistinct: {
        std::vector<Value> seen;
        for (const auto& rec : rows) {
          Value v = arg_value(a, rec);
          bool dup = false;
          for (const auto& s : seen)
            if (value_equal(s, v)) dup = true;
          if (!dup) seen.push_back(v);
        }
        return PropertyValue(static_cast<int64_t>(seen.size()));
      }
      case AggFn::Sum: {
        if (rows.empty()) return PropertyValue(int64_t{0});
        PropertyValue acc = scalar_arg(a, rows[0]);
        for (size_t i = 1; i < rows.size(); ++i) {
          PropertyValue v = scalar_arg(a, rows[i]);
          if (acc.kind() == PropertyValue::Kind::Int)
            acc = PropertyValue(acc.as_int() + v.as_int());
          else
            acc = PropertyValue(acc.as_float() + v.as_float());
        }
        return acc;
      }
      case AggFn::Avg: {
        if (rows.empty()) throw EvalError("avg over an empty group");
        double total = 0;
        for (const auto& rec : rows) {
          PropertyValue v = scalar_arg(a, rec);
          total += v.kind() == PropertyValue::Kind::Int
                       ? static_cast<double>(v.as_int())
                       : v.as_float();
        }
        return PropertyValue(total / static_cast<double>(rows.size()));
      }
      case AggFn::Min:
      case AggFn::Max: {
        if (rows.empty())
          throw EvalError("min/max over an empty group");
        PropertyValue best = scalar_arg(a, rows[0]);
        for (size_t i = 1; i < rows.size(); ++i) {
          PropertyValue v = scalar_arg(a, rows[i]);
          int c = v.compare(best);
          if ((a.fn == AggFn::Min && c < 0) || (a.fn == AggFn::Max && c > 0))
            best = v;
        }
        return best;
      }
      case AggFn::First: {
        if (rows.empty()) throw EvalError("first over an empty group");
        return arg_value(a, rows[0]);
      }
    }
    throw EvalError("unreachable aggregate");
  }

  Value arg_value(const AggCall& a, const Record& rec) {
    if (!a.arg) throw EvalError("aggregate requires an argument");
    if (a.arg->kind == Expr::Kind::TagRef) {
      auto it = rec.find(a.arg->tag);
      if (it == rec.end())
        throw EvalError("unknown tag '" + a.arg->tag + "' in aggregate");
      return it->second;
    }
    return eval(*a.arg, ctx_for(rec));
  }

  PropertyValue scalar_arg(const AggCall& a, const Record& rec) {
    Value v = arg_value(a, rec);
    if (const auto* p = std::get_if<PropertyValue>(&v)) return *p;
    throw EvalError("aggregate argument must be a scalar");
  }

  ResultSet exec(const OrderOpP& op, const PhysNode& n) {
    ResultSet out = input(n);
    std::stable_sort(out.begin(), out.end(),
                     [&](const Record& a, const Record& b) {
                       for (const auto& k : op.keys) {
                         PropertyValue va = eval(*k.expr, ctx_for(a));
                         PropertyValue vb = eval(*k.expr, ctx_for(b));
                         int c = va.compare(vb);
                         if (c != 0) return k.ascending ? c < 0 : c > 0;
                       }
                       return record_less(a, b);
                     });
    return out;
  }

  ResultSet exec(const LimitOpP& op, const PhysNode& n) {
    const ResultSet& in = input(n);
    ResultSet out(in.begin(),
                  in.begin() + std::min<size_t>(in.size(),
                                                static_cast<size_t>(op.count)));
    return out;
  }

  ResultSet exec(const UnfoldOpP& op, const PhysNode& n) {
    ResultSet out;
    for (const Record& rec : input(n)) {
      auto it = rec.find(op.tag);
      if (it == rec.end())
        throw ExecError("unfold tag '" + op.tag + "' missing");
      if (const auto* p = std::get_if<PropertyValue>(&it->second)) {
        for (const auto& item : p->as_list()) {
          Record next = rec;
          next[op.alias] = item;
          out.push_back(std::move(next));
        }
      } else if (const auto* pr = std::get_if<PathRef>(&it->second)) {
        for (size_t i = 0; i < pr->elements.size(); ++i) {
          Record next = rec;
          if (i % 2 == 0)
            next[op.alias] = VertexRef{pr->elements[i]};
          else
            next[op.alias] = EdgeRef{pr->elements[i]};
          out.push_back(std::move(next));
        }
      } else {
        throw ExecError("unfold requires a list or path value");
      }
    }
    return out;
  }

  ResultSet exec(const HashJoinOp& op, const PhysNode& n) {
    const ResultSet& left = input(n, 0);
    const ResultSet& right = input(n, 1);
    auto key_of = [&](const Record& rec) {
      std::vector<Value> key;
      for (const auto& k : op.keys) {
        auto it = rec.find(k);
        if (it == rec.end())
          throw ExecError("join key '" + k + "' missing from record");
        key.push_back(it->second);
      }
      return key;
    };
    auto vec_less = [](const std::vector<Value>& a,
                       const std::vector<Value>& b) {
      for (size_t i = 0; i < a.size() && i < b.size(); ++i) {
        if (value_less(a[i], b[i])) return true;
        if (value_less(b[i], a[i])) return false;
      }
      return a.size() < b.size();
    };
    std::map<std::vector<Value>, std::vector<const Record*>,
             decltype(vec_less)>
        table(vec_less);
    for (const Record& r : right) table[key_of(r)].push_back(&r);

    ResultSet out;
    std::map<const Record*, bool> right_matched;
    for (const Record& r : right) right_matched[&r] = false;

    for (const Record& l : left) {
      auto it = table.find(key_of(l));
      bool matched = it != table.end() && !it->second.empty();
      switch (op.type) {
        case JoinType::Semi:
          if (matched) out.push_back(l);
          break;
        case JoinType::Anti:
          if (!matched) out.push_back(l);
          break;
        case JoinType::Inner:
        case JoinType::LeftOuter:
        case JoinType::RightOuter:
        case JoinType::FullOuter: {
          if (matched) {
            for (const Record* rr : it->second) {
              right_matched[rr] = true;
              Record merged = l;
              for (const auto& [k, v] : *rr) {
                auto mit = merged.find(k);
                if (mit != merged.end()) {
                  if (!value_equal(mit->second, v))
                    throw ExecError("join inputs disagree on alias '" + k +
                                    "'");
                } else {
                  merged.emplace(k, v);
                }
              }
              out.push_back(std::move(merged));
            }
          } else if (op.type == JoinType::LeftOuter ||
                     op.type == JoinType::FullOuter) {
            out.push_back(l);
          }
          break;
        }
      }
    }
    if (op.type == JoinType::RightOuter || op.type == JoinType::FullOuter) {
      for (const Record& r : right)
        if (!right_matched[&r]) out.push_back(r);
    }
    return out;
  }

  ResultSet exec(const UnionOpP&, const PhysNode& n) {
    ResultSet out = input(n, 0);
    const ResultSet& right = input(n, 1);
    out.insert(out.end(), right.begin(), right.end());
    return out;
  }

  ResultSet exec(const EdgeDistinctFilterOp& op, const PhysNode& n) {
    ResultSet out;
    for (const Record& rec : input(n)) {
      std::set<int64_t> seen;
      bool dup = false;
      for (const auto& alias : op.edge_aliases) {
        auto it = rec.find(alias);
        if (it == rec.end())
          throw ExecError("edge-distinct filter misses binding for '" +
                          alias + "'");
        if (const auto* er = std::get_if<EdgeRef>(&it->second)) {
          if (!seen.insert(er->id).second) {
            dup = true;
            break;
          }
        }
      }
      if (!dup) out.push_back(rec);
    }
    return out;
  }

  ResultSet exec(const PathAssembleOp& op, const PhysNode& n) {
    ResultSet out;
    const PathSpec& spec = op.spec;
    for (const Record& rec : input(n)) {
      PathRef path;
      std::vector<std::string> vertex_seq;
      vertex_seq.push_back(spec.start);
      for (const auto& iv : spec.inner_vertices) vertex_seq.push_back(iv);
      vertex_seq.push_back(spec.end);
      bool ok = true;
      std::set<int64_t> vset;
      std::set<int64_t> eset;
      bool simple_ok = true, trail_ok = true;
      for (size_t i = 0; i < vertex_seq.size(); ++i) {
        const auto* vr = std::get_if<VertexRef>(&rec.at(vertex_seq[i]));
        if (!vr) {
          ok = false;
          break;
        }
        if (!vset.insert(vr->id).second) simple_ok = false;
        path.elements.push_back(vr->id);
        if (i < spec.edge_aliases.size()) {
          const auto* er =
              std::get_if<EdgeRef>(&rec.at(spec.edge_aliases[i]));
          if (!er) {
            ok = false;
            break;
          }
          if (!eset.insert(er->id).second) trail_ok = false;
          path.elements.push_back(er->id);
        }
      }
      if (!ok) throw ExecError("path elements missing from record");
      if (spec.opt == PathOpt::Simple && !simple_ok) continue;
      if (spec.opt == PathOpt::Trail && !trail_ok) continue;
      Record next = rec;
      next[spec.alias] = std::move(path);
      if (op.drop_elements) {
        for (const auto& iv : spec.inner_vertices) next.erase(iv);
        for (const auto& ea : spec.edge_aliases) next.erase(ea);
      }
      out.push_back(std::move(next));
    }
    return out;
  }

  const PhysPlan& plan_;
  const DataGraph& graph_;
  ExecOptions options_;
  std::map<int, ResultSet> results_;
  std::map<std::string, std::set<std::string>> prefetched_;
  mutable ExecStats stats_;
};

}  // namespace

std::pair<ResultSet, ExecStats> execute(const PhysPlan& plan,
                                        const DataGraph& graph,
                                        const ExecOptions& options) {
  return Engine(plan, graph, options).run();
}

// --- oracle ---

namespace {

// Exhaustive backtracking enumeration, independent of the physical
// operators. Predicates fire at the earliest point all their tags are
// bound.
class Oracle {
 public:
  Oracle(const PatternGraph& pattern, const DataGraph& graph,
         Semantics semantics, const Record& anchors)
      : pattern_(pattern),
        graph_(graph),
        semantics_(semantics),
        anchors_(anchors) {
    const size_t n = pattern_.vertices.size();
    for (size_t i = 0; i < n; ++i)
      vindex_[pattern_.vertices[i].alias] = i;

    // Vertex order: anchors first, then connected-first expansion.
    std::set<size_t> placed;
    for (size_t i = 0; i < n; ++i)
      if (anchors_.count(pattern_.vertices[i].alias)) {
        order_.push_back(i);
        placed.insert(i);
      }
    while (order_.size() < n) {
      size_t pick = n;
      for (size_t i = 0; i < n && pick == n; ++i) {
        if (placed.count(i)) continue;
        for (const auto* e :
             pattern_.incident_edges(pattern_.vertices[i].alias)) {
          size_t o = vindex_.at(
              e->from == pattern_.vertices[i].alias ? e->to : e->from);
          if (placed.count(o)) {
            pick = i;
            break;
          }
        }
      }
      if (pick == n)
        for (size_t i = 0; i < n && pick == n; ++i)
          if (!placed.count(i)) pick = i;
      order_.push_back(pick);
      placed.insert(pick);
    }

    std::vector<size_t> pos(n);
    for (size_t i = 0; i < order_.size(); ++i) pos[order_[i]] = i;
    ready_.resize(n);
    for (const auto& e : pattern_.edges) {
      size_t a = pos[vindex_.at(e.from)];
      size_t b = pos[vindex_.at(e.to)];
      ready_[std::max(a, b)].push_back(&e);
    }

    for (const auto& v : pattern_.vertices)
      if (v.predicate)
        predicates_.emplace_back(expr_tags(v.predicate), v.predicate);
    for (const auto& e : pattern_.edges)
      if (e.predicate)
        predicates_.emplace_back(expr_tags(e.predicate), e.predicate);
  }

  ResultSet run() {
    if (pattern_.vertices.empty()) return {};
    Record working = anchors_;
    place_vertex(0, working);
    return finish();
  }

 private:
  // Fires every pending predicate whose tags just became fully bound.
  bool predicates_hold(const Record& rec, const std::string& new_alias) {
    for (const auto& [tags, pred] : predicates_) {
      if (!tags.count(new_alias)) continue;
      bool all_bound = true;
      for (const auto& t : tags)
        if (!rec.count(t)) all_bound = false;
      if (!all_bound) continue;
      EvalContext ctx{rec, graph_, nullptr, nullptr, false};
      if (!eval_predicate(pred, ctx)) return false;
    }
    return true;
  }

  void place_vertex(size_t step, Record& rec) {
    size_t vi = order_[step];
    const PatternVertex& pv = pattern_.vertices[vi];
    auto try_vertex = [&](int64_t vid) {
      if (!pv.types.contains(graph_.vertex(vid).type)) return;
      bool had = rec.count(pv.alias) > 0;
      rec[pv.alias] = VertexRef{vid};
      if (predicates_hold(rec, pv.alias)) bind_edges(step, 0, rec);
      if (!had) rec.erase(pv.alias);
    };
    auto it = anchors_.find(pv.alias);
    if (it != anchors_.end()) {
      const auto* vr = std::get_if<VertexRef>(&it->second);
      if (!vr) throw ExecError("anchor '" + pv.alias + "' is not a vertex");
      try_vertex(vr->id);
      return;
    }
    for (const auto& [vid, v] : graph_.vertices()) try_vertex(vid);
  }

  void bind_edges(size_t step, size_t ei, Record& rec) {
    if (ei == ready_[step].size()) {
      if (step + 1 == order_.size())
        results_.push_back(rec);
      else
        place_vertex(step + 1, rec);
      return;
    }
    const PatternEdge& e = *ready_[step][ei];
    auto try_edge = [&](int64_t eid) {
      if (!e.types.contains(graph_.edge(eid).type)) return;
      rec[e.alias] = EdgeRef{eid};
      if (predicates_hold(rec, e.alias)) bind_edges(step, ei + 1, rec);
      rec.erase(e.alias);
    };
    if (e.is_both()) {
      int64_t from =
          std::get<VertexRef>(rec.at(e.from)).id;
      int64_t to = std::get<VertexRef>(rec.at(e.to)).id;
      for (int64_t eid : graph_.vertex(from).out_edges)
        if (graph_.edge(eid).dst == to) try_edge(eid);
      for (int64_t eid : graph_.vertex(from).in_edges)
        if (graph_.edge(eid).src == to) try_edge(eid);
    } else {
      int64_t src = std::get<VertexRef>(rec.at(e.src())).id;
      int64_t dst = std::get<VertexRef>(rec.at(e.dst())).id;
      for (int64_t eid : graph_.vertex(src).out_edges)
        if (graph_.edge(eid).dst == dst) try_edge(eid);
    }
  }

  ResultSet finish() {
    ResultSet out;
    for (Record& rec : results_) {
      bool keep = true;
      for (const auto& spec : pattern_.paths) {
        PathRef path;
        std::set<int64_t> vset, eset;
        bool simple_ok = true, trail_ok = true;
        std::vector<std::string> vseq{spec.start};
        for (const auto& iv : spec.inner_vertices) vseq.push_back(iv);
        vseq.push_back(spec.end);
        for (size_t i = 0; i < vseq.size(); ++i) {
          int64_t vid = std::get<VertexRef>(rec.at(vseq[i])).id;
          if (!vset.insert(vid).second) simple_ok = false;
          path.elements.push_back(vid);
          if (i < spec.edge_aliases.size()) {
            int64_t eid =
                std::get<EdgeRef>(rec.at(spec.edge_aliases[i])).id;
            if (!eset.insert(eid).second) trail_ok = false;
            path.elements.push_back(eid);
          }
        }
        if (spec.opt == PathOpt::Simple && !simple_ok) keep = false;
        if (spec.opt == PathOpt::Trail && !trail_ok) keep = false;
        if (!keep) break;
        rec[spec.alias] = std::move(path);
      }
      if (!keep) continue;
      if (semantics_ == Semantics::EdgeDistinct) {
        std::set<int64_t> seen;
        bool dup = false;
        for (const auto& e : pattern_.edges) {
          int64_t eid = std::get<EdgeRef>(rec.at(e.alias)).id;
          if (!seen.insert(eid).second) {
            dup = true;
            break;
          }
        }
        if (dup) continue;
      }
      out.push_back(std::move(rec));
    }
    return out;
  }

  const PatternGraph& pattern_;
  const DataGraph& graph_;
  Semantics semantics_;
  Record anchors_;
  std::map<std::string, size_t> vindex_;
  std::vector<size_t> order_;
  std::vector<std::vector<const PatternEdge*>> ready_;
  std::vector<std::pair<std::set<std::string>, ExprPtr>> predicates_;
  ResultSet results_;
};

}  // namespace

ResultSet oracle_match(const PatternGraph& pattern, const DataGraph& graph,
                       Semantics semantics, const Record& anchors) {
  if (pattern.vertices.size() > 6)
    throw SizeGuardError("oracle_match: pattern exceeds 6 vertices");
  if (graph.vertex_count() > 120)
    throw SizeGuardError("oracle_match: graph exceeds 120 vertices");
  return Oracle(pattern, graph, semantics, anchors).run();
}

}  // namespace gopt
