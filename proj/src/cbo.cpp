#include "gopt/cbo.hpp"

#include <algorithm>
#include <functional>
#include <limits>

namespace gopt {

BackendProfile BackendProfile::into_profile() {
  BackendProfile p;
  p.name = "into";
  p.distributed = false;
  p.expand_style = ExpandStyle::Into;
  p.primary_keys["*"] = "id";
  return p;
}

BackendProfile BackendProfile::intersect_profile() {
  BackendProfile p;
  p.name = "intersect";
  p.distributed = true;
  p.expand_style = ExpandStyle::Intersect;
  return p;
}

BackendProfile BackendProfile::by_name(const std::string& name) {
  if (name == "into") return into_profile();
  if (name == "intersect") return intersect_profile();
  throw std::runtime_error("unknown backend profile: " + name);
}

std::string SubPattern::key() const {
  std::string k;
  for (const auto& v : verts) k += v + ",";
  k += "|";
  for (const auto& e : edges) k += e + ",";
  return k;
}

PatternGraph subpattern_view(const PatternGraph& parent, const SubPattern& s) {
  PatternGraph out;
  for (const auto& v : parent.vertices)
    if (s.verts.count(v.alias)) out.vertices.push_back(v);
  for (const auto& e : parent.edges)
    if (s.edges.count(e.alias)) out.edges.push_back(e);
  return out;
}

namespace {

SubPattern full_subpattern(const PatternGraph& p) {
  SubPattern s;
  for (const auto& v : p.vertices) s.verts.insert(v.alias);
  for (const auto& e : p.edges) s.edges.insert(e.alias);
  return s;
}

// Connectivity where all anchor vertices count as one component.
bool connected_with_anchors(const PatternGraph& parent, const SubPattern& s,
                            const std::set<std::string>& anchors) {
  if (s.verts.empty()) return false;
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& e : parent.edges) {
    if (!s.edges.count(e.alias)) continue;
    adj[e.from].push_back(e.to);
    adj[e.to].push_back(e.from);
  }
  std::vector<std::string> stack;
  std::set<std::string> seen;
  for (const auto& a : anchors)
    if (s.verts.count(a)) stack.push_back(a);
  if (stack.empty()) stack.push_back(*s.verts.begin());
  while (!stack.empty()) {
    std::string cur = stack.back();
    stack.pop_back();
    if (!seen.insert(cur).second) continue;
    for (const auto& nx : adj[cur])
      if (s.verts.count(nx)) stack.push_back(nx);
  }
  return seen.size() == s.verts.size();
}

std::vector<std::string> edges_touching(const PatternGraph& parent,
                                        const SubPattern& s,
                                        const std::string& v) {
  std::vector<std::string> out;
  for (const auto& e : parent.edges)
    if (s.edges.count(e.alias) && (e.from == v || e.to == v))
      out.push_back(e.alias);
  return out;
}

}  // namespace

std::vector<Transformation> get_cands(const PatternGraph& parent,
                                      const SubPattern& sub,
                                      const std::set<std::string>& anchors) {
  std::vector<Transformation> out;
  std::set<std::string> seen_codes;

  auto dedup = [&](const std::string& code) {
    return !seen_codes.insert(code).second;
  };

  // Vertex expansions: peel a vertex whose removal keeps the rest
  // connected (anchors act as one component and are never peeled).
  if (sub.verts.size() >= 2) {
    for (const auto& v : sub.verts) {
      if (anchors.count(v)) continue;
      Transformation t;
      t.kind = Transformation::Kind::VertexExpansion;
      t.vertex = v;
      t.edges = edges_touching(parent, sub, v);
      if (t.edges.empty()) continue;  // disconnected sub; not reachable
      SubPattern src;
      src.verts = sub.verts;
      src.verts.erase(v);
      src.edges = sub.edges;
      for (const auto& ea : t.edges) src.edges.erase(ea);
      if (!connected_with_anchors(parent, src, anchors)) continue;
      PatternGraph pv_view;  // the peeled part, for dedup codes
      {
        SubPattern pv;
        pv.verts.insert(v);
        for (const auto& e : parent.edges)
          if (sub.edges.count(e.alias) && (e.from == v || e.to == v)) {
            pv.edges.insert(e.alias);
            pv.verts.insert(e.from);
            pv.verts.insert(e.to);
          }
        pv_view = subpattern_view(parent, pv);
      }
      std::string code =
          encode_pattern(subpattern_view(parent, src), true) + "//" +
          encode_pattern(pv_view, true);
      if (dedup(code)) continue;
      out.push_back(std::move(t));
    }
  }

  // Closing leftover edges between already-bound vertices: self-loops on
  // the last vertex, or edges among the anchor set.
  bool all_bound = sub.verts.size() == 1 ||
                   (!anchors.empty() &&
                    std::all_of(sub.verts.begin(), sub.verts.end(),
                                [&](const std::string& v) {
                                  return anchors.count(v) > 0;
                                }));
  if (all_bound && !sub.edges.empty()) {
    Transformation t;
    t.kind = Transformation::Kind::VertexExpansion;
    t.vertex = *sub.verts.begin();
    t.loop_close = true;
    for (const auto& e : sub.edges) t.edges.push_back(e);
    out.push_back(std::move(t));
  }

  // Binary joins over connected edge bipartitions (unanchored mode only).
  if (anchors.empty() && sub.edges.size() >= 2) {
    std::vector<std::string> edges(sub.edges.begin(), sub.edges.end());
    const size_t m = edges.size();
    for (uint64_t mask = 1; mask + 1 < (uint64_t{1} << m); ++mask) {
      if (!(mask & 1)) continue;  // fix edges[0] on side1: unordered dedup
      SubPattern s1, s2;
      for (size_t i = 0; i < m; ++i) {
        const PatternEdge* e = parent.find_edge(edges[i]);
        SubPattern& side = (mask >> i) & 1 ? s1 : s2;
        side.edges.insert(edges[i]);
        side.verts.insert(e->from);
        side.verts.insert(e->to);
      }
      if (s2.edges.empty()) continue;
      if (!connected_with_anchors(parent, s1, {}) ||
          !connected_with_anchors(parent, s2, {}))
        continue;
      std::vector<std::string> keys;
      std::set_intersection(s1.verts.begin(), s1.verts.end(),
                            s2.verts.begin(), s2.verts.end(),
                            std::back_inserter(keys));
      if (keys.empty()) continue;
      // Every sub vertex must be covered.
      std::set<std::string> covered = s1.verts;
      covered.insert(s2.verts.begin(), s2.verts.end());
      if (covered != sub.verts) continue;
      Transformation t;
      t.kind = Transformation::Kind::BinaryJoin;
      std::string code =
          encode_pattern(subpattern_view(parent, s1), true) + "//" +
          encode_pattern(subpattern_view(parent, s2), true);
      std::string code_rev =
          encode_pattern(subpattern_view(parent, s2), true) + "//" +
          encode_pattern(subpattern_view(parent, s1), true);
      if (dedup(std::min(code, code_rev))) continue;
      t.side1 = std::move(s1.edges);
      t.side2 = std::move(s2.edges);
      t.keys = std::move(keys);
      out.push_back(std::move(t));
    }
  }
  return out;
}

std::vector<Transformation> get_cands(const PatternGraph& pattern) {
  return get_cands(pattern, full_subpattern(pattern), {});
}

std::string CboStep::serialize() const {
  switch (kind) {
    case Kind::Scan:
      return "Scan(" + scan_vertex + ")";
    case Kind::Anchor:
      return "Anchor";
    case Kind::Expand: {
      std::string s = "Expand(" + trans.vertex + ";";
      std::vector<std::string> es = trans.edges;
      std::sort(es.begin(), es.end());
      for (const auto& e : es) s += e + ",";
      return s + ")(" + sub->serialize() + ")";
    }
    case Kind::Join: {
      std::string s = "Join([";
      for (const auto& k : trans.keys) s += k + ",";
      return s + "];" + left->serialize() + ";" + right->serialize() + ")";
    }
  }
  return "?";
}

namespace {

SubPattern side_subpattern(const PatternGraph& parent,
                           const std::set<std::string>& edge_aliases) {
  SubPattern s;
  s.edges = edge_aliases;
  for (const auto& ea : edge_aliases) {
    const PatternEdge* e = parent.find_edge(ea);
    s.verts.insert(e->from);
    s.verts.insert(e->to);
  }
  return s;
}

}  // namespace

// Edges whose endpoints are all bound already (self-loops, anchor-to-anchor
// closes) sort last and use the closing ratio.
std::vector<std::string> expansion_edge_order(const GlogueQuery& gq,
                                              const PatternGraph& parent,
                                              const Transformation& t) {
  struct Entry {
    std::string alias;
    double ratio;
    bool closing_only;
  };
  std::vector<Entry> entries;
  for (const auto& ea : t.edges) {
    const PatternEdge* e = parent.find_edge(ea);
    bool touches_new =
        !t.loop_close && (e->from == t.vertex || e->to == t.vertex) &&
        e->from != e->to;
    double r;
    if (touches_new) {
      const std::string& vi = e->from == t.vertex ? e->to : e->from;
      r = gq.expand_ratio(e->types, parent.find_vertex(vi)->types,
                          parent.find_vertex(t.vertex)->types, false,
                          e->is_both());
    } else {
      r = gq.expand_ratio(e->types, parent.find_vertex(e->src())->types,
                          parent.find_vertex(e->dst())->types, true,
                          e->is_both());
    }
    entries.push_back(Entry{ea, r, !touches_new});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.closing_only != b.closing_only) return b.closing_only;
    return a.ratio != b.ratio ? a.ratio < b.ratio : a.alias < b.alias;
  });
  std::vector<std::string> out;
  for (const auto& e : entries) out.push_back(e.alias);
  return out;
}

double cost_join(const GlogueQuery& gq, const PatternGraph& p1,
                 const PatternGraph& p2, const BackendProfile& backend) {
  return backend.alpha_of("join") * (gq.get_freq(p1) + gq.get_freq(p2));
}

double cost_expand_into(const GlogueQuery& gq, const PatternGraph& parent,
                        const SubPattern& source, const Transformation& t,
                        const BackendProfile& backend) {
  SubPattern cur = source;
  if (!t.loop_close) cur.verts.insert(t.vertex);
  double total = 0;
  for (const auto& ea : expansion_edge_order(gq, parent, t)) {
    cur.edges.insert(ea);
    total += gq.get_freq(subpattern_view(parent, cur));
  }
  return backend.alpha_of("expand") * total;
}

double cost_expand_intersect(const GlogueQuery& gq, const PatternGraph& parent,
                             const SubPattern& source, const Transformation& t,
                             const BackendProfile& backend) {
  double n = static_cast<double>(t.edges.size());
  return backend.alpha_of("expand") * n *
         gq.get_freq(subpattern_view(parent, source));
}

namespace {

class Optimizer {
 public:
  Optimizer(const PatternGraph& pattern, const GlogueQuery& gq,
            const BackendProfile& backend, bool pruning,
            const std::set<std::string>& anchors)
      : pattern_(pattern),
        gq_(gq),
        backend_(backend),
        pruning_(pruning),
        anchors_(anchors) {}

  OptimizeResult run() {
    seed();
    OptimizeResult greedy = greedy_solution();
    incumbent_ = greedy.cost;
    SubPattern full = full_subpattern(pattern_);
    // Precompute size-2 subpatterns alongside the seeds.
    if (anchors_.empty()) {
      for (const auto& e : pattern_.edges)
        search(side_subpattern(pattern_, {e.alias}));
    }
    search(full);
    auto& entry = memo_.at(full.key());
    OptimizeResult out;
    out.plan = entry.plan;
    out.cost = entry.cost;
    out.explored = explored_;
    // Pruning discards any branch that cannot beat the greedy incumbent,
    // so when the incumbent is itself optimal the survivors may be worse.
    if (!out.plan || greedy.cost < out.cost) {
      out.plan = greedy.plan;
      out.cost = greedy.cost;
    }
    return out;
  }

  OptimizeResult greedy_solution() {
    SubPattern full = full_subpattern(pattern_);
    auto [plan, cost] = greedy(full);
    return OptimizeResult{plan, cost, 0};
  }

 private:
  struct Entry {
    CboStepPtr plan;
    double cost = std::numeric_limits<double>::infinity();
    bool final_ = false;
  };

  double freq_of(const SubPattern& s) const {
    return gq_.get_freq(subpattern_view(pattern_, s));
  }

  double comm_cost(const SubPattern& s) const {
    return backend_.distributed ? freq_of(s) : 0.0;
  }

  double scan_cost(const std::string& v) const {
    SubPattern s;
    s.verts.insert(v);
    return backend_.alpha_of("scan") * freq_of(s);
  }

  bool anchored_base(const SubPattern& s) const {
    if (anchors_.empty()) return false;
    if (!s.edges.empty()) return false;
    return s.verts == anchors_;
  }

  void seed() {
    if (!anchors_.empty()) {
      SubPattern a;
      a.verts = anchors_;
      auto step = std::make_shared<CboStep>();
      step->kind = CboStep::Kind::Anchor;
      step->covers = a;
      memo_[a.key()] = Entry{step, 0.0, true};
      return;
    }
    for (const auto& v : pattern_.vertices) {
      SubPattern s;
      s.verts.insert(v.alias);
      auto step = std::make_shared<CboStep>();
      step->kind = CboStep::Kind::Scan;
      step->scan_vertex = v.alias;
      step->covers = s;
      memo_[s.key()] = Entry{step, scan_cost(v.alias), true};
    }
  }

  double compute_cost(const SubPattern& src, const Transformation& t) const {
    if (t.kind == Transformation::Kind::VertexExpansion) {
      return backend_.expand_style == BackendProfile::ExpandStyle::Into
                 ? cost_expand_into(gq_, pattern_, src, t, backend_)
                 : cost_expand_intersect(gq_, pattern_, src, t, backend_);
    }
    return cost_join(gq_, subpattern_view(pattern_, side_subpattern(pattern_, t.side1)),
                     subpattern_view(pattern_, side_subpattern(pattern_, t.side2)),
                     backend_);
  }

  // Sound lower bound on the optimal cost of a subpattern.
  double lb_cost(const SubPattern& s) const {
    auto it = memo_.find(s.key());
    if (it != memo_.end() && it->second.final_) return it->second.cost;
    double lb = 0;
    if (anchors_.empty()) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& v : s.verts) best = std::min(best, scan_cost(v));
      lb = std::max(lb, best);
    }
    if (backend_.distributed) lb = std::max(lb, freq_of(s));
    return lb;
  }

  void search(const SubPattern& sub) {
    auto it = memo_.find(sub.key());
    if (it != memo_.end() && it->second.final_) return;
    Entry entry;

    for (const Transformation& t : get_cands(pattern_, sub, anchors_)) {
      if (t.kind == Transformation::Kind::VertexExpansion) {
        SubPattern src = sub;
        if (!t.loop_close) src.verts.erase(t.vertex);
        for (const auto& ea : t.edges) src.edges.erase(ea);
        double step_cost = comm_cost(sub) + compute_cost(src, t);
        if (pruning_ && lb_cost(src) + step_cost >= incumbent_) continue;
        ++explored_;
        search(src);
        const Entry& child = memo_.at(src.key());
        if (!child.plan) continue;
        double cost = child.cost + step_cost;
        auto step = std::make_shared<CboStep>();
        step->kind = CboStep::Kind::Expand;
        step->sub = child.plan;
        step->trans = t;
        step->covers = sub;
        consider(entry, std::move(step), cost);
      } else {
        SubPattern s1 = side_subpattern(pattern_, t.side1);
        SubPattern s2 = side_subpattern(pattern_, t.side2);
        double step_cost = comm_cost(sub) + compute_cost(s1, t);
        if (pruning_ && lb_cost(s1) + lb_cost(s2) + step_cost >= incumbent_)
          continue;
        ++explored_;
        search(s1);
        search(s2);
        const Entry& c1 = memo_.at(s1.key());
        const Entry& c2 = memo_.at(s2.key());
        if (!c1.plan || !c2.plan) continue;
        double cost = c1.cost + c2.cost + step_cost;
        auto step = std::make_shared<CboStep>();
        step->kind = CboStep::Kind::Join;
        step->left = c1.plan;
        step->right = c2.plan;
        step->trans = t;
        step->covers = sub;
        consider(entry, std::move(step), cost);
      }
    }
    entry.final_ = true;
    memo_[sub.key()] = std::move(entry);
  }

  void consider(Entry& entry, CboStepPtr plan, double cost) {
    if (cost < entry.cost ||
        (cost == entry.cost && entry.plan &&
         plan->serialize() < entry.plan->serialize())) {
      entry.cost = cost;
      entry.plan = std::move(plan);
    }
  }

  // Greedy reduction used for the initial bound.
  std::pair<CboStepPtr, double> greedy(const SubPattern& sub) {
    if (sub.verts.size() == 1 && sub.edges.empty()) {
      auto step = std::make_shared<CboStep>();
      step->kind = CboStep::Kind::Scan;
      step->scan_vertex = *sub.verts.begin();
      step->covers = sub;
      return {step, scan_cost(step->scan_vertex)};
    }
    if (anchored_base(sub)) {
      auto step = std::make_shared<CboStep>();
      step->kind = CboStep::Kind::Anchor;
      step->covers = sub;
      return {step, 0.0};
    }

    auto cands = get_cands(pattern_, sub, anchors_);
    if (cands.empty())
      throw StatsError("greedy: no candidate transformation for subpattern");
    const Transformation* best = nullptr;
    double best_key = 0;
    std::string best_ser;
    for (const auto& t : cands) {
      double key;
      std::string ser;
      if (t.kind == Transformation::Kind::VertexExpansion) {
        SubPattern src = sub;
        if (!t.loop_close) src.verts.erase(t.vertex);
        for (const auto& ea : t.edges) src.edges.erase(ea);
        key = comm_cost(sub) + compute_cost(src, t) + freq_of(src);
        ser = "E" + t.vertex;
      } else {
        SubPattern s1 = side_subpattern(pattern_, t.side1);
        SubPattern s2 = side_subpattern(pattern_, t.side2);
        key = comm_cost(sub) + compute_cost(s1, t) + freq_of(s1) + freq_of(s2);
        ser = "J" + SubPattern{s1}.key();
      }
      if (!best || key < best_key || (key == best_key && ser < best_ser)) {
        best = &t;
        best_key = key;
        best_ser = ser;
      }
    }

    if (best->kind == Transformation::Kind::VertexExpansion) {
      SubPattern src = sub;
      if (!best->loop_close) src.verts.erase(best->vertex);
      for (const auto& ea : best->edges) src.edges.erase(ea);
      auto [child, child_cost] = greedy(src);
      auto step = std::make_shared<CboStep>();
      step->kind = CboStep::Kind::Expand;
      step->sub = child;
      step->trans = *best;
      step->covers = sub;
      return {step, child_cost + comm_cost(sub) + compute_cost(src, *best)};
    }
    SubPattern s1 = side_subpattern(pattern_, best->side1);
    SubPattern s2 = side_subpattern(pattern_, best->side2);
    auto [l, lc] = greedy(s1);
    auto [r, rc] = greedy(s2);
    auto step = std::make_shared<CboStep>();
    step->kind = CboStep::Kind::Join;
    step->left = l;
    step->right = r;
    step->trans = *best;
    step->covers = sub;
    return {step, lc + rc + comm_cost(sub) + compute_cost(s1, *best)};
  }

  const PatternGraph& pattern_;
  const GlogueQuery& gq_;
  const BackendProfile& backend_;
  bool pruning_;
  std::set<std::string> anchors_;
  std::map<std::string, Entry> memo_;
  double incumbent_ = std::numeric_limits<double>::infinity();
  int64_t explored_ = 0;
};

}  // namespace

OptimizeResult greedy_initial(const PatternGraph& pattern,
                              const GlogueQuery& gq,
                              const BackendProfile& backend,
                              const std::set<std::string>& anchors) {
  Optimizer opt(pattern, gq, backend, false, anchors);
  return opt.greedy_solution();
}

OptimizeResult optimize_pattern(const PatternGraph& pattern,
                                const GlogueQuery& gq,
                                const BackendProfile& backend, bool pruning,
                                const std::set<std::string>& anchors) {
  if (pattern.vertices.empty())
    throw StatsError("cannot optimize an empty pattern");
  Optimizer opt(pattern, gq, backend, pruning, anchors);
  return opt.run();
}

}  // namespace gopt
