#include "gopt/type_inference.hpp"

#include <algorithm>
#include <map>

namespace gopt {

bool is_valid(const InferenceResult& r) {
  return std::holds_alternative<InferenceValid>(r);
}

const PatternGraph& valid_pattern(const InferenceResult& r) {
  return std::get<InferenceValid>(r).pattern;
}

const std::string& invalid_alias(const InferenceResult& r) {
  return std::get<InferenceInvalid>(r).offending_alias;
}

namespace {

using TypeSet = std::set<std::string>;

struct Domains {
  std::map<std::string, TypeSet> vertex;  // alias -> candidate vertex types
  std::map<std::string, TypeSet> edge;    // alias -> candidate edge names
};

// One orientation of a pattern edge as a (src, dst) pair of vertex aliases.
struct Arc {
  const PatternEdge* edge;
  std::string src;
  std::string dst;
};

std::vector<Arc> arcs_of(const PatternEdge& e) {
  if (e.is_both())
    return {Arc{&e, e.from, e.to}, Arc{&e, e.to, e.from}};
  return {Arc{&e, e.src(), e.dst()}};
}

}  // namespace

InferenceResult infer_types(const PatternGraph& pattern,
                            const GraphSchema& schema) {
  const TypeSet all_vertex_types = schema.vertex_types();
  const TypeSet all_edge_names = schema.edge_type_names();

  Domains dom;
  for (const auto& v : pattern.vertices) {
    TypeSet resolved = v.types.resolve(all_vertex_types);
    if (!v.types.is_all())
      for (const auto& t : resolved)
        if (!all_vertex_types.count(t)) return InferenceInvalid{v.alias};
    if (resolved.empty()) return InferenceInvalid{v.alias};
    dom.vertex[v.alias] = std::move(resolved);
  }
  for (const auto& e : pattern.edges) {
    TypeSet resolved = e.types.resolve(all_edge_names);
    if (!e.types.is_all())
      for (const auto& t : resolved)
        if (!all_edge_names.count(t)) return InferenceInvalid{e.alias};
    if (resolved.empty()) return InferenceInvalid{e.alias};
    dom.edge[e.alias] = std::move(resolved);
  }

  // Schema out/in degree per type, for pruning types whose required
  // adjacency has no schema support (symmetric in both directions).
  std::map<std::string, int> schema_out, schema_in;
  for (const auto& t : schema.edge_triplets()) {
    ++schema_out[t.src_type];
    ++schema_in[t.dst_type];
  }
  std::map<std::string, bool> has_out, has_in, has_both;
  for (const auto& e : pattern.edges) {
    if (e.is_both()) {
      has_both[e.from] = has_both[e.to] = true;
    } else {
      has_out[e.src()] = true;
      has_in[e.dst()] = true;
    }
  }

  // Worklist of vertices ordered by ascending domain size, ties broken by
  // alias for determinism.
  auto cmp_less = [&](const std::string& a, const std::string& b) {
    size_t sa = dom.vertex[a].size(), sb = dom.vertex[b].size();
    return sa != sb ? sa < sb : a < b;
  };
  std::set<std::string> queued;
  for (const auto& v : pattern.vertices) queued.insert(v.alias);

  const size_t cap =
      16 * pattern.vertices.size() *
          (all_vertex_types.size() + all_edge_names.size() + 1) +
      64;
  size_t iterations = 0;

  while (!queued.empty()) {
    if (++iterations > cap)
      throw PatternError("type inference exceeded its iteration cap");
    auto it = std::min_element(queued.begin(), queued.end(), cmp_less);
    std::string u = *it;
    queued.erase(it);

    // Drop types of u that cannot support u's required adjacency.
    TypeSet& tu = dom.vertex[u];
    for (auto t = tu.begin(); t != tu.end();) {
      bool bad = (has_out[u] && schema_out[*t] == 0) ||
                 (has_in[u] && schema_in[*t] == 0) ||
                 (has_both[u] && schema_out[*t] == 0 && schema_in[*t] == 0);
      t = bad ? tu.erase(t) : std::next(t);
    }
    if (tu.empty()) return InferenceInvalid{u};

    for (const auto* e : pattern.incident_edges(u)) {
      const std::string other = e->from == u ? e->to : e->from;
      // Feasible triplets under the current domains, over all orientations
      // of the edge. This narrows the edge jointly with both endpoints.
      TypeSet next_src_like, next_dst_like, next_edge;
      TypeSet feas_u, feas_other;
      for (const Arc& arc : arcs_of(*e)) {
        for (const auto& trip : schema.edge_triplets()) {
          if (!dom.edge[e->alias].count(trip.edge_type)) continue;
          if (!dom.vertex[arc.src].count(trip.src_type)) continue;
          if (!dom.vertex[arc.dst].count(trip.dst_type)) continue;
          next_edge.insert(trip.edge_type);
          (arc.src == u ? feas_u : feas_other).insert(trip.src_type);
          (arc.dst == u ? feas_u : feas_other).insert(trip.dst_type);
        }
      }
      // Self-loop: both endpoints are u.
      if (other == u) feas_other = feas_u;

      if (next_edge.empty()) return InferenceInvalid{e->alias};
      dom.edge[e->alias] = std::move(next_edge);
      if (feas_u.empty()) return InferenceInvalid{u};
      if (feas_other.empty()) return InferenceInvalid{other};

      bool u_changed = feas_u != dom.vertex[u];
      bool other_changed = feas_other != dom.vertex[other];
      dom.vertex[u] = std::move(feas_u);
      dom.vertex[other] = std::move(feas_other);
      if (u_changed) queued.insert(u);
      if (other_changed) queued.insert(other);
    }
  }

  InferenceValid out;
  out.pattern = pattern;
  for (auto& v : out.pattern.vertices)
    v.types = TypeConstraint::of(dom.vertex[v.alias]);
  for (auto& e : out.pattern.edges)
    e.types = TypeConstraint::of(dom.edge[e.alias]);
  return out;
}

}  // namespace gopt
