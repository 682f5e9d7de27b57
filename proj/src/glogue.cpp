#include "gopt/glogue.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

#include "json.hpp"

namespace gopt {

int64_t count_homomorphisms(const PatternGraph& pattern,
                            const DataGraph& graph) {
  for (const auto& v : pattern.vertices)
    if (!v.types.is_basic())
      throw StatsError("count_homomorphisms requires basic vertex types");
  for (const auto& e : pattern.edges)
    if (!e.types.is_basic() || e.is_both())
      throw StatsError("count_homomorphisms requires basic directed edges");

  const size_t n = pattern.vertices.size();
  std::map<std::string, size_t> index_of;
  for (size_t i = 0; i < n; ++i) index_of[pattern.vertices[i].alias] = i;

  // Edges checkable once vertex i is assigned (both endpoints <= i).
  std::vector<std::vector<const PatternEdge*>> ready(n);
  for (const auto& e : pattern.edges) {
    size_t a = index_of.at(e.src());
    size_t b = index_of.at(e.dst());
    ready[std::max(a, b)].push_back(&e);
  }

  std::vector<int64_t> assignment(n, -1);
  auto slot_count = [&](int64_t src, int64_t dst,
                        const std::string& type) -> int64_t {
    int64_t cnt = 0;
    for (int64_t eid : graph.vertex(src).out_edges) {
      const Edge& ge = graph.edge(eid);
      if (ge.dst == dst && ge.type == type) ++cnt;
    }
    return cnt;
  };

  std::function<int64_t(size_t)> recurse = [&](size_t i) -> int64_t {
    if (i == n) return 1;
    const auto& pv = pattern.vertices[i];
    const std::string& want = *pv.types.names().begin();
    int64_t total = 0;
    for (const auto& [vid, v] : graph.vertices()) {
      if (v.type != want) continue;
      assignment[i] = vid;
      int64_t mult = 1;
      for (const auto* e : ready[i]) {
        int64_t src = assignment[index_of.at(e->src())];
        int64_t dst = assignment[index_of.at(e->dst())];
        mult *= slot_count(src, dst, *e->types.names().begin());
        if (mult == 0) break;
      }
      if (mult > 0) total += mult * recurse(i + 1);
    }
    assignment[i] = -1;
    return total;
  };
  return recurse(0);
}

namespace {

struct Slot {
  size_t src;
  size_t dst;
  std::string type;
};

// Enumerates connected slot subsets for one typing with pruning, invoking
// fn on each candidate pattern.
void enumerate_subsets(const std::vector<Slot>& slots, size_t n,
                       const std::function<void(const std::vector<size_t>&)>& fn,
                       size_t budget) {
  std::vector<size_t> chosen;
  size_t visited = 0;
  std::function<void(size_t)> rec = [&](size_t idx) {
    if (++visited > budget)
      throw StatsError("pattern enumeration budget exceeded; lower k");
    if (idx == slots.size()) {
      if (chosen.empty() && n > 1) return;
      // All vertices must be covered and connected (n==1 with no edges is
      // the single-vertex pattern).
      std::vector<std::set<size_t>> adj(n);
      std::set<size_t> covered;
      for (size_t s : chosen) {
        adj[slots[s].src].insert(slots[s].dst);
        adj[slots[s].dst].insert(slots[s].src);
        covered.insert(slots[s].src);
        covered.insert(slots[s].dst);
      }
      if (n > 1) {
        if (covered.size() != n) return;
        std::set<size_t> seen;
        std::vector<size_t> stack{0};
        while (!stack.empty()) {
          size_t cur = stack.back();
          stack.pop_back();
          if (!seen.insert(cur).second) continue;
          for (size_t nx : adj[cur]) stack.push_back(nx);
        }
        if (seen.size() != n) return;
      }
      fn(chosen);
      return;
    }
    rec(idx + 1);
    chosen.push_back(idx);
    rec(idx + 1);
    chosen.pop_back();
  };
  rec(0);
}

}  // namespace

Glogue Glogue::build(const DataGraph& graph, int k) {
  if (k < 2 || k > kMaxK)
    throw StatsError("k must be between 2 and " + std::to_string(kMaxK));
  Glogue g;
  g.k_ = k;
  g.type_freq_ = type_frequencies(graph);
  g.observed_ = extract_schema(graph);

  std::vector<std::string> vtypes(g.observed_.vertex_types().begin(),
                                  g.observed_.vertex_types().end());
  const auto& triplets = g.observed_.edge_triplets();

  for (int n = 1; n <= k; ++n) {
    // All typings of n positions; canonical dedup folds symmetric ones.
    std::vector<size_t> typing(static_cast<size_t>(n), 0);
    bool done = vtypes.empty();
    while (!done) {
      std::vector<Slot> slots;
      for (size_t i = 0; i < typing.size(); ++i) {
        for (size_t j = 0; j < typing.size(); ++j) {
          for (const auto& t : triplets) {
            if (t.src_type == vtypes[typing[i]] &&
                t.dst_type == vtypes[typing[j]])
              slots.push_back(Slot{i, j, t.edge_type});
          }
        }
      }
      enumerate_subsets(
          slots, static_cast<size_t>(n),
          [&](const std::vector<size_t>& chosen) {
            PatternGraph p;
            for (size_t i = 0; i < typing.size(); ++i)
              p.vertices.push_back(PatternVertex{
                  "v" + std::to_string(i),
                  TypeConstraint::basic(vtypes[typing[i]]), nullptr});
            int eidx = 0;
            for (size_t s : chosen) {
              p.edges.push_back(PatternEdge{
                  "e" + std::to_string(eidx++), "v" + std::to_string(slots[s].src),
                  "v" + std::to_string(slots[s].dst), EdgeDir::Out,
                  TypeConstraint::basic(slots[s].type), nullptr});
            }
            CanonicalCode code = canonicalize(p);
            if (g.patterns_.count(code)) return;
            int64_t freq = count_homomorphisms(p, graph);
            if (freq > 0) g.patterns_[code] = freq;
            else g.patterns_[code] = 0;  // cached to avoid re-counting
          },
          1u << 22);

      // next typing
      size_t pos = 0;
      while (pos < typing.size()) {
        if (++typing[pos] < vtypes.size()) break;
        typing[pos] = 0;
        ++pos;
      }
      if (pos == typing.size()) done = true;
    }
  }
  // Drop zero-frequency entries from the final store.
  for (auto it = g.patterns_.begin(); it != g.patterns_.end();) {
    it = it->second == 0 ? g.patterns_.erase(it) : std::next(it);
  }
  return g;
}

std::string Glogue::to_json() const {
  nlohmann::json jpat = nlohmann::json::array();
  for (const auto& [code, freq] : patterns_)
    jpat.push_back(nlohmann::json{{"code", code_to_base64(code)},
                                  {"freq", freq}});
  nlohmann::json jvf = nlohmann::json::object();
  for (const auto& [t, c] : type_freq_.vertex_counts) jvf[t] = c;
  nlohmann::json jef = nlohmann::json::object();
  for (const auto& [t, c] : type_freq_.triplet_counts) jef[t.to_string()] = c;
  nlohmann::json j{
      {"k", k_},
      {"type_freq", nlohmann::json{{"vertices", jvf}, {"edges", jef}}},
      {"patterns", jpat}};
  return j.dump(2);
}

Glogue Glogue::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw StatsError(std::string("stats JSON parse error: ") + e.what());
  }
  Glogue g;
  g.k_ = j.at("k").get<int>();
  for (const auto& [t, c] : j.at("type_freq").at("vertices").items()) {
    g.type_freq_.vertex_counts[t] = c.get<int64_t>();
    g.observed_.add_vertex_type(t);
  }
  for (const auto& [t, c] : j.at("type_freq").at("edges").items()) {
    auto p1 = t.find('|');
    auto p2 = t.rfind('|');
    if (p1 == std::string::npos || p2 == p1)
      throw StatsError("bad triplet key: " + t);
    EdgeTriplet trip{t.substr(0, p1), t.substr(p1 + 1, p2 - p1 - 1),
                     t.substr(p2 + 1)};
    g.type_freq_.triplet_counts[trip] = c.get<int64_t>();
    g.observed_.add_edge_triplet(trip);
  }
  for (const auto& jp : j.value("patterns", nlohmann::json::array()))
    g.patterns_[code_from_base64(jp.at("code").get<std::string>())] =
        jp.at("freq").get<int64_t>();
  return g;
}

void Glogue::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw StatsError("cannot write stats file: " + path);
  out << to_json();
}

Glogue Glogue::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StatsError("cannot open stats file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

// --- pattern helpers ---

bool pattern_is_basic(const PatternGraph& p) {
  for (const auto& v : p.vertices)
    if (!v.types.is_basic()) return false;
  for (const auto& e : p.edges)
    if (!e.types.is_basic()) return false;
  return true;
}

bool pattern_has_both_edges(const PatternGraph& p) {
  return std::any_of(p.edges.begin(), p.edges.end(),
                     [](const PatternEdge& e) { return e.is_both(); });
}

bool pattern_has_duplicate_slots(const PatternGraph& p) {
  std::set<std::string> seen;
  for (const auto& e : p.edges) {
    for (const auto& t : e.types.names()) {
      std::string key = e.src() + ">" + e.dst() + ">" + t;
      if (!seen.insert(key).second) return true;
    }
    if (e.types.is_all()) return true;  // conservatively ambiguous
  }
  return false;
}

std::vector<std::string> peelable_vertices(const PatternGraph& p) {
  std::vector<std::pair<size_t, std::string>> cands;
  if (p.vertices.size() < 2) return {};
  for (const auto& v : p.vertices) {
    PatternGraph rest = remove_vertex(p, v.alias);
    if (rest.vertices.empty() || !rest.connected()) continue;
    cands.emplace_back(p.incident_edges(v.alias).size(), v.alias);
  }
  std::sort(cands.begin(), cands.end());
  std::vector<std::string> out;
  for (auto& [deg, alias] : cands) out.push_back(alias);
  return out;
}

PatternGraph remove_vertex(const PatternGraph& p, const std::string& alias) {
  PatternGraph out;
  for (const auto& v : p.vertices)
    if (v.alias != alias) out.vertices.push_back(v);
  for (const auto& e : p.edges)
    if (e.from != alias && e.to != alias) out.edges.push_back(e);
  return out;
}

// --- GlogueQuery ---

void GlogueQuery::diag(const std::string& message) const {
  std::lock_guard<std::mutex> lock(mu_);
  diagnostics_.push_back(message);
}

std::vector<std::string> GlogueQuery::take_diagnostics() const {
  std::lock_guard<std::mutex> lock(mu_);
  auto out = std::move(diagnostics_);
  diagnostics_.clear();
  return out;
}

double GlogueQuery::vertex_type_sum(const TypeConstraint& c) const {
  double total = 0;
  for (const auto& t : c.resolve(schema_.vertex_types()))
    total += static_cast<double>(glogue_.type_freq().vertex_freq(t));
  return total;
}

double GlogueQuery::edge_name_sum(const TypeConstraint& c) const {
  double total = 0;
  for (const auto& t : c.resolve(schema_.edge_type_names()))
    total += static_cast<double>(glogue_.type_freq().edge_name_freq(t));
  return total;
}

double GlogueQuery::expand_ratio(const TypeConstraint& edge_types,
                                 const TypeConstraint& vi_types,
                                 const TypeConstraint& v_types, bool v_in_pi,
                                 bool both_dir) const {
  double num = edge_name_sum(edge_types) * (both_dir ? 2.0 : 1.0);
  double den = vertex_type_sum(vi_types);
  if (v_in_pi) den *= vertex_type_sum(v_types);
  if (den <= 0) {
    diag("expand ratio has zero denominator; element unrealizable");
    return 0.0;
  }
  return num / den;
}

double GlogueQuery::single_edge_freq(const PatternGraph& p) const {
  const PatternEdge& e = p.edges[0];
  const PatternVertex* s = p.find_vertex(e.src());
  const PatternVertex* d = p.find_vertex(e.dst());
  auto src_set = s->types.resolve(schema_.vertex_types());
  auto dst_set = d->types.resolve(schema_.vertex_types());
  auto names = e.types.resolve(schema_.edge_type_names());
  double total = 0;
  for (const auto& trip : schema_.edge_triplets()) {
    if (!names.count(trip.edge_type)) continue;
    bool fwd = src_set.count(trip.src_type) && dst_set.count(trip.dst_type);
    bool rev = e.is_both() && dst_set.count(trip.src_type) &&
               src_set.count(trip.dst_type);
    if (fwd)
      total += static_cast<double>(glogue_.type_freq().triplet_freq(trip));
    if (rev)
      total += static_cast<double>(glogue_.type_freq().triplet_freq(trip));
  }
  return total;
}

double GlogueQuery::decompose_freq(const PatternGraph& p) const {
  if (p.vertices.size() == 1) {
    // Self-loop bundle: first loop estimated exactly, the rest close with
    // the paper's closing ratio.
    std::vector<const PatternEdge*> loops;
    for (const auto& e : p.edges) loops.push_back(&e);
    std::sort(loops.begin(), loops.end(),
              [](const PatternEdge* a, const PatternEdge* b) {
                return a->alias < b->alias;
              });
    PatternGraph first;
    first.vertices = p.vertices;
    first.edges.push_back(*loops[0]);
    double f = single_edge_freq(first);
    const TypeConstraint& vt = p.vertices[0].types;
    for (size_t i = 1; i < loops.size(); ++i)
      f *= expand_ratio(loops[i]->types, vt, vt, true, loops[i]->is_both());
    return f;
  }
  auto peels = peelable_vertices(p);
  if (peels.empty())
    throw StatsError("cannot decompose pattern (disconnected input?)");
  const std::string& victim = peels.front();
  PatternGraph rest = remove_vertex(p, victim);
  double base = struct_freq(rest);

  // σ product over the removed edges; exactly one edge (the first by written
  // order after sorting by its open-form ratio) uses the opening form.
  struct Removed {
    const PatternEdge* e;
    double open_ratio;
    bool self_loop;
  };
  std::vector<Removed> removed;
  for (const auto& e : p.edges) {
    if (e.from != victim && e.to != victim) continue;
    bool self_loop = e.from == e.to;
    const std::string vi = self_loop ? victim : (e.from == victim ? e.to : e.from);
    double open = expand_ratio(e.types, p.find_vertex(vi)->types,
                               p.find_vertex(victim)->types, false,
                               e.is_both());
    removed.push_back(Removed{&e, open, self_loop});
  }
  // A self-loop on the new vertex can never be the opening edge.
  std::sort(removed.begin(), removed.end(),
            [](const Removed& a, const Removed& b) {
              if (a.self_loop != b.self_loop) return b.self_loop;
              return a.open_ratio != b.open_ratio
                         ? a.open_ratio < b.open_ratio
                         : a.e->alias < b.e->alias;
            });
  double product = 1.0;
  bool victim_present = false;
  for (const auto& r : removed) {
    const std::string vi =
        r.self_loop ? victim
                    : (r.e->from == victim ? r.e->to : r.e->from);
    bool closing = victim_present || r.self_loop;
    product *= expand_ratio(r.e->types, p.find_vertex(vi)->types,
                            p.find_vertex(victim)->types, closing,
                            r.e->is_both());
    victim_present = true;
  }
  return base * product;
}

double GlogueQuery::struct_freq(const PatternGraph& p) const {
  if (p.vertices.empty()) return 0.0;
  CanonicalCode code = encode_pattern(p, /*include_predicates=*/false);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = memo_.find(code);
    if (it != memo_.end()) return it->second;
  }

  double result = 0.0;
  if (p.edges.empty()) {
    // Independence product; covers single vertices and bound anchor sets.
    result = 1.0;
    for (const auto& v : p.vertices) result *= vertex_type_sum(v.types);
  } else if (p.edges.size() == 1) {
    result = single_edge_freq(p);
  } else if (pattern_is_basic(p) && !pattern_has_both_edges(p) &&
             !pattern_has_duplicate_slots(p) &&
             p.vertices.size() <= static_cast<size_t>(glogue_.k())) {
    result = static_cast<double>(glogue_.lookup(canonicalize(p)));
  } else {
    result = decompose_freq(p);
  }

  if (result == 0.0) {
    bool zero_type = false;
    for (const auto& v : p.vertices)
      if (vertex_type_sum(v.types) == 0) zero_type = true;
    if (zero_type) diag("pattern element has zero type frequency");
  }

  std::lock_guard<std::mutex> lock(mu_);
  memo_[code] = result;
  return result;
}

double GlogueQuery::get_freq(const PatternGraph& pattern) const {
  for (const auto& v : pattern.vertices) {
    if (v.types.resolve(schema_.vertex_types()).empty())
      throw StatsError("vertex " + v.alias +
                       " has an empty resolved constraint; run type "
                       "inference first");
  }
  for (const auto& e : pattern.edges) {
    if (e.types.resolve(schema_.edge_type_names()).empty())
      throw StatsError("edge " + e.alias +
                       " has an empty resolved constraint; run type "
                       "inference first");
  }
  double f = struct_freq(pattern);
  int predicated = 0;
  for (const auto& v : pattern.vertices)
    if (v.predicate) ++predicated;
  for (const auto& e : pattern.edges)
    if (e.predicate) ++predicated;
  for (int i = 0; i < predicated; ++i) f *= 0.1;
  return f;
}

double GlogueQuery::join_frequency(
    const PatternGraph& pattern,
    const std::set<std::string>& side1_edges) const {
  PatternGraph p1, p2;
  std::set<std::string> v1, v2;
  for (const auto& e : pattern.edges) {
    bool in1 = side1_edges.count(e.alias) > 0;
    (in1 ? p1 : p2).edges.push_back(e);
    (in1 ? v1 : v2).insert(e.from);
    (in1 ? v1 : v2).insert(e.to);
  }
  for (const auto& v : pattern.vertices) {
    if (v1.count(v.alias)) p1.vertices.push_back(v);
    if (v2.count(v.alias)) p2.vertices.push_back(v);
  }
  double f1 = struct_freq(p1);
  double f2 = struct_freq(p2);
  double inter = 1.0;
  for (const auto& v : pattern.vertices)
    if (v1.count(v.alias) && v2.count(v.alias))
      inter *= vertex_type_sum(v.types);
  if (inter <= 0) {
    diag("join intersection has zero frequency");
    return 0.0;
  }
  return f1 * f2 / inter;
}

}  // namespace gopt
