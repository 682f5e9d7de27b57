#include "gopt/pattern.hpp"

#include <algorithm>
#include <map>

namespace gopt {

const char* to_string(EdgeDir d) {
  switch (d) {
    case EdgeDir::Out: return "out";
    case EdgeDir::In: return "in";
    case EdgeDir::Both: return "both";
  }
  return "?";
}

const char* to_string(PathOpt o) {
  switch (o) {
    case PathOpt::Arbitrary: return "arbitrary";
    case PathOpt::Simple: return "simple";
    case PathOpt::Trail: return "trail";
  }
  return "?";
}

PatternVertex* PatternGraph::find_vertex(const std::string& alias) {
  for (auto& v : vertices)
    if (v.alias == alias) return &v;
  return nullptr;
}

const PatternVertex* PatternGraph::find_vertex(const std::string& alias) const {
  for (const auto& v : vertices)
    if (v.alias == alias) return &v;
  return nullptr;
}

PatternEdge* PatternGraph::find_edge(const std::string& alias) {
  for (auto& e : edges)
    if (e.alias == alias) return &e;
  return nullptr;
}

const PatternEdge* PatternGraph::find_edge(const std::string& alias) const {
  for (const auto& e : edges)
    if (e.alias == alias) return &e;
  return nullptr;
}

bool PatternGraph::has_alias(const std::string& alias) const {
  return find_vertex(alias) || find_edge(alias);
}

std::vector<const PatternEdge*> PatternGraph::incident_edges(
    const std::string& v) const {
  std::vector<const PatternEdge*> out;
  for (const auto& e : edges)
    if (e.from == v || e.to == v) out.push_back(&e);
  return out;
}

std::vector<std::string> PatternGraph::all_aliases() const {
  std::vector<std::string> out;
  for (const auto& v : vertices) out.push_back(v.alias);
  std::sort(out.begin(), out.end());
  std::vector<std::string> es;
  for (const auto& e : edges) es.push_back(e.alias);
  std::sort(es.begin(), es.end());
  out.insert(out.end(), es.begin(), es.end());
  return out;
}

bool PatternGraph::connected() const {
  if (vertices.empty()) return false;
  if (vertices.size() == 1) return true;
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& e : edges) {
    adj[e.from].push_back(e.to);
    adj[e.to].push_back(e.from);
  }
  std::set<std::string> seen;
  std::vector<std::string> stack{vertices[0].alias};
  while (!stack.empty()) {
    std::string cur = stack.back();
    stack.pop_back();
    if (!seen.insert(cur).second) continue;
    for (const auto& next : adj[cur]) stack.push_back(next);
  }
  return seen.size() == vertices.size();
}

void PatternGraph::validate() const {
  std::set<std::string> aliases;
  for (const auto& v : vertices) {
    if (!aliases.insert(v.alias).second)
      throw PatternError("duplicate alias in pattern: " + v.alias);
  }
  for (const auto& e : edges) {
    if (!aliases.insert(e.alias).second)
      throw PatternError("duplicate alias in pattern: " + e.alias);
    if (!find_vertex(e.from) || !find_vertex(e.to))
      throw PatternError("edge " + e.alias + " references unknown vertex");
  }
  if (!connected())
    throw PatternError("pattern is not connected");
}

}  // namespace gopt
