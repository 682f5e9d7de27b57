#pragma once

#include <memory>
#include <optional>

#include "gopt/glogue.hpp"
#include "gopt/pattern.hpp"

namespace gopt {

// One step in the PatternJoin transformation space.
struct Transformation {
  enum class Kind { VertexExpansion, BinaryJoin };
  Kind kind = Kind::VertexExpansion;

  // VertexExpansion: the vertex grown last, via `edges`. When `loop_close`
  // is set the vertex stays in the source subpattern and `edges` are its
  // self-loops.
  std::string vertex;
  std::vector<std::string> edges;
  bool loop_close = false;

  // BinaryJoin: edge bipartition and the shared-vertex join key.
  std::set<std::string> side1;
  std::set<std::string> side2;
  std::vector<std::string> keys;
};

struct BackendProfile {
  enum class ExpandStyle { Into, Intersect };

  std::string name;
  bool distributed = false;
  ExpandStyle expand_style = ExpandStyle::Into;
  std::map<std::string, double> alpha;  // per-op factors, default 1.0
  // Primary key property per vertex type; "*" applies to every type.
  std::map<std::string, std::string> primary_keys;

  double alpha_of(const std::string& op) const {
    auto it = alpha.find(op);
    return it == alpha.end() ? 1.0 : it->second;
  }
  const std::string* pk_for(const std::string& vertex_type) const {
    auto it = primary_keys.find(vertex_type);
    if (it != primary_keys.end()) return &it->second;
    it = primary_keys.find("*");
    return it == primary_keys.end() ? nullptr : &it->second;
  }

  static BackendProfile into_profile();
  static BackendProfile intersect_profile();
  static BackendProfile by_name(const std::string& name);
};

// A subpattern of a fixed parent pattern, identified by alias sets.
struct SubPattern {
  std::set<std::string> verts;
  std::set<std::string> edges;

  std::string key() const;
  bool operator==(const SubPattern&) const = default;
};

// Materializes the subpattern view (constraints, predicates, endpoints).
PatternGraph subpattern_view(const PatternGraph& parent, const SubPattern& s);

// All candidate transformations producing `sub` from smaller subpatterns.
// With a non-empty anchor set, only vertex expansions that keep anchors in
// the source side are produced.
std::vector<Transformation> get_cands(const PatternGraph& parent,
                                      const SubPattern& sub,
                                      const std::set<std::string>& anchors = {});
std::vector<Transformation> get_cands(const PatternGraph& pattern);

// Search plan tree; lowered to physical operators by the pipeline.
struct CboStep;
using CboStepPtr = std::shared_ptr<const CboStep>;
struct CboStep {
  enum class Kind { Scan, Anchor, Expand, Join };
  Kind kind = Kind::Scan;
  std::string scan_vertex;
  CboStepPtr sub;    // Expand
  CboStepPtr left;   // Join
  CboStepPtr right;  // Join
  Transformation trans;
  SubPattern covers;  // the subpattern this step produces

  std::string serialize() const;
};

// The order an expansion appends its edges: ascending opening ratio, with
// already-bound closes last. Shared by the cost model and the lowering.
std::vector<std::string> expansion_edge_order(const GlogueQuery& gq,
                                              const PatternGraph& parent,
                                              const Transformation& t);

double cost_join(const GlogueQuery& gq, const PatternGraph& p1,
                 const PatternGraph& p2, const BackendProfile& backend);
// Expansion edges are priced in ascending open-ratio order.
double cost_expand_into(const GlogueQuery& gq, const PatternGraph& parent,
                        const SubPattern& source, const Transformation& t,
                        const BackendProfile& backend);
double cost_expand_intersect(const GlogueQuery& gq, const PatternGraph& parent,
                             const SubPattern& source, const Transformation& t,
                             const BackendProfile& backend);

struct OptimizeResult {
  CboStepPtr plan;
  double cost = 0;
  int64_t explored = 0;  // candidate evaluations
};

OptimizeResult greedy_initial(const PatternGraph& pattern,
                              const GlogueQuery& gq,
                              const BackendProfile& backend,
                              const std::set<std::string>& anchors = {});

OptimizeResult optimize_pattern(const PatternGraph& pattern,
                                const GlogueQuery& gq,
                                const BackendProfile& backend,
                                bool pruning = true,
                                const std::set<std::string>& anchors = {});

}  // namespace gopt
