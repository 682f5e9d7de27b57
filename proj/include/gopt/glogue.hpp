#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <vector>

#include "gopt/canonical.hpp"
#include "gopt/graph.hpp"
#include "gopt/pattern.hpp"

namespace gopt {

class StatsError : public std::runtime_error {
 public:
  explicit StatsError(const std::string& what) : std::runtime_error(what) {}
};

// Exact homomorphism count of a basic-typed, directed pattern. Counting
// only; edge bindings are folded into multiplicity products.
int64_t count_homomorphisms(const PatternGraph& pattern,
                            const DataGraph& graph);

// Frequencies of all connected basic-type patterns with up to k vertices
// (no repeated (src,dst,type) slot), plus low-order type frequencies.
class Glogue {
 public:
  static constexpr int kMaxK = 4;

  static Glogue build(const DataGraph& graph, int k);

  int k() const { return k_; }
  const TypeFrequencyTable& type_freq() const { return type_freq_; }
  const GraphSchema& observed_schema() const { return observed_; }
  const std::map<CanonicalCode, int64_t>& patterns() const {
    return patterns_;
  }

  int64_t lookup(const CanonicalCode& code) const {
    auto it = patterns_.find(code);
    return it == patterns_.end() ? 0 : it->second;
  }

  std::string to_json() const;
  static Glogue from_json(const std::string& text);
  void save(const std::string& path) const;
  static Glogue load(const std::string& path);

 private:
  int k_ = 0;
  TypeFrequencyTable type_freq_;
  GraphSchema observed_;
  std::map<CanonicalCode, int64_t> patterns_;
};

// Cardinality estimation over a Glogue for patterns with arbitrary type
// constraints. Thread-safe for concurrent readers.
class GlogueQuery {
 public:
  explicit GlogueQuery(const Glogue& glogue,
                       const GraphSchema* schema = nullptr)
      : glogue_(glogue), schema_(schema ? *schema : glogue.observed_schema()) {}

  // Estimated pattern frequency, including the fixed 0.1 selectivity per
  // predicated element.
  double get_freq(const PatternGraph& pattern) const;

  // Structure-only estimate (no predicate selectivity).
  double struct_freq(const PatternGraph& pattern) const;

  // Expand ratio for appending an edge with the given constraints from a
  // subpattern vertex (types vi) toward vertex v (types tv). `v_in_pi`
  // selects the closing-edge form; `both_dir` doubles the numerator for
  // undirected pattern edges.
  double expand_ratio(const TypeConstraint& edge_types,
                      const TypeConstraint& vi_types,
                      const TypeConstraint& v_types, bool v_in_pi,
                      bool both_dir = false) const;

  // Join-frequency estimate F(P1)*F(P2)/F(P1 ∩ P2) for an edge bipartition
  // of `pattern` given by the edge aliases of the first side.
  double join_frequency(const PatternGraph& pattern,
                        const std::set<std::string>& side1_edges) const;

  const GraphSchema& schema() const { return schema_; }
  const Glogue& glogue() const { return glogue_; }

  std::vector<std::string> take_diagnostics() const;

 private:
  double vertex_type_sum(const TypeConstraint& c) const;
  double edge_name_sum(const TypeConstraint& c) const;
  double single_edge_freq(const PatternGraph& p) const;
  double decompose_freq(const PatternGraph& p) const;
  void diag(const std::string& message) const;

  const Glogue& glogue_;
  GraphSchema schema_;
  mutable std::mutex mu_;
  mutable std::map<CanonicalCode, double> memo_;
  mutable std::vector<std::string> diagnostics_;
};

// Helpers shared with the optimizer.
bool pattern_is_basic(const PatternGraph& p);
bool pattern_has_both_edges(const PatternGraph& p);
bool pattern_has_duplicate_slots(const PatternGraph& p);
// Vertices whose removal keeps the remaining pattern connected and
// non-empty, sorted by (degree, alias).
std::vector<std::string> peelable_vertices(const PatternGraph& p);
// The pattern minus one vertex and its incident edges.
PatternGraph remove_vertex(const PatternGraph& p, const std::string& alias);

}  // namespace gopt
