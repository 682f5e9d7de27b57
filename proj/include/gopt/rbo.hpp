#pragma once

#include <functional>

#include "gopt/cbo.hpp"
#include "gopt/gir.hpp"
#include "gopt/physical.hpp"

namespace gopt {

// A heuristic rewrite: fires at most once per apply call (the strategy
// loop reapplies to fixpoint) and only under the listed semantics.
struct Rule {
  std::string name;
  std::set<Semantics> semantics_gate;  // empty: any
  std::function<bool(GirPlan&)> apply;  // returns whether it changed the plan
};

struct Strategy {
  std::string name;
  std::vector<Rule> rules;
};

// Strategies applied in listed (topological) order, each to fixpoint.
struct StrategyDag {
  std::vector<Strategy> strategies;
};

// The default logical-stage DAG, restricted to the enabled rule names.
StrategyDag default_logical_dag(const std::set<std::string>& enabled);

extern const std::vector<std::string> kLogicalRuleNames;
extern const std::vector<std::string> kPhysicalRuleNames;
extern const std::vector<std::string> kAllRuleNames;

struct ApplyResult {
  GirPlan plan;
  std::vector<std::string> trace;  // rule names, in firing order
};

ApplyResult apply(const GirPlan& plan, const StrategyDag& dag);

// Individual logical rules (single firing; false when nothing matched).
bool filter_into_join(GirPlan& plan);
bool filter_into_pattern(GirPlan& plan);
bool field_trim(GirPlan& plan);
bool join_to_pattern(GirPlan& plan);
bool com_sub_pattern(GirPlan& plan);

// Physical-stage rules; single pass each, gated by the backend profile.
// Appends fired rule names to `trace`.
void apply_physical_rules(PhysPlan& plan, const GraphSchema& schema,
                          const BackendProfile& backend,
                          const std::set<std::string>& enabled,
                          std::vector<std::string>* trace = nullptr);

bool ev_fusion(PhysPlan& plan, const GraphSchema& schema);
bool deg_fusion(PhysPlan& plan);
bool pk_index(PhysPlan& plan, const BackendProfile& backend);
bool late_project(PhysPlan& plan, const BackendProfile& backend);

// Drops unreachable nodes and renumbers ids in topological order.
GirPlan compact(const GirPlan& plan);

}  // namespace gopt
