#pragma once

#include <optional>

#include "gopt/executor.hpp"
#include "gopt/glogue.hpp"
#include "gopt/rbo.hpp"
#include "gopt/type_inference.hpp"

namespace gopt {

struct PipelineOptions {
  const Glogue* stats = nullptr;  // null: no CBO, user-order lowering
  BackendProfile backend = BackendProfile::into_profile();
  std::set<std::string> enabled_rules =
      std::set<std::string>(kAllRuleNames.begin(), kAllRuleNames.end());
  bool pruning = true;
};

struct RunOutcome {
  ResultSet results;
  ExecStats stats;
  bool unsatisfiable = false;
  std::string diagnostic;             // set when unsatisfiable
  std::vector<std::string> rule_trace;
  GirPlan optimized_logical;
  PhysPlan physical;
};

// Optimizes a GirPlan end to end and returns the physical plan without
// executing it. Unsatisfiable patterns yield an empty physical plan and
// set the flag.
RunOutcome plan_gir(const GirPlan& plan, const DataGraph& graph,
                    const GraphSchema& schema, const PipelineOptions& options);

// Full pipeline: optimize then execute.
RunOutcome run_gir(const GirPlan& plan, const DataGraph& graph,
                   const GraphSchema& schema, const PipelineOptions& options);

// Lowers one pattern with the declared order, no statistics needed.
CboStepPtr user_order_plan(const PatternGraph& pattern,
                           const std::set<std::string>& anchors);

// Lowers a pattern search plan into physical nodes appended to `plan`.
// `input` is the id feeding anchored fragments (-1 when none) and
// `pass_through` the aliases its records already carry.
int lower_pattern(PhysPlan& plan, const PatternGraph& pattern,
                  const MatchPatternOp& op, const CboStepPtr& step,
                  const BackendProfile& backend, Semantics semantics,
                  int input, const std::set<std::string>& pass_through,
                  const GlogueQuery* gq);

}  // namespace gopt
