#pragma once

#include <variant>

#include "gopt/pattern.hpp"

namespace gopt {

struct InferenceValid {
  PatternGraph pattern;  // constraints narrowed to schema-consistent sets
};

struct InferenceInvalid {
  std::string offending_alias;
};

using InferenceResult = std::variant<InferenceValid, InferenceInvalid>;

bool is_valid(const InferenceResult& r);
const PatternGraph& valid_pattern(const InferenceResult& r);
const std::string& invalid_alias(const InferenceResult& r);

// Narrows every vertex and edge constraint of the pattern against the
// schema's triplet connectivity with a worklist fixpoint, or reports the
// first element whose constraint set becomes empty.
InferenceResult infer_types(const PatternGraph& pattern,
                            const GraphSchema& schema);

}  // namespace gopt
