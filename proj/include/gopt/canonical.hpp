#pragma once

#include <string>

#include "gopt/pattern.hpp"

namespace gopt {

// A byte string identifying a pattern up to isomorphism: the minimal
// encoding of (vertex constraints, typed directed edges) over all vertex
// permutations. Patterns are tiny, so exhaustive minimization is fine.
using CanonicalCode = std::string;

// Encodes any pattern, including Union/All constraints and Both edges.
CanonicalCode encode_pattern(const PatternGraph& pattern,
                             bool include_predicates = false);

// The spec'd entry point for statistics keys: basic constraints only.
// Throws PatternError on a non-basic constraint.
CanonicalCode canonicalize(const PatternGraph& pattern);

std::string code_to_base64(const CanonicalCode& code);
CanonicalCode code_from_base64(const std::string& text);

}  // namespace gopt
