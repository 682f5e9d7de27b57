#pragma once

#include <string>

#include "gopt/gir.hpp"

namespace gopt {

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(const std::string& message, int line, int col)
      : std::runtime_error(message + " (line " + std::to_string(line) +
                           ", col " + std::to_string(col) + ")"),
        line(line),
        col(col) {}
  int line;
  int col;
};

// Parses a query in the Cypher-flavored mini language into a GirPlan.
//
//   query       := matchClause+ ("WHERE" expr)? "RETURN" retItem ("," retItem)*
//                  ("ORDER" "BY" ordItem ("," ordItem)*)? ("LIMIT" INT)?
//   matchClause := "OPTIONAL"? "MATCH" path ("," path)*
//   path        := node (edge node)*
//   node        := "(" IDENT? (":" IDENT ("|" IDENT)*)? mapProps? ")"
//   edge        := "-[" body "]->" | "<-[" body "]-" | "-[" body "]-"
//   body        := IDENT? (":" IDENT ("|" IDENT)*)? ("*" INT)? mapProps?
//   retItem     := expr ("AS" IDENT)? | aggFn "(" "DISTINCT"? expr ")"
//                  ("AS" IDENT)?
//
// Keywords are case-insensitive; identifiers are case-sensitive. Map props
// desugar into equality predicates on the element.
GirPlan parse_query(const std::string& text,
                    Semantics semantics = Semantics::Homomorphism);

}  // namespace gopt
