#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "gopt/value.hpp"

namespace gopt {

class DataGraph;

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };
enum class BoolOp { And, Or };
enum class ArithOp { Add, Sub, Mul, Div };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Immutable expression tree. Evaluation is total: an unresolved tag or a
// missing property raises EvalError instead of producing a null.
struct Expr {
  enum class Kind { Literal, Property, TagRef, Cmp, Bool, Not, In, Arith, Neg };

  Kind kind;
  PropertyValue literal;          // Literal
  std::string tag;                // Property, TagRef
  std::string prop;               // Property
  CmpOp cmp_op = CmpOp::Eq;       // Cmp
  BoolOp bool_op = BoolOp::And;   // Bool
  ArithOp arith_op = ArithOp::Add;  // Arith
  std::vector<ExprPtr> args;      // children

  static ExprPtr lit(PropertyValue v);
  static ExprPtr property(std::string tag, std::string prop);
  static ExprPtr tag_ref(std::string tag);
  static ExprPtr cmp(CmpOp op, ExprPtr lhs, ExprPtr rhs);
  static ExprPtr logic(BoolOp op, ExprPtr lhs, ExprPtr rhs);
  static ExprPtr negate(ExprPtr inner);  // logical NOT
  static ExprPtr in_list(ExprPtr needle, ExprPtr haystack);
  static ExprPtr arith(ArithOp op, ExprPtr lhs, ExprPtr rhs);
  static ExprPtr neg(ExprPtr inner);  // arithmetic negation

  // All tags referenced anywhere in the tree.
  void collect_tags(std::set<std::string>& out) const;
  // Property names accessed per tag.
  void collect_props(std::map<std::string, std::set<std::string>>& out) const;

  bool equals(const Expr& o) const;
  std::string to_string() const;

  // Splits a top-level conjunction into its conjuncts.
  static std::vector<ExprPtr> split_and(const ExprPtr& e);
  static ExprPtr join_and(const std::vector<ExprPtr>& conjuncts);
};

std::set<std::string> expr_tags(const ExprPtr& e);

// Parses the textual expression grammar used by queries and plan files.
ExprPtr parse_expr_text(const std::string& text);

}  // namespace gopt
