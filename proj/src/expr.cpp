#include "gopt/expr.hpp"

#include <map>

namespace gopt {

namespace {

ExprPtr make(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

const char* cmp_str(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "<>";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "?";
}

const char* arith_str(ArithOp op) {
  switch (op) {
    case ArithOp::Add: return "+";
    case ArithOp::Sub: return "-";
    case ArithOp::Mul: return "*";
    case ArithOp::Div: return "/";
  }
  return "?";
}

// Precedence for printing: higher binds tighter.
int precedence(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Bool:
      return e.bool_op == BoolOp::Or ? 1 : 2;
    case Expr::Kind::Not:
      return 3;
    case Expr::Kind::Cmp:
    case Expr::Kind::In:
      return 4;
    case Expr::Kind::Arith:
      return e.arith_op == ArithOp::Add || e.arith_op == ArithOp::Sub ? 5 : 6;
    case Expr::Kind::Neg:
      return 7;
    default:
      return 8;
  }
}

std::string print_child(const Expr& parent, const Expr& child) {
  std::string s = child.to_string();
  if (precedence(child) < precedence(parent)) return "(" + s + ")";
  // Same-precedence right children need parens for non-associative chains.
  return s;
}

}  // namespace

ExprPtr Expr::lit(PropertyValue v) {
  Expr e;
  e.kind = Kind::Literal;
  e.literal = std::move(v);
  return make(std::move(e));
}

ExprPtr Expr::property(std::string tag, std::string prop) {
  Expr e;
  e.kind = Kind::Property;
  e.tag = std::move(tag);
  e.prop = std::move(prop);
  return make(std::move(e));
}

ExprPtr Expr::tag_ref(std::string tag) {
  Expr e;
  e.kind = Kind::TagRef;
  e.tag = std::move(tag);
  return make(std::move(e));
}

ExprPtr Expr::cmp(CmpOp op, ExprPtr lhs, ExprPtr rhs) {
  Expr e;
  e.kind = Kind::Cmp;
  e.cmp_op = op;
  e.args = {std::move(lhs), std::move(rhs)};
  return make(std::move(e));
}

ExprPtr Expr::logic(BoolOp op, ExprPtr lhs, ExprPtr rhs) {
  Expr e;
  e.kind = Kind::Bool;
  e.bool_op = op;
  e.args = {std::move(lhs), std::move(rhs)};
  return make(std::move(e));
}

ExprPtr Expr::negate(ExprPtr inner) {
  Expr e;
  e.kind = Kind::Not;
  e.args = {std::move(inner)};
  return make(std::move(e));
}

ExprPtr Expr::in_list(ExprPtr needle, ExprPtr haystack) {
  Expr e;
  e.kind = Kind::In;
  e.args = {std::move(needle), std::move(haystack)};
  return make(std::move(e));
}

ExprPtr Expr::arith(ArithOp op, ExprPtr lhs, ExprPtr rhs) {
  Expr e;
  e.kind = Kind::Arith;
  e.arith_op = op;
  e.args = {std::move(lhs), std::move(rhs)};
  return make(std::move(e));
}

ExprPtr Expr::neg(ExprPtr inner) {
  Expr e;
  e.kind = Kind::Neg;
  e.args = {std::move(inner)};
  return make(std::move(e));
}

void Expr::collect_tags(std::set<std::string>& out) const {
  if (kind == Kind::Property || kind == Kind::TagRef) out.insert(tag);
  for (const auto& a : args) a->collect_tags(out);
}

void Expr::collect_props(
    std::map<std::string, std::set<std::string>>& out) const {
  if (kind == Kind::Property) out[tag].insert(prop);
  for (const auto& a : args) a->collect_props(out);
}

bool Expr::equals(const Expr& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case Kind::Literal:
      if (literal.kind() != o.literal.kind() || literal != o.literal)
        return false;
      break;
    case Kind::Property:
      if (tag != o.tag || prop != o.prop) return false;
      break;
    case Kind::TagRef:
      if (tag != o.tag) return false;
      break;
    case Kind::Cmp:
      if (cmp_op != o.cmp_op) return false;
      break;
    case Kind::Bool:
      if (bool_op != o.bool_op) return false;
      break;
    case Kind::Arith:
      if (arith_op != o.arith_op) return false;
      break;
    default:
      break;
  }
  if (args.size() != o.args.size()) return false;
  for (size_t i = 0; i < args.size(); ++i)
    if (!args[i]->equals(*o.args[i])) return false;
  return true;
}

std::string Expr::to_string() const {
  switch (kind) {
    case Kind::Literal:
      return literal.to_string();
    case Kind::Property:
      return tag + "." + prop;
    case Kind::TagRef:
      return tag;
    case Kind::Cmp:
      return print_child(*this, *args[0]) + " " + cmp_str(cmp_op) + " " +
             print_child(*this, *args[1]);
    case Kind::Bool:
      return print_child(*this, *args[0]) +
             (bool_op == BoolOp::And ? " AND " : " OR ") +
             print_child(*this, *args[1]);
    case Kind::Not:
      return "NOT " + print_child(*this, *args[0]);
    case Kind::In:
      return print_child(*this, *args[0]) + " IN " +
             print_child(*this, *args[1]);
    case Kind::Arith: {
      std::string rhs = args[1]->to_string();
      if (precedence(*args[1]) <= precedence(*this)) rhs = "(" + rhs + ")";
      return print_child(*this, *args[0]) + " " + arith_str(arith_op) + " " +
             rhs;
    }
    case Kind::Neg:
      return "-" + print_child(*this, *args[0]);
  }
  return "?";
}

std::vector<ExprPtr> Expr::split_and(const ExprPtr& e) {
  if (e->kind == Kind::Bool && e->bool_op == BoolOp::And) {
    auto lhs = split_and(e->args[0]);
    auto rhs = split_and(e->args[1]);
    lhs.insert(lhs.end(), rhs.begin(), rhs.end());
    return lhs;
  }
  return {e};
}

ExprPtr Expr::join_and(const std::vector<ExprPtr>& conjuncts) {
  if (conjuncts.empty()) return nullptr;
  ExprPtr out = conjuncts[0];
  for (size_t i = 1; i < conjuncts.size(); ++i)
    out = Expr::logic(BoolOp::And, out, conjuncts[i]);
  return out;
}

std::set<std::string> expr_tags(const ExprPtr& e) {
  std::set<std::string> tags;
  if (e) e->collect_tags(tags);
  return tags;
}

}  // namespace gopt
