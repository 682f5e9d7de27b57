#include "gopt/parser.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>

namespace gopt {

namespace {

enum class Tok {
  End, Ident, Int, Float, String, Keyword,
  LParen, RParen, LBracket, RBracket, LBrace, RBrace,
  Comma, Colon, Pipe, Star, Dot,
  Dash, Arrow, LeftArrowDash,  // '-', '->', '<-'
  Eq, Ne, Lt, Le, Gt, Ge, Plus, Slash,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;      // identifier / keyword (upper-cased) / string body
  int64_t int_val = 0;
  double float_val = 0;
  int line = 1, col = 1;
};

const std::set<std::string> kKeywords = {
    "MATCH", "OPTIONAL", "WHERE",    "RETURN", "ORDER", "BY",
    "LIMIT", "AS",       "DISTINCT", "AND",    "OR",    "NOT",
    "IN",    "COUNT",    "SUM",      "AVG",    "MIN",   "MAX",
    "ASC",   "DESC",     "TRUE",     "FALSE"};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) { advance(); }

  const Token& peek() const { return cur_; }

  Token next() {
    Token t = cur_;
    advance();
    return t;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw SyntaxError(msg, cur_.line, cur_.col);
  }

 private:
  void advance() {
    skip_space();
    cur_ = Token{};
    cur_.line = line_;
    cur_.col = col_;
    if (pos_ >= text_.size()) {
      cur_.kind = Tok::End;
      return;
    }
    char c = text_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string word;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_'))
        word += take();
      std::string upper = word;
      std::transform(upper.begin(), upper.end(), upper.begin(), ::toupper);
      if (kKeywords.count(upper)) {
        cur_.kind = Tok::Keyword;
        cur_.text = upper;
      } else {
        cur_.kind = Tok::Ident;
        cur_.text = word;
      }
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string num;
      bool is_float = false;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_])))
        num += take();
      if (pos_ + 1 < text_.size() && text_[pos_] == '.' &&
          std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
        is_float = true;
        num += take();
        while (pos_ < text_.size() &&
               std::isdigit(static_cast<unsigned char>(text_[pos_])))
          num += take();
      }
      if (is_float) {
        cur_.kind = Tok::Float;
        cur_.float_val = std::stod(num);
      } else {
        cur_.kind = Tok::Int;
        cur_.int_val = std::stoll(num);
      }
      return;
    }
    if (c == '\'' || c == '"') {
      char quote = take();
      std::string body;
      while (pos_ < text_.size() && text_[pos_] != quote) body += take();
      if (pos_ >= text_.size())
        throw SyntaxError("unterminated string literal", cur_.line, cur_.col);
      take();
      cur_.kind = Tok::String;
      cur_.text = body;
      return;
    }
    switch (c) {
      case '(': take(); cur_.kind = Tok::LParen; return;
      case ')': take(); cur_.kind = Tok::RParen; return;
      case '[': take(); cur_.kind = Tok::LBracket; return;
      case ']': take(); cur_.kind = Tok::RBracket; return;
      case '{': take(); cur_.kind = Tok::LBrace; return;
      case '}': take(); cur_.kind = Tok::RBrace; return;
      case ',': take(); cur_.kind = Tok::Comma; return;
      case ':': take(); cur_.kind = Tok::Colon; return;
      case '|': take(); cur_.kind = Tok::Pipe; return;
      case '*': take(); cur_.kind = Tok::Star; return;
      case '.': take(); cur_.kind = Tok::Dot; return;
      case '+': take(); cur_.kind = Tok::Plus; return;
      case '/': take(); cur_.kind = Tok::Slash; return;
      case '=': take(); cur_.kind = Tok::Eq; return;
      case '-':
        take();
        if (pos_ < text_.size() && text_[pos_] == '>') {
          take();
          cur_.kind = Tok::Arrow;
        } else {
          cur_.kind = Tok::Dash;
        }
        return;
      case '<':
        take();
        if (pos_ < text_.size() && text_[pos_] == '-') {
          take();
          cur_.kind = Tok::LeftArrowDash;
        } else if (pos_ < text_.size() && text_[pos_] == '=') {
          take();
          cur_.kind = Tok::Le;
        } else if (pos_ < text_.size() && text_[pos_] == '>') {
          take();
          cur_.kind = Tok::Ne;
        } else {
          cur_.kind = Tok::Lt;
        }
        return;
      case '>':
        take();
        if (pos_ < text_.size() && text_[pos_] == '=') {
          take();
          cur_.kind = Tok::Ge;
        } else {
          cur_.kind = Tok::Gt;
        }
        return;
      case '!':
        take();
        if (pos_ < text_.size() && text_[pos_] == '=') {
          take();
          cur_.kind = Tok::Ne;
          return;
        }
        throw SyntaxError("unexpected '!'", line_, col_);
      default:
        throw SyntaxError(std::string("unexpected character '") + c + "'",
                          line_, col_);
    }
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '\n') {
        ++line_;
        col_ = 1;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++col_;
        ++pos_;
      } else if (c == '/' && pos_ + 1 < text_.size() &&
                 text_[pos_ + 1] == '/') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  char take() {
    ++col_;
    return text_[pos_++];
  }

  const std::string& text_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token cur_;
};

// --- expression parsing (shared by WHERE, RETURN, and plan files) ---

class ExprParser {
 public:
  explicit ExprParser(Lexer& lex) : lex_(lex) {}

  ExprPtr parse() { return parse_or(); }

 private:
  ExprPtr parse_or() {
    ExprPtr lhs = parse_and();
    while (is_kw("OR")) {
      lex_.next();
      lhs = Expr::logic(BoolOp::Or, lhs, parse_and());
    }
    return lhs;
  }

  ExprPtr parse_and() {
    ExprPtr lhs = parse_not();
    while (is_kw("AND")) {
      lex_.next();
      lhs = Expr::logic(BoolOp::And, lhs, parse_not());
    }
    return lhs;
  }

  ExprPtr parse_not() {
    if (is_kw("NOT")) {
      lex_.next();
      return Expr::negate(parse_not());
    }
    return parse_comparison();
  }

  ExprPtr parse_comparison() {
    ExprPtr lhs = parse_additive();
    auto k = lex_.peek().kind;
    if (k == Tok::Eq || k == Tok::Ne || k == Tok::Lt || k == Tok::Le ||
        k == Tok::Gt || k == Tok::Ge) {
      lex_.next();
      CmpOp op = k == Tok::Eq   ? CmpOp::Eq
                 : k == Tok::Ne ? CmpOp::Ne
                 : k == Tok::Lt ? CmpOp::Lt
                 : k == Tok::Le ? CmpOp::Le
                 : k == Tok::Gt ? CmpOp::Gt
                                : CmpOp::Ge;
      return Expr::cmp(op, lhs, parse_additive());
    }
    if (is_kw("IN")) {
      lex_.next();
      return Expr::in_list(lhs, parse_additive());
    }
    return lhs;
  }

  ExprPtr parse_additive() {
    ExprPtr lhs = parse_multiplicative();
    while (true) {
      auto k = lex_.peek().kind;
      if (k == Tok::Plus) {
        lex_.next();
        lhs = Expr::arith(ArithOp::Add, lhs, parse_multiplicative());
      } else if (k == Tok::Dash) {
        lex_.next();
        lhs = Expr::arith(ArithOp::Sub, lhs, parse_multiplicative());
      } else {
        return lhs;
      }
    }
  }

  ExprPtr parse_multiplicative() {
    ExprPtr lhs = parse_unary();
    while (true) {
      auto k = lex_.peek().kind;
      if (k == Tok::Star) {
        lex_.next();
        lhs = Expr::arith(ArithOp::Mul, lhs, parse_unary());
      } else if (k == Tok::Slash) {
        lex_.next();
        lhs = Expr::arith(ArithOp::Div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  ExprPtr parse_unary() {
    if (lex_.peek().kind == Tok::Dash) {
      lex_.next();
      return Expr::neg(parse_unary());
    }
    return parse_primary();
  }

  ExprPtr parse_primary() {
    const Token& t = lex_.peek();
    switch (t.kind) {
      case Tok::Int: {
        int64_t v = lex_.next().int_val;
        return Expr::lit(PropertyValue(v));
      }
      case Tok::Float: {
        double v = lex_.next().float_val;
        return Expr::lit(PropertyValue(v));
      }
      case Tok::String: {
        std::string v = lex_.next().text;
        return Expr::lit(PropertyValue(std::move(v)));
      }
      case Tok::Keyword:
        if (t.text == "TRUE" || t.text == "FALSE") {
          bool v = lex_.next().text == "TRUE";
          return Expr::lit(PropertyValue(v));
        }
        lex_.fail("unexpected keyword in expression: " + t.text);
      case Tok::Ident: {
        std::string name = lex_.next().text;
        if (lex_.peek().kind == Tok::Dot) {
          lex_.next();
          if (lex_.peek().kind != Tok::Ident)
            lex_.fail("expected property name after '.'");
          std::string prop = lex_.next().text;
          return Expr::property(name, prop);
        }
        return Expr::tag_ref(name);
      }
      case Tok::LParen: {
        lex_.next();
        ExprPtr inner = parse_or();
        if (lex_.peek().kind != Tok::RParen) lex_.fail("expected ')'");
        lex_.next();
        return inner;
      }
      case Tok::LBracket: {
        lex_.next();
        PropertyValue::List items;
        while (lex_.peek().kind != Tok::RBracket) {
          ExprPtr item = parse_or();
          if (item->kind != Expr::Kind::Literal)
            lex_.fail("list literals may only contain literals");
          items.push_back(item->literal);
          if (lex_.peek().kind == Tok::Comma)
            lex_.next();
          else
            break;
        }
        if (lex_.peek().kind != Tok::RBracket) lex_.fail("expected ']'");
        lex_.next();
        return Expr::lit(PropertyValue(std::move(items)));
      }
      default:
        lex_.fail("unexpected token in expression");
    }
  }

  bool is_kw(const char* kw) const {
    return lex_.peek().kind == Tok::Keyword && lex_.peek().text == kw;
  }

  Lexer& lex_;
};

// --- query parsing ---

struct NodePattern {
  std::string alias;
  TypeConstraint types;
  ExprPtr predicate;
};

struct EdgePattern {
  std::string alias;
  TypeConstraint types;
  EdgeDir dir = EdgeDir::Out;
  int path_length = 0;  // 0: plain edge; >=1: path of that many hops
  ExprPtr predicate;
};

struct ReturnItem {
  bool is_aggregate = false;
  AggFn fn = AggFn::Count;
  bool distinct = false;
  ExprPtr expr;
  std::string alias;
  std::string display;  // textual form, used when no AS alias is given
};

class QueryParser {
 public:
  QueryParser(const std::string& text, Semantics semantics)
      : lex_(text), semantics_(semantics) {}

  GirPlan parse() {
    std::vector<std::pair<bool, int>> patterns;  // (optional?, node id)
    while (is_kw("MATCH") || is_kw("OPTIONAL")) {
      bool optional = false;
      if (is_kw("OPTIONAL")) {
        lex_.next();
        optional = true;
        if (!is_kw("MATCH")) fail("expected MATCH after OPTIONAL");
      }
      lex_.next();
      patterns.emplace_back(optional, parse_match_clause());
      if (optional && patterns.size() == 1)
        fail("the first MATCH clause cannot be OPTIONAL");
    }
    if (patterns.empty()) fail("query must start with MATCH");

    int cur = patterns[0].second;
    for (size_t i = 1; i < patterns.size(); ++i) {
      auto left = builder_plan().output_aliases(cur);
      auto right = builder_plan().output_aliases(patterns[i].second);
      std::vector<std::string> keys;
      std::set_intersection(left.begin(), left.end(), right.begin(),
                            right.end(), std::back_inserter(keys));
      cur = builder_.join(cur, patterns[i].second, keys,
                          patterns[i].first ? JoinType::LeftOuter
                                            : JoinType::Inner);
    }

    if (is_kw("WHERE")) {
      lex_.next();
      ExprPtr cond = ExprParser(lex_).parse();
      check_tags(cond, cur, "WHERE");
      cur = builder_.select(cur, cond);
    }

    if (!is_kw("RETURN")) fail("expected RETURN");
    lex_.next();
    std::vector<ReturnItem> items;
    items.push_back(parse_return_item());
    while (lex_.peek().kind == Tok::Comma) {
      lex_.next();
      items.push_back(parse_return_item());
    }

    bool has_aggregate = std::any_of(items.begin(), items.end(),
                                     [](const auto& i) { return i.is_aggregate; });
    std::set<std::string> out_aliases;
    for (auto& item : items) {
      if (item.alias.empty()) item.alias = item.display;
      if (!out_aliases.insert(item.alias).second)
        fail("duplicate return alias '" + item.alias + "'");
      if (item.expr) check_tags(item.expr, cur, "RETURN");
    }

    if (has_aggregate) {
      std::vector<ProjectColumn> keys;
      std::vector<AggCall> aggs;
      for (const auto& item : items) {
        if (item.is_aggregate)
          aggs.push_back(AggCall{
              item.distinct ? AggFn::CountDistinct : item.fn, item.expr,
              item.alias});
        else
          keys.push_back(ProjectColumn{item.expr, item.alias});
      }
      cur = builder_.group(cur, std::move(keys), std::move(aggs));
    } else {
      std::vector<ProjectColumn> cols;
      for (const auto& item : items)
        cols.push_back(ProjectColumn{item.expr, item.alias});
      cur = builder_.project(cur, std::move(cols));
    }

    if (is_kw("ORDER")) {
      lex_.next();
      if (!is_kw("BY")) fail("expected BY after ORDER");
      lex_.next();
      std::vector<OrderKey> keys;
      keys.push_back(parse_order_item(cur));
      while (lex_.peek().kind == Tok::Comma) {
        lex_.next();
        keys.push_back(parse_order_item(cur));
      }
      cur = builder_.order(cur, std::move(keys));
    }

    if (is_kw("LIMIT")) {
      lex_.next();
      if (lex_.peek().kind != Tok::Int) fail("expected integer after LIMIT");
      cur = builder_.limit(cur, lex_.next().int_val);
    }

    if (lex_.peek().kind != Tok::End) fail("trailing input after query");
    return builder_.finish(cur, semantics_);
  }

 private:
  // One MATCH clause: comma-separated paths into a single pattern section.
  int parse_match_clause() {
    builder_.pattern_start();
    parse_path();
    while (lex_.peek().kind == Tok::Comma) {
      lex_.next();
      parse_path();
    }
    return builder_.pattern_end();
  }

  void parse_path() {
    NodePattern node = parse_node();
    builder_.get_v("", node.alias, node.types, VertexOpt::Dst,
                   node.predicate);
    std::string cur = node.alias;
    while (lex_.peek().kind == Tok::Dash ||
           lex_.peek().kind == Tok::LeftArrowDash) {
      EdgePattern edge = parse_edge();
      NodePattern next = parse_node();
      VertexOpt opt = edge.dir == EdgeDir::Out   ? VertexOpt::Dst
                      : edge.dir == EdgeDir::In  ? VertexOpt::Src
                                                 : VertexOpt::Other;
      if (edge.path_length > 0) {
        builder_.expand_path(cur, edge.alias, edge.types, edge.dir,
                             edge.path_length, PathOpt::Arbitrary);
      } else {
        builder_.expand_e(cur, edge.alias, edge.types, edge.dir,
                          edge.predicate);
      }
      builder_.get_v("", next.alias, next.types, opt, next.predicate);
      cur = next.alias;
    }
  }

  NodePattern parse_node() {
    if (lex_.peek().kind != Tok::LParen) fail("expected '(' to start a node");
    lex_.next();
    NodePattern node;
    if (lex_.peek().kind == Tok::Ident) node.alias = lex_.next().text;
    if (node.alias.empty()) node.alias = fresh_alias();
    node.types = parse_type_constraint();
    node.predicate = parse_map_props(node.alias);
    if (lex_.peek().kind != Tok::RParen) fail("expected ')'");
    lex_.next();
    return node;
  }

  TypeConstraint parse_type_constraint() {
    if (lex_.peek().kind != Tok::Colon) return TypeConstraint::all();
    lex_.next();
    std::set<std::string> names;
    if (lex_.peek().kind != Tok::Ident) fail("expected type name after ':'");
    names.insert(lex_.next().text);
    while (lex_.peek().kind == Tok::Pipe) {
      lex_.next();
      if (lex_.peek().kind != Tok::Ident) fail("expected type name after '|'");
      names.insert(lex_.next().text);
    }
    return TypeConstraint::of(std::move(names));
  }

  // `{prop: literal, ...}` desugars to equality predicates.
  ExprPtr parse_map_props(const std::string& alias_hint) {
    if (lex_.peek().kind != Tok::LBrace) return nullptr;
    lex_.next();
    std::vector<ExprPtr> conjuncts;
    while (lex_.peek().kind != Tok::RBrace) {
      if (lex_.peek().kind != Tok::Ident) fail("expected property name");
      std::string prop = lex_.next().text;
      if (lex_.peek().kind != Tok::Colon) fail("expected ':' in map props");
      lex_.next();
      ExprPtr value = ExprParser(lex_).parse();
      if (value->kind != Expr::Kind::Literal)
        fail("map property values must be literals");
      conjuncts.push_back(Expr::cmp(
          CmpOp::Eq, Expr::property(alias_hint, prop), value));
      if (lex_.peek().kind == Tok::Comma)
        lex_.next();
      else
        break;
    }
    if (lex_.peek().kind != Tok::RBrace) fail("expected '}'");
    lex_.next();
    return Expr::join_and(conjuncts);
  }

  EdgePattern parse_edge() {
    EdgePattern edge;
    bool left_arrow = false;
    if (lex_.peek().kind == Tok::LeftArrowDash) {
      lex_.next();
      left_arrow = true;
    } else {
      lex_.next();  // Dash
    }
    if (lex_.peek().kind != Tok::LBracket)
      fail("expected '[' in edge pattern");
    lex_.next();
    if (lex_.peek().kind == Tok::Ident) edge.alias = lex_.next().text;
    edge.types = parse_type_constraint();
    if (lex_.peek().kind == Tok::Star) {
      lex_.next();
      if (lex_.peek().kind != Tok::Int)
        fail("expected hop count after '*'");
      int64_t hops = lex_.next().int_val;
      if (hops < 1) fail("path length must be >= 1");
      edge.path_length = static_cast<int>(hops);
    }
    if (edge.alias.empty()) edge.alias = fresh_edge_alias();
    edge.predicate = parse_map_props(edge.alias);
    if (lex_.peek().kind != Tok::RBracket) fail("expected ']'");
    lex_.next();
    if (left_arrow) {
      if (lex_.peek().kind != Tok::Dash) fail("expected '-' to close edge");
      lex_.next();
      edge.dir = EdgeDir::In;
    } else if (lex_.peek().kind == Tok::Arrow) {
      lex_.next();
      edge.dir = EdgeDir::Out;
    } else if (lex_.peek().kind == Tok::Dash) {
      lex_.next();
      edge.dir = EdgeDir::Both;
    } else {
      fail("expected '->' or '-' to close edge");
    }
    return edge;
  }

  ReturnItem parse_return_item() {
    ReturnItem item;
    if (lex_.peek().kind == Tok::Keyword &&
        (lex_.peek().text == "COUNT" || lex_.peek().text == "SUM" ||
         lex_.peek().text == "AVG" || lex_.peek().text == "MIN" ||
         lex_.peek().text == "MAX")) {
      std::string fn = lex_.next().text;
      item.is_aggregate = true;
      item.fn = fn == "COUNT" ? AggFn::Count
                : fn == "SUM" ? AggFn::Sum
                : fn == "AVG" ? AggFn::Avg
                : fn == "MIN" ? AggFn::Min
                              : AggFn::Max;
      if (lex_.peek().kind != Tok::LParen) fail("expected '(' after " + fn);
      lex_.next();
      if (is_kw("DISTINCT")) {
        lex_.next();
        item.distinct = true;
        if (item.fn != AggFn::Count)
          fail("DISTINCT is only supported with COUNT");
      }
      item.expr = ExprParser(lex_).parse();
      if (lex_.peek().kind != Tok::RParen) fail("expected ')'");
      lex_.next();
      std::string low_fn = fn;
      std::transform(low_fn.begin(), low_fn.end(), low_fn.begin(), ::tolower);
      item.display = low_fn + (item.distinct ? "(distinct " : "(") +
                     item.expr->to_string() + ")";
    } else {
      item.expr = ExprParser(lex_).parse();
      item.display = item.expr->to_string();
    }
    if (is_kw("AS")) {
      lex_.next();
      if (lex_.peek().kind != Tok::Ident)
        fail("expected identifier after AS");
      item.alias = lex_.next().text;
    }
    return item;
  }

  OrderKey parse_order_item(int input) {
    OrderKey key;
    key.expr = ExprParser(lex_).parse();
    check_tags(key.expr, input, "ORDER BY");
    key.ascending = true;
    if (is_kw("ASC")) {
      lex_.next();
    } else if (is_kw("DESC")) {
      lex_.next();
      key.ascending = false;
    }
    return key;
  }

  void check_tags(const ExprPtr& e, int node, const std::string& where) {
    auto avail = builder_plan().output_aliases(node);
    for (const auto& tag : expr_tags(e))
      if (!avail.count(tag))
        fail(where + " references unknown alias '" + tag + "'");
  }

  const GirPlan& builder_plan() { return builder_.peek(); }

  bool is_kw(const char* kw) const {
    return lex_.peek().kind == Tok::Keyword && lex_.peek().text == kw;
  }

  [[noreturn]] void fail(const std::string& msg) {
    throw SyntaxError(msg, lex_.peek().line, lex_.peek().col);
  }

  std::string fresh_alias() { return "_v" + std::to_string(anon_counter_++); }
  std::string fresh_edge_alias() {
    return "_e" + std::to_string(anon_counter_++);
  }

  Lexer lex_;
  Semantics semantics_;
  GirBuilder builder_;
  int anon_counter_ = 0;
};

}  // namespace

ExprPtr parse_expr_text(const std::string& text) {
  Lexer lex(text);
  ExprPtr e = ExprParser(lex).parse();
  if (lex.peek().kind != Tok::End)
    throw SyntaxError("trailing input after expression", lex.peek().line,
                      lex.peek().col);
  return e;
}

GirPlan parse_query(const std::string& text, Semantics semantics) {
  return QueryParser(text, semantics).parse();
}

}  // namespace gopt
