#include "mlnet/compose.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "mlnet/error.hpp"

namespace mlnet {

namespace {

void require_same_universe(const Layer& a, const Layer& b) {
  if (a.vertex_count() != b.vertex_count())
    throw DataError("layers '" + a.name() + "' (" + std::to_string(a.vertex_count()) + " vertices) and '" + b.name() +
                    "' (" + std::to_string(b.vertex_count()) + " vertices) do not share a vertex set");
}

template <class Op>
Layer combine(const Layer& a, const Layer& b, const char* op_name, Op op) {
  require_same_universe(a, b);
  Layer out("(" + a.name() + " " + op_name + " " + b.name() + ")", a.vertex_count());
  auto dst = out.words();
  auto lhs = a.words();
  auto rhs = b.words();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = op(lhs[i], rhs[i]);
  return out;
}

}  // namespace

Layer and_compose(const Layer& a, const Layer& b) {
  return combine(a, b, "AND", [](std::uint64_t x, std::uint64_t y) { return x & y; });
}

Layer or_compose(const Layer& a, const Layer& b) {
  return combine(a, b, "OR", [](std::uint64_t x, std::uint64_t y) { return x | y; });
}

Layer not_compose(const Layer& a) {
  Layer out("(NOT " + a.name() + ")", a.vertex_count());
  auto dst = out.words();
  auto src = a.words();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = ~src[i];
  out.mask_tail();
  return out;
}

// ---------------------------------------------------------------------------
// Expressions

LayerExpr LayerExpr::ref(std::string name) { return LayerExpr(Kind::ref, std::move(name), nullptr, nullptr); }

LayerExpr LayerExpr::and_(LayerExpr lhs, LayerExpr rhs) {
  return LayerExpr(Kind::and_, {}, std::make_shared<const LayerExpr>(std::move(lhs)),
                   std::make_shared<const LayerExpr>(std::move(rhs)));
}

LayerExpr LayerExpr::or_(LayerExpr lhs, LayerExpr rhs) {
  return LayerExpr(Kind::or_, {}, std::make_shared<const LayerExpr>(std::move(lhs)),
                   std::make_shared<const LayerExpr>(std::move(rhs)));
}

LayerExpr LayerExpr::not_(LayerExpr child) {
  return LayerExpr(Kind::not_, {}, std::make_shared<const LayerExpr>(std::move(child)), nullptr);
}

LayerExpr LayerExpr::nand(LayerExpr lhs, LayerExpr rhs) { return not_(and_(std::move(lhs), std::move(rhs))); }

LayerExpr LayerExpr::nor(LayerExpr lhs, LayerExpr rhs) { return not_(or_(std::move(lhs), std::move(rhs))); }

LayerExpr LayerExpr::xor_(LayerExpr lhs, LayerExpr rhs) {
  return or_(and_(lhs, not_(rhs)), and_(not_(lhs), rhs));
}

LayerExpr LayerExpr::and_all(std::span<const LayerExpr> operands) {
  if (operands.empty()) throw ConfigError("AND needs at least one operand");
  LayerExpr acc = operands.front();
  for (std::size_t i = 1; i < operands.size(); ++i) acc = and_(std::move(acc), operands[i]);
  return acc;
}

LayerExpr LayerExpr::or_all(std::span<const LayerExpr> operands) {
  if (operands.empty()) throw ConfigError("OR needs at least one operand");
  LayerExpr acc = operands.front();
  for (std::size_t i = 1; i < operands.size(); ++i) acc = or_(std::move(acc), operands[i]);
  return acc;
}

std::string LayerExpr::to_string() const {
  switch (kind_) {
    case Kind::ref: return name_;
    case Kind::and_: return "(" + lhs_->to_string() + " AND " + rhs_->to_string() + ")";
    case Kind::or_: return "(" + lhs_->to_string() + " OR " + rhs_->to_string() + ")";
    case Kind::not_: return "(NOT " + lhs_->to_string() + ")";
  }
  return {};
}

std::vector<std::string> LayerExpr::references() const {
  std::vector<std::string> out;
  auto visit = [&](const LayerExpr& e, auto& self) -> void {
    if (e.kind_ == Kind::ref) {
      if (std::find(out.begin(), out.end(), e.name_) == out.end()) out.push_back(e.name_);
      return;
    }
    self(*e.lhs_, self);
    if (e.rhs_) self(*e.rhs_, self);
  };
  visit(*this, visit);
  return out;
}

bool operator==(const LayerExpr& a, const LayerExpr& b) {
  if (a.kind_ != b.kind_) return false;
  switch (a.kind_) {
    case LayerExpr::Kind::ref: return a.name_ == b.name_;
    case LayerExpr::Kind::not_: return *a.lhs_ == *b.lhs_;
    default: return *a.lhs_ == *b.lhs_ && *a.rhs_ == *b.rhs_;
  }
}

// ---------------------------------------------------------------------------
// Parser

namespace {

struct Token {
  enum class Type { ident, op, lparen, rparen, end } type = Type::end;
  std::string text;
  std::size_t pos = 0;
};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
}

bool is_operator_word(std::string_view w) {
  return w == "AND" || w == "OR" || w == "NOT" || w == "NAND" || w == "NOR" || w == "XOR";
}

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '(') {
      out.push_back({Token::Type::lparen, "(", i++});
    } else if (c == ')') {
      out.push_back({Token::Type::rparen, ")", i++});
    } else if (is_ident_start(c)) {
      const std::size_t start = i;
      while (i < s.size() && is_ident_char(s[i])) ++i;
      std::string word(s.substr(start, i - start));
      const auto type = is_operator_word(word) ? Token::Type::op : Token::Type::ident;
      out.push_back({type, std::move(word), start});
    } else {
      throw ConfigError("expression: unexpected character '" + std::string(1, c) + "' at position " +
                        std::to_string(i));
    }
  }
  out.push_back({Token::Type::end, "", s.size()});
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(tokenize(text)) {}

  LayerExpr parse() {
    LayerExpr e = parse_or();
    if (peek().type != Token::Type::end) fail("unexpected '" + peek().text + "'");
    return e;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_++]; }
  bool peek_op(std::string_view op) const { return peek().type == Token::Type::op && peek().text == op; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("expression: " + what + " at position " + std::to_string(peek().pos));
  }

  LayerExpr parse_or() {
    LayerExpr lhs = parse_and();
    for (;;) {
      if (peek_op("OR")) {
        next();
        lhs = LayerExpr::or_(std::move(lhs), parse_and());
      } else if (peek_op("NOR")) {
        next();
        lhs = LayerExpr::nor(std::move(lhs), parse_and());
      } else if (peek_op("XOR")) {
        next();
        lhs = LayerExpr::xor_(std::move(lhs), parse_and());
      } else {
        return lhs;
      }
    }
  }

  LayerExpr parse_and() {
    LayerExpr lhs = parse_unary();
    for (;;) {
      if (peek_op("AND")) {
        next();
        lhs = LayerExpr::and_(std::move(lhs), parse_unary());
      } else if (peek_op("NAND")) {
        next();
        lhs = LayerExpr::nand(std::move(lhs), parse_unary());
      } else {
        return lhs;
      }
    }
  }

  LayerExpr parse_unary() {
    const Token& t = peek();
    switch (t.type) {
      case Token::Type::op:
        if (t.text == "NOT") {
          next();
          return LayerExpr::not_(parse_unary());
        }
        fail("expected an operand before '" + t.text + "'");
      case Token::Type::lparen: {
        next();
        LayerExpr inner = parse_or();
        if (peek().type != Token::Type::rparen) fail("expected ')'");
        next();
        return inner;
      }
      case Token::Type::ident: return LayerExpr::ref(next().text);
      case Token::Type::rparen: fail("unexpected ')'");
      case Token::Type::end: fail("unexpected end of expression");
    }
    fail("unexpected token");
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

LayerExpr parse_expr(std::string_view text) { return Parser(text).parse(); }

Layer eval_expr(const LayerExpr& expr, const LayerStore& store) {
  switch (expr.kind()) {
    case LayerExpr::Kind::ref: {
      auto it = store.find(expr.name());
      if (it == store.end()) throw ConfigError("unresolved layer '" + expr.name() + "'");
      return it->second;
    }
    case LayerExpr::Kind::and_: {
      Layer out = and_compose(eval_expr(expr.lhs(), store), eval_expr(expr.rhs(), store));
      out.set_name(expr.to_string());
      return out;
    }
    case LayerExpr::Kind::or_: {
      Layer out = or_compose(eval_expr(expr.lhs(), store), eval_expr(expr.rhs(), store));
      out.set_name(expr.to_string());
      return out;
    }
    case LayerExpr::Kind::not_: {
      Layer out = not_compose(eval_expr(expr.child(), store));
      out.set_name(expr.to_string());
      return out;
    }
  }
  throw InvariantError("unhandled expression kind");
}

// ---------------------------------------------------------------------------
// Bounds

std::string_view to_string(ComposeOp op) {
  switch (op) {
    case ComposeOp::and_: return "AND";
    case ComposeOp::or_: return "OR";
    case ComposeOp::not_: return "NOT";
  }
  return "?";
}

std::string BoundReport::describe() const {
  std::ostringstream out;
  out << to_string(op) << ": |E|=" << result_edges;
  if (op == ComposeOp::not_)
    out << " expected " << lower << " (" << total_pairs << " - " << operand_edges.front() << ")";
  else
    out << " bounds [" << lower << ", " << upper << "]";
  out << (pass ? " pass" : " FAIL");
  return out.str();
}

BoundReport check_bounds(const Layer& result, ComposeOp op, std::span<const Layer* const> operands) {
  if (operands.empty()) throw ConfigError("bound check needs at least one operand");
  BoundReport r;
  r.op = op;
  r.result_edges = result.edge_count();
  r.total_pairs = result.pair_count();
  for (const Layer* l : operands) {
    require_same_universe(result, *l);
    r.operand_edges.push_back(l->edge_count());
  }
  const auto [mn, mx] = std::minmax_element(r.operand_edges.begin(), r.operand_edges.end());
  switch (op) {
    case ComposeOp::and_:
      r.lower = 0;
      r.upper = *mn;
      break;
    case ComposeOp::or_:
      r.lower = *mx;
      r.upper = r.total_pairs;
      break;
    case ComposeOp::not_:
      if (operands.size() != 1) throw ConfigError("NOT bound check takes exactly one operand");
      r.lower = r.upper = r.total_pairs - r.operand_edges.front();
      break;
  }
  r.pass = r.lower <= r.result_edges && r.result_edges <= r.upper;
  return r;
}

BoundReport check_bounds(const Layer& result, ComposeOp op, std::initializer_list<const Layer*> operands) {
  return check_bounds(result, op, std::span<const Layer* const>(operands.begin(), operands.size()));
}

}  // namespace mlnet
