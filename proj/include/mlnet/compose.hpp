#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mlnet/layer.hpp"

namespace mlnet {

/// Edge-set intersection. Throws DataError on vertex-count mismatch.
Layer and_compose(const Layer& a, const Layer& b);
/// Edge-set union. Throws DataError on vertex-count mismatch.
Layer or_compose(const Layer& a, const Layer& b);
/// Complement over all n(n-1)/2 pairs.
Layer not_compose(const Layer& a);

/// Boolean expression over named layers. Derived operators (NAND, NOR, XOR)
/// are expanded into AND/OR/NOT when constructed.
class LayerExpr {
 public:
  enum class Kind { ref, and_, or_, not_ };

  static LayerExpr ref(std::string name);
  static LayerExpr and_(LayerExpr lhs, LayerExpr rhs);
  static LayerExpr or_(LayerExpr lhs, LayerExpr rhs);
  static LayerExpr not_(LayerExpr child);
  static LayerExpr nand(LayerExpr lhs, LayerExpr rhs);
  static LayerExpr nor(LayerExpr lhs, LayerExpr rhs);
  static LayerExpr xor_(LayerExpr lhs, LayerExpr rhs);

  /// Left fold of AND / OR over one or more operands.
  static LayerExpr and_all(std::span<const LayerExpr> operands);
  static LayerExpr or_all(std::span<const LayerExpr> operands);

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }  // only for Kind::ref
  const LayerExpr& lhs() const { return *lhs_; }
  const LayerExpr& rhs() const { return *rhs_; }
  const LayerExpr& child() const { return *lhs_; }

  /// Fully parenthesised form, operands in given order: "(a AND (NOT b))".
  std::string to_string() const;

  /// Distinct layer names referenced, in first-occurrence order.
  std::vector<std::string> references() const;

  friend bool operator==(const LayerExpr& a, const LayerExpr& b);

 private:
  LayerExpr(Kind k, std::string name, std::shared_ptr<const LayerExpr> l, std::shared_ptr<const LayerExpr> r)
      : kind_(k), name_(std::move(name)), lhs_(std::move(l)), rhs_(std::move(r)) {}

  Kind kind_ = Kind::ref;
  std::string name_;
  std::shared_ptr<const LayerExpr> lhs_;
  std::shared_ptr<const LayerExpr> rhs_;
};

/// Parses the expression mini-language:
///
///   expr    := and_expr { ("OR" | "NOR" | "XOR") and_expr }
///   and_expr:= unary { ("AND" | "NAND") unary }
///   unary   := "NOT" unary | "(" expr ")" | identifier
///
/// Binary operators are left-associative. Throws ConfigError with the
/// offending position on malformed input.
LayerExpr parse_expr(std::string_view text);

using LayerStore = std::map<std::string, Layer, std::less<>>;

/// Bottom-up evaluation. The result is named by the canonical expression
/// string (a bare reference keeps the layer's own name).
Layer eval_expr(const LayerExpr& expr, const LayerStore& store);

enum class ComposeOp { and_, or_, not_ };
std::string_view to_string(ComposeOp op);

struct BoundReport {
  ComposeOp op = ComposeOp::and_;
  std::size_t result_edges = 0;
  std::vector<std::size_t> operand_edges;
  std::size_t lower = 0;
  std::size_t upper = 0;
  std::size_t total_pairs = 0;
  bool pass = false;

  std::string describe() const;
};

/// Edge-count bounds on a composed layer:
///   AND: 0 <= |E| <= min |E_i|
///   OR:  max |E_i| <= |E| <= n(n-1)/2
///   NOT: |E| == n(n-1)/2 - |E_operand|
BoundReport check_bounds(const Layer& result, ComposeOp op, std::span<const Layer* const> operands);
BoundReport check_bounds(const Layer& result, ComposeOp op, std::initializer_list<const Layer*> operands);

}  // namespace mlnet
