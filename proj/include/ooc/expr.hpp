#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ooc/extent.hpp"

namespace ooc {

enum class ExprOp : std::uint8_t {
  constant,
  read,   // dataset argument `arg` at relative `offset`
  coord,  // iteration-point coordinate `arg` (0..2); fill expressions only
  add,
  sub,
  mul,
  divide,
  min,
  max,
};

inline bool expr_op_is_binary(ExprOp op) {
  return op != ExprOp::constant && op != ExprOp::read && op != ExprOp::coord;
}

/// Expression tree node. Immutable once built; loops share subtrees freely.
struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprOp op = ExprOp::constant;
  double value = 0.0;
  int arg = 0;
  Point offset{0, 0, 0};
  ExprPtr lhs, rhs;
};

namespace ex {

inline ExprPtr c(double v) {
  auto e = std::make_shared<Expr>();
  e->value = v;
  return e;
}
inline ExprPtr r(int arg, index_t o0 = 0, index_t o1 = 0, index_t o2 = 0) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::read;
  e->arg = arg;
  e->offset = {o0, o1, o2};
  return e;
}
inline ExprPtr coord(int dim) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::coord;
  e->arg = dim;
  return e;
}
inline ExprPtr bin(ExprOp op, ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->lhs = std::move(a);
  e->rhs = std::move(b);
  return e;
}
inline ExprPtr add(ExprPtr a, ExprPtr b) { return bin(ExprOp::add, std::move(a), std::move(b)); }
inline ExprPtr sub(ExprPtr a, ExprPtr b) { return bin(ExprOp::sub, std::move(a), std::move(b)); }
inline ExprPtr mul(ExprPtr a, ExprPtr b) { return bin(ExprOp::mul, std::move(a), std::move(b)); }
inline ExprPtr div(ExprPtr a, ExprPtr b) { return bin(ExprOp::divide, std::move(a), std::move(b)); }
inline ExprPtr min(ExprPtr a, ExprPtr b) { return bin(ExprOp::min, std::move(a), std::move(b)); }
inline ExprPtr max(ExprPtr a, ExprPtr b) { return bin(ExprOp::max, std::move(a), std::move(b)); }

}  // namespace ex

/// Flattened postfix program for fast repeated evaluation. `read`
/// instructions carry the argument index and the original offset; the
/// executor resolves them against whatever buffer view it runs on.
struct ExprTape {
  struct Ins {
    ExprOp op;
    int arg;        // read: argument index, coord: dimension
    double value;   // constant
    Point offset;   // read
  };
  std::vector<Ins> ins;
  int max_stack = 0;

  static ExprTape compile(const ExprPtr& e);
};

/// Walks every node of an expression tree.
template <typename Fn>
void expr_visit(const ExprPtr& e, Fn&& fn) {
  if (!e) return;
  fn(*e);
  expr_visit(e->lhs, fn);
  expr_visit(e->rhs, fn);
}

/// Parse a prefix-notation expression: a decimal literal, `(op a b)` with
/// op in {+ - * / min max}, `(r ARG [o0 [o1 [o2]]])`, or — when
/// `allow_coords` — the coordinate variables i, j, k.
ExprPtr parse_prefix_expr(const std::string& text, bool allow_coords = false);

/// Inverse of parse_prefix_expr, used by the plan/kernel dump paths.
std::string expr_to_string(const ExprPtr& e);

}  // namespace ooc
