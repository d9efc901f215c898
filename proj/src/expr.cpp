#include "ooc/expr.hpp"

#include <cctype>
#include <cstdlib>
#include <sstream>

#include "ooc/errors.hpp"

namespace ooc {

namespace {

void compile_rec(const ExprPtr& e, ExprTape& tape, int depth, int& max_depth) {
  if (!e) throw ValidationError("null expression node");
  if (expr_op_is_binary(e->op)) {
    compile_rec(e->lhs, tape, depth, max_depth);
    compile_rec(e->rhs, tape, depth + 1, max_depth);
    tape.ins.push_back({e->op, 0, 0.0, {0, 0, 0}});
  } else {
    tape.ins.push_back({e->op, e->arg, e->value, e->offset});
    max_depth = std::max(max_depth, depth + 1);
  }
}

struct Tokenizer {
  const std::string& text;
  size_t pos = 0;

  explicit Tokenizer(const std::string& t) : text(t) {}

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }
  bool done() {
    skip_ws();
    return pos >= text.size();
  }
  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }
  std::string next() {
    skip_ws();
    if (pos >= text.size()) throw ValidationError("unexpected end of expression: " + text);
    char c = text[pos];
    if (c == '(' || c == ')') {
      ++pos;
      return std::string(1, c);
    }
    size_t start = pos;
    while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) &&
           text[pos] != '(' && text[pos] != ')')
      ++pos;
    return text.substr(start, pos - start);
  }
};

index_t parse_int_token(const std::string& tok) {
  char* end = nullptr;
  long long v = std::strtoll(tok.c_str(), &end, 10);
  if (end != tok.c_str() + tok.size())
    throw ValidationError("expected integer in expression, got '" + tok + "'");
  return v;
}

double parse_number_token(const std::string& tok, bool& ok) {
  char* end = nullptr;
  double v = std::strtod(tok.c_str(), &end);
  ok = end == tok.c_str() + tok.size() && end != tok.c_str();
  return v;
}

ExprPtr parse_rec(Tokenizer& tz, bool allow_coords) {
  std::string tok = tz.next();
  if (tok == ")") throw ValidationError("unexpected ')' in expression");
  if (tok != "(") {
    if (allow_coords) {
      if (tok == "i") return ex::coord(0);
      if (tok == "j") return ex::coord(1);
      if (tok == "k") return ex::coord(2);
    }
    bool ok = false;
    double v = parse_number_token(tok, ok);
    if (!ok) throw ValidationError("unrecognised token '" + tok + "' in expression");
    return ex::c(v);
  }

  std::string head = tz.next();
  if (head == "r") {
    std::string arg_tok = tz.next();
    int arg = static_cast<int>(parse_int_token(arg_tok));
    Point off{0, 0, 0};
    int d = 0;
    while (tz.peek() != ')') {
      if (d >= 3) throw ValidationError("read offset has more than 3 components");
      off[d++] = parse_int_token(tz.next());
    }
    tz.next();  // ')'
    return ex::r(arg, off[0], off[1], off[2]);
  }

  ExprOp op;
  if (head == "+")
    op = ExprOp::add;
  else if (head == "-")
    op = ExprOp::sub;
  else if (head == "*")
    op = ExprOp::mul;
  else if (head == "/")
    op = ExprOp::divide;
  else if (head == "min")
    op = ExprOp::min;
  else if (head == "max")
    op = ExprOp::max;
  else
    throw ValidationError("unknown operator '" + head + "' in expression");

  ExprPtr lhs = parse_rec(tz, allow_coords);
  ExprPtr rhs = parse_rec(tz, allow_coords);
  if (tz.next() != ")")
    throw ValidationError("operator '" + head + "' takes exactly two operands");
  return ex::bin(op, std::move(lhs), std::move(rhs));
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

ExprTape ExprTape::compile(const ExprPtr& e) {
  ExprTape tape;
  int max_depth = 0;
  compile_rec(e, tape, 0, max_depth);
  tape.max_stack = max_depth;
  return tape;
}

ExprPtr parse_prefix_expr(const std::string& text, bool allow_coords) {
  Tokenizer tz(text);
  ExprPtr e = parse_rec(tz, allow_coords);
  if (!tz.done()) throw ValidationError("trailing tokens after expression: " + text);
  return e;
}

std::string expr_to_string(const ExprPtr& e) {
  if (!e) return "<null>";
  switch (e->op) {
    case ExprOp::constant:
      return format_double(e->value);
    case ExprOp::coord:
      return e->arg == 0 ? "i" : e->arg == 1 ? "j" : "k";
    case ExprOp::read: {
      std::string s = "(r " + std::to_string(e->arg);
      for (int d = 0; d < 3; ++d) s += " " + std::to_string(e->offset[d]);
      return s + ")";
    }
    default: {
      const char* op = e->op == ExprOp::add      ? "+"
                       : e->op == ExprOp::sub    ? "-"
                       : e->op == ExprOp::mul    ? "*"
                       : e->op == ExprOp::divide ? "/"
                       : e->op == ExprOp::min    ? "min"
                                                 : "max";
      return std::string("(") + op + " " + expr_to_string(e->lhs) + " " + expr_to_string(e->rhs) +
             ")";
    }
  }
}

}  // namespace ooc
