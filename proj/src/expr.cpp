#include "cma/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace cma {

struct Expr::Node {
  enum class Kind { Const, Coord, CoordBar, Add, Sub, Mul, Div, Pow, Neg, Abs2, Log, Exp, Sqrt };
  Kind kind;
  cplx value{0, 0};
  int axis = 0;
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;
using Kind = Expr::Node::Kind;

NodePtr make(Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

struct Parser {
  const std::string& s;
  std::size_t pos = 0;

  void skip() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool eat(char c) {
    skip();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& what) {
    throw std::invalid_argument("expr parse error at offset " + std::to_string(pos) + ": " + what);
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (eat('+'))
        lhs = make(Kind::Add, lhs, term());
      else if (eat('-'))
        lhs = make(Kind::Sub, lhs, term());
      else
        return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = factor();
    for (;;) {
      if (eat('*'))
        lhs = make(Kind::Mul, lhs, factor());
      else if (eat('/'))
        lhs = make(Kind::Div, lhs, factor());
      else
        return lhs;
    }
  }

  NodePtr factor() {
    NodePtr base = unary();
    if (eat('^')) return make(Kind::Pow, base, factor());  // right associative
    return base;
  }

  NodePtr unary() {
    if (eat('-')) return make(Kind::Neg, unary());
    return atom();
  }

  NodePtr atom() {
    skip();
    if (pos >= s.size()) fail("unexpected end of input");
    char c = s[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      char* end = nullptr;
      double v = std::strtod(s.c_str() + pos, &end);
      pos = static_cast<std::size_t>(end - s.c_str());
      auto n = std::make_shared<Expr::Node>();
      n->kind = Kind::Const;
      n->value = cplx(v, 0);
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos;
      while (pos < s.size() &&
             (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
        ++pos;
      std::string word = s.substr(start, pos - start);
      auto coord = [&](Kind k, int axis) {
        auto n = std::make_shared<Expr::Node>();
        n->kind = k;
        n->axis = axis;
        return NodePtr(n);
      };
      if (word == "z1") return coord(Kind::Coord, 0);
      if (word == "z2") return coord(Kind::Coord, 1);
      if (word == "zbar1") return coord(Kind::CoordBar, 0);
      if (word == "zbar2") return coord(Kind::CoordBar, 1);
      Kind k;
      if (word == "abs2")
        k = Kind::Abs2;
      else if (word == "log")
        k = Kind::Log;
      else if (word == "exp")
        k = Kind::Exp;
      else if (word == "sqrt")
        k = Kind::Sqrt;
      else
        fail("unknown identifier '" + word + "'");
      if (!eat('(')) fail("expected '(' after " + word);
      NodePtr arg = expr();
      if (!eat(')')) fail("expected ')'");
      return make(k, arg);
    }
    if (eat('(')) {
      NodePtr inner = expr();
      if (!eat(')')) fail("expected ')'");
      return inner;
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

cplx eval_node(const Expr::Node& n, const std::array<cplx, 2>& z) {
  switch (n.kind) {
    case Kind::Const: return n.value;
    case Kind::Coord: return z[n.axis];
    case Kind::CoordBar: return std::conj(z[n.axis]);
    case Kind::Add: return eval_node(*n.a, z) + eval_node(*n.b, z);
    case Kind::Sub: return eval_node(*n.a, z) - eval_node(*n.b, z);
    case Kind::Mul: return eval_node(*n.a, z) * eval_node(*n.b, z);
    case Kind::Div: return eval_node(*n.a, z) / eval_node(*n.b, z);
    case Kind::Pow: return std::pow(eval_node(*n.a, z), eval_node(*n.b, z));
    case Kind::Neg: return -eval_node(*n.a, z);
    case Kind::Abs2: return cplx(std::norm(eval_node(*n.a, z)), 0);
    case Kind::Log: return std::log(eval_node(*n.a, z));
    case Kind::Exp: return std::exp(eval_node(*n.a, z));
    case Kind::Sqrt: return std::sqrt(eval_node(*n.a, z));
  }
  return {0, 0};
}

}  // namespace

Expr Expr::parse(const std::string& src) {
  Parser p{src};
  NodePtr root = p.expr();
  p.skip();
  if (p.pos != src.size()) p.fail("trailing input");
  Expr e;
  e.root_ = root;
  return e;
}

cplx Expr::eval(const std::array<cplx, 2>& z) const {
  if (!root_) throw std::logic_error("Expr: empty");
  return eval_node(*root_, z);
}

double Expr::eval_real(const std::array<cplx, 2>& z) const {
  cplx v = eval(z);
  double mag = std::abs(v);
  if (std::abs(v.imag()) > 1e-9 * std::max(1.0, mag))
    throw std::runtime_error("expr: expected real value, got imaginary part " +
                             std::to_string(v.imag()));
  return v.real();
}

}  // namespace cma
