#pragma once

#include <memory>
#include <string>

#include "cma/grid.hpp"

namespace cma {

// Tiny expression grammar for density and weight functions in configs:
//   expr    := term (('+'|'-') term)*
//   term    := factor (('*'|'/') factor)*
//   factor  := unary ('^' factor)?
//   unary   := '-' unary | atom
//   atom    := number | 'z1' | 'z2' | 'zbar1' | 'zbar2'
//            | 'abs2' '(' expr ')' | 'log' '(' expr ')' | 'exp' '(' expr ')'
//            | 'sqrt' '(' expr ')' | '(' expr ')'
// Evaluation is over complex numbers; abs2 is |.|^2. Real-valued uses take the
// real part and require the imaginary part to vanish.
class Expr {
 public:
  static Expr parse(const std::string& src);

  cplx eval(const std::array<cplx, 2>& z) const;
  // real evaluation; throws if the imaginary part exceeds 1e-9 * magnitude
  double eval_real(const std::array<cplx, 2>& z) const;

  struct Node;
  Expr() = default;

 private:
  std::shared_ptr<const Node> root_;
};

}  // namespace cma
