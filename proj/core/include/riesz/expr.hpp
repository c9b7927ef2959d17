#pragma once

#include <memory>
#include <string>
#include <vector>

#include "riesz/jet.hpp"

namespace riesz {

/// Node of a composition DAG over the inputs w_1..w_n. Shared subexpressions
/// are evaluated once per point (evaluation memoizes on node identity).
enum class ExprKind {
  kVariable,
  kConstant,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kPow,
  kExp,
  kLog,
  kTanh,
  kSin,
  kCos,
  kSumSq,  // |.|^2 composite: sum of squares of the children
};

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  ExprKind kind;
  std::vector<Expr> children;
  int var_index = -1;    // kVariable
  double constant = 0.0; // kConstant
  double exponent = 1.0; // kPow

  std::string describe() const;
};

/// Thrown when an expression is evaluated outside its domain (log/div/pow).
class ExprDomainError : public std::domain_error {
 public:
  ExprDomainError(const std::string& what, const ExprNode* node)
      : std::domain_error(what), node_(node) {}
  const ExprNode* node() const { return node_; }

 private:
  const ExprNode* node_;
};

Expr var(int k);
Expr lit(double c);
Expr operator+(Expr a, Expr b);
Expr operator-(Expr a, Expr b);
Expr operator*(Expr a, Expr b);
Expr operator/(Expr a, Expr b);
Expr operator+(Expr a, double c);
Expr operator-(Expr a, double c);
Expr operator*(double c, Expr a);
Expr operator-(Expr a);
Expr pow(Expr a, double q);
Expr exp(Expr a);
Expr log(Expr a);
Expr tanh(Expr a);
Expr sin(Expr a);
Expr cos(Expr a);
Expr sumsq(std::vector<Expr> parts);

/// Evaluate the jet of `expr` at w, with derivatives up to `order`.
/// Throws ExprDomainError when a node is undefined at w and
/// std::out_of_range when a variable index exceeds w's dimension.
Jet jet_eval(const Expr& expr, const std::vector<double>& w, int order);

/// Seed jet for the coordinate function w -> w_k.
Jet seed_variable(int k, const std::vector<double>& w, int order);

}  // namespace riesz
