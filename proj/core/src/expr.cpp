#include "riesz/expr.hpp"

#include <cmath>
#include <sstream>
#include <unordered_map>

namespace riesz {

namespace {

Expr make(ExprKind kind, std::vector<Expr> children) {
  auto n = std::make_shared<ExprNode>();
  n->kind = kind;
  n->children = std::move(children);
  return n;
}

}  // namespace

std::string ExprNode::describe() const {
  switch (kind) {
    case ExprKind::kVariable: {
      std::ostringstream os;
      os << "w" << (var_index + 1);
      return os.str();
    }
    case ExprKind::kConstant: {
      std::ostringstream os;
      os << constant;
      return os.str();
    }
    case ExprKind::kAdd: return "add";
    case ExprKind::kSub: return "sub";
    case ExprKind::kMul: return "mul";
    case ExprKind::kDiv: return "div";
    case ExprKind::kPow: {
      std::ostringstream os;
      os << "pow[" << exponent << "]";
      return os.str();
    }
    case ExprKind::kExp: return "exp";
    case ExprKind::kLog: return "ln";
    case ExprKind::kTanh: return "tanh";
    case ExprKind::kSin: return "sin";
    case ExprKind::kCos: return "cos";
    case ExprKind::kSumSq: return "sumsq";
  }
  return "?";
}

Expr var(int k) {
  if (k < 0) throw std::out_of_range("variable index must be non-negative");
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::kVariable;
  n->var_index = k;
  return n;
}

Expr lit(double c) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::kConstant;
  n->constant = c;
  return n;
}

Expr operator+(Expr a, Expr b) { return make(ExprKind::kAdd, {std::move(a), std::move(b)}); }
Expr operator-(Expr a, Expr b) { return make(ExprKind::kSub, {std::move(a), std::move(b)}); }
Expr operator*(Expr a, Expr b) { return make(ExprKind::kMul, {std::move(a), std::move(b)}); }
Expr operator/(Expr a, Expr b) { return make(ExprKind::kDiv, {std::move(a), std::move(b)}); }
Expr operator+(Expr a, double c) { return std::move(a) + lit(c); }
Expr operator-(Expr a, double c) { return std::move(a) - lit(c); }
Expr operator*(double c, Expr a) { return lit(c) * std::move(a); }
Expr operator-(Expr a) { return lit(-1.0) * std::move(a); }

Expr pow(Expr a, double q) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::kPow;
  n->children = {std::move(a)};
  n->exponent = q;
  return n;
}

Expr exp(Expr a) { return make(ExprKind::kExp, {std::move(a)}); }
Expr log(Expr a) { return make(ExprKind::kLog, {std::move(a)}); }
Expr tanh(Expr a) { return make(ExprKind::kTanh, {std::move(a)}); }
Expr sin(Expr a) { return make(ExprKind::kSin, {std::move(a)}); }
Expr cos(Expr a) { return make(ExprKind::kCos, {std::move(a)}); }
Expr sumsq(std::vector<Expr> parts) {
  if (parts.empty()) throw std::invalid_argument("sumsq needs at least one part");
  return make(ExprKind::kSumSq, std::move(parts));
}

namespace {

class Evaluator {
 public:
  Evaluator(const std::vector<double>& w, int order) : w_(w), order_(order) {}

  const Jet& eval(const Expr& e) {
    auto it = memo_.find(e.get());
    if (it != memo_.end()) return it->second;
    Jet j = compute(*e);
    return memo_.emplace(e.get(), std::move(j)).first->second;
  }

 private:
  Jet compute(const ExprNode& node) {
    const int n = int(w_.size());
    switch (node.kind) {
      case ExprKind::kVariable:
        if (node.var_index >= n)
          throw std::out_of_range("variable index out of range for input dimension");
        return Jet::variable(order_, n, node.var_index, w_[node.var_index]);
      case ExprKind::kConstant:
        return Jet::constant(order_, n, node.constant);
      case ExprKind::kAdd:
        return eval(node.children[0]) + eval(node.children[1]);
      case ExprKind::kSub:
        return eval(node.children[0]) - eval(node.children[1]);
      case ExprKind::kMul:
        return eval(node.children[0]) * eval(node.children[1]);
      case ExprKind::kDiv: {
        const Jet& b = eval(node.children[1]);
        if (b.value() == 0.0)
          throw ExprDomainError("division by zero", &node);
        return eval(node.children[0]) * inv(b);
      }
      case ExprKind::kPow: {
        const Jet& a = eval(node.children[0]);
        const bool integral = node.exponent == std::floor(node.exponent);
        if (!integral && a.value() <= 0.0)
          throw ExprDomainError("pow with non-integer exponent at non-positive base", &node);
        if (integral && node.exponent < 0.0 && a.value() == 0.0)
          throw ExprDomainError("negative power of zero", &node);
        return pow(a, node.exponent);
      }
      case ExprKind::kExp:
        return exp(eval(node.children[0]));
      case ExprKind::kLog: {
        const Jet& a = eval(node.children[0]);
        if (a.value() <= 0.0)
          throw ExprDomainError("ln of non-positive value", &node);
        return log(a);
      }
      case ExprKind::kTanh:
        return tanh(eval(node.children[0]));
      case ExprKind::kSin:
        return sin(eval(node.children[0]));
      case ExprKind::kCos:
        return cos(eval(node.children[0]));
      case ExprKind::kSumSq: {
        Jet acc = Jet::constant(order_, n, 0.0);
        for (const auto& c : node.children) {
          const Jet& j = eval(c);
          acc += j * j;
        }
        return acc;
      }
    }
    throw std::logic_error("unreachable expression kind");
  }

  const std::vector<double>& w_;
  int order_;
  std::unordered_map<const ExprNode*, Jet> memo_;
};

}  // namespace

Jet jet_eval(const Expr& expr, const std::vector<double>& w, int order) {
  if (!expr) throw std::invalid_argument("null expression");
  Evaluator ev(w, order);
  return ev.eval(expr);
}

Jet seed_variable(int k, const std::vector<double>& w, int order) {
  const int n = int(w.size());
  if (k < 0 || k >= n) throw std::out_of_range("seed_variable index out of range");
  return Jet::variable(order, n, k, w[k]);
}

}  // namespace riesz
