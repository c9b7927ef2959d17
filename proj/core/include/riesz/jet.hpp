#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace riesz {

/// Truncated multivariate Taylor expansion of a scalar function of n inputs.
///
/// Carries value, gradient, Hessian and third-order tensor up to `order`
/// (0..3). Hessian and third tensor are stored packed (upper-triangular /
/// lexicographic i<=j<=k); accessors symmetrize indices. Jets of equal
/// (order, n) form a commutative ring under the truncated Leibniz product,
/// which is what makes the weight algebra below exact.
class Jet {
 public:
  static constexpr int kMaxOrder = 3;
  static constexpr int kMaxDim = 32;

  Jet() = default;
  Jet(int order, int n);

  static Jet constant(int order, int n, double c);
  /// Coordinate function w -> w_k seeded at w.
  static Jet variable(int order, int n, int k, double wk);

  int order() const { return order_; }
  int dim() const { return n_; }

  double value() const { return value_; }
  double& value() { return value_; }

  double grad(int i) const;
  double& grad_at(int i);

  double hess(int i, int j) const;
  double& hess_at(int i, int j);

  double third(int i, int j, int k) const;
  double& third_at(int i, int j, int k);

  const std::vector<double>& grad_data() const { return grad_; }
  const std::vector<double>& hess_data() const { return hess_; }
  const std::vector<double>& third_data() const { return third_; }

  /// Jet of the partial derivative d/dw_k, one order lower.
  Jet partial(int k) const;

  /// Truncate to a lower order (no-op if already at or below it).
  Jet truncated(int order) const;

  Jet operator-() const;
  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(double c);

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, double c) { return a *= c; }
  friend Jet operator*(double c, Jet a) { return a *= c; }
  friend Jet operator+(Jet a, double c) { a.value_ += c; return a; }
  friend Jet operator+(double c, Jet a) { a.value_ += c; return a; }
  friend Jet operator-(Jet a, double c) { a.value_ -= c; return a; }
  friend Jet operator-(double c, const Jet& a) { Jet r = -a; r.value_ += c; return r; }

  /// Truncated Leibniz product.
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);

  /// Composition with a univariate analytic map given its derivatives
  /// f0 = f(value), f1 = f', f2 = f'', f3 = f''' at the jet's value.
  Jet compose(double f0, double f1, double f2, double f3) const;

  bool finite() const;

 private:
  void check_compatible(const Jet& o) const;

  int order_ = 0;
  int n_ = 0;
  double value_ = 0.0;
  std::vector<double> grad_;   // n entries, present iff order >= 1
  std::vector<double> hess_;   // n(n+1)/2 packed, present iff order >= 2
  std::vector<double> third_;  // n(n+1)(n+2)/6 packed, present iff order >= 3
};

// Analytic primitives on jets. Domain violations throw std::domain_error.
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet tanh(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet sqrt(const Jet& a);
Jet inv(const Jet& a);
/// pow with integer exponent works for any base; real exponent needs base > 0.
Jet pow(const Jet& a, double q);

}  // namespace riesz
