#include "riesz/jet.hpp"

#include <algorithm>
#include <cmath>

namespace riesz {

namespace {

inline std::size_t hess_size(int n) { return std::size_t(n) * (n + 1) / 2; }
inline std::size_t third_size(int n) {
  return std::size_t(n) * (n + 1) * (n + 2) / 6;
}

// Packed index for i <= j, row-major over the upper triangle.
inline std::size_t h_index(int n, int i, int j) {
  return std::size_t(i) * n - std::size_t(i) * (i - 1) / 2 + (j - i);
}

// Packed index for i <= j <= k: count triples lexicographically smaller.
inline std::size_t t_index(int n, int i, int j, int k) {
  // offset of block a < i: sum over a of (n-a)(n-a+1)/2
  std::size_t off = 0;
  for (int a = 0; a < i; ++a) off += hess_size(n - a);
  return off + h_index(n - i, j - i, k - i);
}

inline void sort2(int& i, int& j) {
  if (i > j) std::swap(i, j);
}
inline void sort3(int& i, int& j, int& k) {
  sort2(i, j);
  sort2(j, k);
  sort2(i, j);
}

}  // namespace

Jet::Jet(int order, int n) : order_(order), n_(n) {
  if (order < 0 || order > kMaxOrder) throw std::invalid_argument("jet order must be in 0..3");
  if (n < 1 || n > kMaxDim) throw std::invalid_argument("jet dimension must be in 1..32");
  if (order >= 1) grad_.assign(n, 0.0);
  if (order >= 2) hess_.assign(hess_size(n), 0.0);
  if (order >= 3) third_.assign(third_size(n), 0.0);
}

Jet Jet::constant(int order, int n, double c) {
  Jet j(order, n);
  j.value_ = c;
  return j;
}

Jet Jet::variable(int order, int n, int k, double wk) {
  if (k < 0 || k >= n) throw std::out_of_range("variable index out of range");
  Jet j(order, n);
  j.value_ = wk;
  if (order >= 1) j.grad_[k] = 1.0;
  return j;
}

double Jet::grad(int i) const { return order_ >= 1 ? grad_[i] : 0.0; }
double& Jet::grad_at(int i) { return grad_[i]; }

double Jet::hess(int i, int j) const {
  if (order_ < 2) return 0.0;
  sort2(i, j);
  return hess_[h_index(n_, i, j)];
}
double& Jet::hess_at(int i, int j) {
  sort2(i, j);
  return hess_[h_index(n_, i, j)];
}

double Jet::third(int i, int j, int k) const {
  if (order_ < 3) return 0.0;
  sort3(i, j, k);
  return third_[t_index(n_, i, j, k)];
}
double& Jet::third_at(int i, int j, int k) {
  sort3(i, j, k);
  return third_[t_index(n_, i, j, k)];
}

Jet Jet::partial(int k) const {
  if (order_ < 1) throw std::logic_error("partial() requires order >= 1");
  if (k < 0 || k >= n_) throw std::out_of_range("partial index out of range");
  Jet r(order_ - 1, n_);
  r.value_ = grad_[k];
  if (r.order_ >= 1)
    for (int i = 0; i < n_; ++i) r.grad_[i] = hess(i, k);
  if (r.order_ >= 2)
    for (int i = 0; i < n_; ++i)
      for (int j = i; j < n_; ++j) r.hess_[h_index(n_, i, j)] = third(i, j, k);
  return r;
}

Jet Jet::truncated(int order) const {
  if (order >= order_) return *this;
  Jet r(order, n_);
  r.value_ = value_;
  if (order >= 1) r.grad_ = grad_;
  if (order >= 2) r.hess_ = hess_;
  return r;
}

void Jet::check_compatible(const Jet& o) const {
  if (order_ != o.order_ || n_ != o.n_)
    throw std::invalid_argument("jet (order, n) mismatch");
}

Jet Jet::operator-() const {
  Jet r = *this;
  r.value_ = -r.value_;
  for (auto& x : r.grad_) x = -x;
  for (auto& x : r.hess_) x = -x;
  for (auto& x : r.third_) x = -x;
  return r;
}

Jet& Jet::operator+=(const Jet& o) {
  check_compatible(o);
  value_ += o.value_;
  for (std::size_t i = 0; i < grad_.size(); ++i) grad_[i] += o.grad_[i];
  for (std::size_t i = 0; i < hess_.size(); ++i) hess_[i] += o.hess_[i];
  for (std::size_t i = 0; i < third_.size(); ++i) third_[i] += o.third_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  check_compatible(o);
  value_ -= o.value_;
  for (std::size_t i = 0; i < grad_.size(); ++i) grad_[i] -= o.grad_[i];
  for (std::size_t i = 0; i < hess_.size(); ++i) hess_[i] -= o.hess_[i];
  for (std::size_t i = 0; i < third_.size(); ++i) third_[i] -= o.third_[i];
  return *this;
}

Jet& Jet::operator*=(double c) {
  value_ *= c;
  for (auto& x : grad_) x *= c;
  for (auto& x : hess_) x *= c;
  for (auto& x : third_) x *= c;
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  a.check_compatible(b);
  const int n = a.n_;
  Jet r(a.order_, n);
  r.value_ = a.value_ * b.value_;
  if (a.order_ >= 1)
    for (int i = 0; i < n; ++i)
      r.grad_[i] = a.grad_[i] * b.value_ + a.value_ * b.grad_[i];
  if (a.order_ >= 2)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        r.hess_[h_index(n, i, j)] = a.hess(i, j) * b.value_ +
                                    a.grad_[i] * b.grad_[j] +
                                    a.grad_[j] * b.grad_[i] +
                                    a.value_ * b.hess(i, j);
  if (a.order_ >= 3)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        for (int k = j; k < n; ++k)
          r.third_[t_index(n, i, j, k)] =
              a.third(i, j, k) * b.value_ + a.value_ * b.third(i, j, k) +
              a.hess(i, j) * b.grad_[k] + a.hess(i, k) * b.grad_[j] +
              a.hess(j, k) * b.grad_[i] + a.grad_[i] * b.hess(j, k) +
              a.grad_[j] * b.hess(i, k) + a.grad_[k] * b.hess(i, j);
  return r;
}

Jet Jet::compose(double f0, double f1, double f2, double f3) const {
  const int n = n_;
  Jet r(order_, n);
  r.value_ = f0;
  if (order_ >= 1)
    for (int i = 0; i < n; ++i) r.grad_[i] = f1 * grad_[i];
  if (order_ >= 2)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        r.hess_[h_index(n, i, j)] = f1 * hess(i, j) + f2 * grad_[i] * grad_[j];
  if (order_ >= 3)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        for (int k = j; k < n; ++k)
          r.third_[t_index(n, i, j, k)] =
              f1 * third(i, j, k) +
              f2 * (hess(i, j) * grad_[k] + hess(i, k) * grad_[j] +
                    hess(j, k) * grad_[i]) +
              f3 * grad_[i] * grad_[j] * grad_[k];
  return r;
}

bool Jet::finite() const {
  if (!std::isfinite(value_)) return false;
  for (double x : grad_) if (!std::isfinite(x)) return false;
  for (double x : hess_) if (!std::isfinite(x)) return false;
  for (double x : third_) if (!std::isfinite(x)) return false;
  return true;
}

Jet operator/(const Jet& a, const Jet& b) { return a * inv(b); }

Jet exp(const Jet& a) {
  const double e = std::exp(a.value());
  return a.compose(e, e, e, e);
}

Jet log(const Jet& a) {
  const double v = a.value();
  if (v <= 0.0) throw std::domain_error("log of non-positive value");
  return a.compose(std::log(v), 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v));
}

Jet tanh(const Jet& a) {
  const double t = std::tanh(a.value());
  const double s = 1.0 - t * t;
  return a.compose(t, s, -2.0 * t * s, -2.0 * s * (1.0 - 3.0 * t * t));
}

Jet sin(const Jet& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  return a.compose(s, c, -s, -c);
}

Jet cos(const Jet& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  return a.compose(c, -s, -c, s);
}

Jet sqrt(const Jet& a) {
  const double v = a.value();
  if (v <= 0.0) throw std::domain_error("sqrt of non-positive value");
  const double s = std::sqrt(v);
  return a.compose(s, 0.5 / s, -0.25 / (s * v), 0.375 / (s * v * v));
}

Jet inv(const Jet& a) {
  const double v = a.value();
  if (v == 0.0) throw std::domain_error("division by zero");
  const double i = 1.0 / v;
  return a.compose(i, -i * i, 2.0 * i * i * i, -6.0 * i * i * i * i);
}

Jet pow(const Jet& a, double q) {
  const double v = a.value();
  const bool integral = q == std::floor(q) && std::abs(q) < 64.0;
  if (integral) {
    const long m = long(q);
    if (m == 0) return Jet::constant(a.order(), a.dim(), 1.0);
    if (m < 0) return inv(pow(a, double(-m)));
    if (m == 1) return a;
    // square-and-multiply keeps integer powers exact at any base sign
    Jet r = a;
    for (long t = 1; t < m; ++t) r = r * a;
    return r;
  }
  if (v <= 0.0) throw std::domain_error("pow with non-integer exponent needs positive base");
  const double f0 = std::pow(v, q);
  const double f1 = q * f0 / v;
  const double f2 = q * (q - 1.0) * f0 / (v * v);
  const double f3 = q * (q - 1.0) * (q - 2.0) * f0 / (v * v * v);
  return a.compose(f0, f1, f2, f3);
}

}  // namespace riesz
