#include "riesz/kernel.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace riesz {

namespace {

constexpr double kPi = std::numbers::pi;

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

// Adaptive Simpson quadrature with absolute-scale recursion control.
double simpson(const std::function<double(double)>& f, double a, double b,
               double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(f, a, m, fa, flm, fm);
  const double right = simpson(f, m, b, fm, frm, fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = simpson(f, a, b, fa, fm, fb);
  const double tol = rel_tol * std::max(std::abs(whole), 1.0);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace

double unit_sphere_area(int d) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  if (d == 1) return 1.0;  // convention matching Q_1(x) = max(x, 0)
  return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
}

KernelParams KernelParams::make(int d, double r_min) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  if (r_min < 0.0) throw std::invalid_argument("r_min must be >= 0");
  KernelParams p;
  p.d = d;
  p.a_d = unit_sphere_area(d);
  p.big_a_d = d <= 2 ? 1.0 : double(d - 2);
  p.r_min = r_min;
  return p;
}

double poisson_kernel(const KernelParams& p, std::span<const double> x) {
  if (int(x.size()) != p.d) throw std::invalid_argument("point dimension mismatch");
  if (p.d == 1) return std::max(x[0], 0.0);
  const double r = norm2(x);
  if (r == 0.0) throw std::domain_error("Poisson kernel singular at x = 0");
  if (p.d == 2) return std::log(r) / p.a_d;
  return -std::pow(r, 2.0 - p.d) / p.a_d;
}

std::vector<double> grad_poisson_kernel(const KernelParams& p,
                                        std::span<const double> x) {
  if (int(x.size()) != p.d) throw std::invalid_argument("point dimension mismatch");
  if (p.d == 1) return {x[0] > 0.0 ? 1.0 : 0.0};
  const double r = norm2(x);
  if (r == 0.0) throw std::domain_error("Riesz kernel singular at x = 0");
  const double scale = p.big_a_d / (p.a_d * std::pow(r, double(p.d)));
  std::vector<double> g(p.d);
  for (int i = 0; i < p.d; ++i) g[i] = scale * x[i];
  return g;
}

std::vector<double> truncated_grad(const KernelParams& p,
                                   std::span<const double> x) {
  if (p.r_min <= 0.0) throw std::invalid_argument("truncated_grad needs r_min > 0");
  std::vector<double> g(p.d);
  grad_kernel_into(p, x.data(), g.data());
  return g;
}

void grad_kernel_into(const KernelParams& p, const double* x, double* out) {
  if (p.d == 1) {
    out[0] = x[0] > 0.0 ? 1.0 : 0.0;
    return;
  }
  double s = 0.0;
  for (int i = 0; i < p.d; ++i) s += x[i] * x[i];
  const double r = std::sqrt(s);
  if (r == 0.0) {
    // clamp convention: zero at the origin (untruncated mode never gets
    // here from the estimators; an exact hit is a null event)
    for (int i = 0; i < p.d; ++i) out[i] = 0.0;
    return;
  }
  double scale;
  if (p.r_min > 0.0 && r < p.r_min) {
    // value frozen at the radial projection onto the r_min sphere:
    // grad((r_min/r) x) = A_d/a_d * (r_min/r) x / r_min^d
    scale = p.big_a_d / (p.a_d * r * std::pow(p.r_min, double(p.d - 1)));
  } else {
    scale = p.big_a_d / (p.a_d * std::pow(r, double(p.d)));
  }
  for (int i = 0; i < p.d; ++i) out[i] = scale * x[i];
}

double sphere_component_moment(int d, double q) {
  if (d < 2) throw std::invalid_argument("sphere moment needs d >= 2");
  if (q < 0.0) throw std::invalid_argument("q must be >= 0");
  const double rel_tol = 1e-10;
  if (d == 2) {
    auto f = [q](double t) { return std::pow(std::cos(t), q); };
    return 4.0 * integrate(f, 0.0, 0.5 * kPi, rel_tol);
  }
  auto f = [q, d](double t) {
    return std::pow(std::cos(t), q) * std::pow(std::sin(t), double(d - 2));
  };
  return 2.0 * unit_sphere_area(d - 1) * integrate(f, 0.0, 0.5 * kPi, rel_tol);
}

LocalLpNorm local_lp_norm(const KernelParams& p, double q, double R, int i) {
  if (p.d < 2) throw std::invalid_argument("local_lp_norm needs d >= 2");
  if (q <= 0.0 || R <= 0.0) throw std::invalid_argument("q and R must be > 0");
  if (i < 0 || i >= p.d) throw std::out_of_range("component index out of range");
  const double radial_exp = q + p.d - p.d * q;
  if (radial_exp <= 0.0) return {0.0, false};
  const double sq = sphere_component_moment(p.d, q);
  const double value = std::pow(p.big_a_d / p.a_d, q) * sq *
                       std::pow(R, radial_exp) / radial_exp;
  return {value, true};
}

}  // namespace riesz
