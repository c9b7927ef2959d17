#include "riesz/scenarios.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace riesz {

namespace {

constexpr double kPi = std::numbers::pi;

// Compactly supported smooth bump exp(1 - 1/(1 - (x/c)^2)) on (-c, c),
// with first and second derivatives; the G-catalog entry "bumpF1" is this
// applied to the first component of F.
std::array<double, 3> mollifier_jet(double x, double c) {
  const double u = x / c;
  const double s = 1.0 - u * u;
  if (s <= 0.0) return {0.0, 0.0, 0.0};
  const double v = std::exp(1.0 - 1.0 / s);
  const double d1 = v * (-2.0 * u / (c * s * s));
  const double d2 =
      v / (c * c) * (4.0 * u * u / (s * s * s * s) - 2.0 / (s * s) - 8.0 * u * u / (s * s * s));
  return {v, d1, d2};
}

void add_g_catalog(Scenario& s) {
  s.g_catalog["one"] = g_one();
  s.g_catalog["F1"] = g_expr(s.f.components[0]);
  s.g_catalog["F1sq"] = g_expr(s.f.components[0] * s.f.components[0]);
  s.g_catalog["bumpF1"] =
      g_compose_component(0, [](double x) { return mollifier_jet(x, 2.0); });
}

double gauss_density(const std::vector<double>& x) {
  double q = 0.0;
  for (double v : x) q += v * v;
  return std::pow(2.0 * kPi, -0.5 * double(x.size())) * std::exp(-0.5 * q);
}

Scenario gauss_identity(int d) {
  Scenario s;
  s.id = "gauss-identity-d" + std::to_string(d);
  s.n = s.d = d;
  s.f.n = s.f.d = d;
  for (int i = 0; i < d; ++i) s.f.components.push_back(var(i));
  s.analytic_density = gauss_density;
  s.analytic_score = [](const std::vector<double>& x) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = -x[i];
    return g;
  };
  s.notes = "standard Gaussian, exact oracle for every estimator";
  add_g_catalog(s);
  return s;
}

Scenario linear_scenario(const ScenarioParams& p) {
  const int d = p.linear_d;
  if (d < 1) throw std::invalid_argument("linear scenario needs d >= 1");
  if (int(p.linear_a.size()) != d * d || int(p.linear_b.size()) != d)
    throw std::invalid_argument("linear scenario needs a d x d matrix and d-vector");

  Scenario s;
  s.id = "linear";
  s.n = s.d = d;
  s.f.n = s.f.d = d;
  for (int i = 0; i < d; ++i) {
    Expr e = lit(p.linear_b[i]);
    for (int j = 0; j < d; ++j) {
      const double aij = p.linear_a[std::size_t(i) * d + j];
      if (aij != 0.0) e = e + lit(aij) * var(j);
    }
    s.f.components.push_back(e);
  }

  // covariance AA^T and its inverse for the analytic N(b, AA^T) density
  std::vector<double> cov(std::size_t(d) * d, 0.0);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double acc = 0.0;
      for (int k = 0; k < d; ++k)
        acc += p.linear_a[std::size_t(i) * d + k] * p.linear_a[std::size_t(j) * d + k];
      cov[std::size_t(i) * d + j] = acc;
    }
  // invert by Gauss-Jordan; reject a degenerate A
  std::vector<double> inv(std::size_t(d) * d, 0.0), work = cov;
  for (int i = 0; i < d; ++i) inv[std::size_t(i) * d + i] = 1.0;
  double det = 1.0;
  for (int c = 0; c < d; ++c) {
    int piv = c;
    for (int r = c + 1; r < d; ++r)
      if (std::abs(work[std::size_t(r) * d + c]) > std::abs(work[std::size_t(piv) * d + c]))
        piv = r;
    if (std::abs(work[std::size_t(piv) * d + c]) < 1e-12)
      throw std::invalid_argument("linear scenario matrix A is degenerate");
    if (piv != c) {
      for (int k = 0; k < d; ++k) {
        std::swap(work[std::size_t(piv) * d + k], work[std::size_t(c) * d + k]);
        std::swap(inv[std::size_t(piv) * d + k], inv[std::size_t(c) * d + k]);
      }
      det = -det;
    }
    const double pv = work[std::size_t(c) * d + c];
    det *= pv;
    for (int k = 0; k < d; ++k) {
      work[std::size_t(c) * d + k] /= pv;
      inv[std::size_t(c) * d + k] /= pv;
    }
    for (int r = 0; r < d; ++r) {
      if (r == c) continue;
      const double m = work[std::size_t(r) * d + c];
      for (int k = 0; k < d; ++k) {
        work[std::size_t(r) * d + k] -= m * work[std::size_t(c) * d + k];
        inv[std::size_t(r) * d + k] -= m * inv[std::size_t(c) * d + k];
      }
    }
  }

  const std::vector<double> b = p.linear_b;
  const double norm = std::pow(2.0 * kPi, -0.5 * d) / std::sqrt(std::abs(det));
  s.analytic_density = [d, inv, b, norm](const std::vector<double>& x) {
    double q = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        q += (x[i] - b[i]) * inv[std::size_t(i) * d + j] * (x[j] - b[j]);
    return norm * std::exp(-0.5 * q);
  };
  s.analytic_score = [d, inv, b](const std::vector<double>& x) {
    std::vector<double> g(d, 0.0);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        g[i] -= inv[std::size_t(i) * d + j] * (x[j] - b[j]);
    return g;
  };
  s.notes = "linear Gaussian F = A w + b";
  add_g_catalog(s);
  return s;
}

Scenario poly_perturb(const ScenarioParams& p) {
  Scenario s;
  s.id = "poly-perturb";
  s.n = s.d = 2;
  s.f.n = s.f.d = 2;
  // cubic coupling w1^2 w2 put through tanh so its derivatives stay bounded
  // and the Jacobian keeps a positive determinant at gamma = 0.1
  s.f.components.push_back(var(0) + lit(p.gamma) * tanh(var(0) * var(0) * var(1)));
  s.f.components.push_back(var(1));
  s.notes = "non-Gaussian perturbation, no closed-form density";

  // build-time Jacobian positivity check on a 33^n grid over [-6,6]^n
  const int per_axis = 33;
  for (int ia = 0; ia < per_axis; ++ia)
    for (int ib = 0; ib < per_axis; ++ib) {
      const std::vector<double> w = {-6.0 + 12.0 * ia / (per_axis - 1),
                                     -6.0 + 12.0 * ib / (per_axis - 1)};
      const auto jets = s.f.eval_jets(w, 1);
      const double det = jets[0].grad(0) * jets[1].grad(1) -
                         jets[0].grad(1) * jets[1].grad(0);
      if (!(det > 0.0))
        throw std::invalid_argument(
            "poly-perturb gamma too large: Jacobian loses positivity on [-6,6]^n");
    }
  add_g_catalog(s);
  return s;
}

Scenario tanh_couple() {
  Scenario s;
  s.id = "tanh-couple";
  s.n = s.d = 2;
  s.f.n = s.f.d = 2;
  s.f.components.push_back(var(0) + lit(0.5) * tanh(var(1)));
  s.f.components.push_back(var(1) + lit(0.5) * tanh(var(0)));
  s.notes = "coupled non-linear map, exercised by duality and KDE cross-checks";
  add_g_catalog(s);
  return s;
}

Scenario chi_square() {
  Scenario s;
  s.id = "chi-square";
  s.n = s.d = 1;
  s.f.n = s.f.d = 1;
  s.f.components.push_back(var(0) * var(0));
  s.local_only = true;
  s.analytic_density = [](const std::vector<double>& x) {
    if (x[0] <= 0.0) return 0.0;
    return std::exp(-0.5 * x[0]) / std::sqrt(2.0 * kPi * x[0]);
  };
  s.analytic_score = [](const std::vector<double>& x) {
    return std::vector<double>{-0.5 - 0.5 / x[0]};
  };
  s.notes = "F = w1^2, degenerate at w1 = 0; density formula valid via localization";
  add_g_catalog(s);
  return s;
}

}  // namespace

Scenario get_scenario(const std::string& id, const ScenarioParams& params) {
  if (id == "gauss-identity-d1") return gauss_identity(1);
  if (id == "gauss-identity-d2") return gauss_identity(2);
  if (id == "gauss-identity-d3") return gauss_identity(3);
  if (id == "linear") return linear_scenario(params);
  if (id == "poly-perturb") return poly_perturb(params);
  if (id == "tanh-couple") return tanh_couple();
  if (id == "chi-square") return chi_square();
  throw std::invalid_argument("unknown scenario id: " + id);
}

std::vector<std::string> scenario_ids() {
  return {"gauss-identity-d1", "gauss-identity-d2", "gauss-identity-d3",
          "linear", "poly-perturb", "tanh-couple", "chi-square"};
}

}  // namespace riesz
