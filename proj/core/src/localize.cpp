#include "riesz/localize.hpp"

#include <algorithm>
#include <cmath>

namespace riesz {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Left ramp exp(1 - eps/t) with t = x - (a - eps) in (0, eps]; the right
// ramp is its mirror image. Derivatives follow from d/dt (1 - eps/t).
std::array<double, 3> ramp_up_jet(double eps, double a, double x) {
  const double t = x - (a - eps);
  const double v = std::exp(1.0 - eps / t);
  const double l1 = eps / (t * t);                    // (ln ramp)'
  const double l2 = -2.0 * eps / (t * t * t);         // (ln ramp)''
  return {v, v * l1, v * (l1 * l1 + l2)};
}

}  // namespace

Domain Domain::box(std::vector<double> lo, std::vector<double> hi) {
  if (lo.size() != hi.size() || lo.empty())
    throw std::invalid_argument("box needs matching lo/hi");
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (!(lo[i] < hi[i])) throw std::invalid_argument("empty box");
  Domain d;
  d.shape = Shape::kBox;
  d.lo = std::move(lo);
  d.hi = std::move(hi);
  return d;
}

Domain Domain::ball(std::vector<double> center, double radius) {
  if (center.empty() || !(radius > 0.0))
    throw std::invalid_argument("ball needs a center and positive radius");
  Domain d;
  d.shape = Shape::kBall;
  d.center = std::move(center);
  d.radius = radius;
  return d;
}

int Domain::dim() const {
  return shape == Shape::kBox ? int(lo.size()) : int(center.size());
}

double bump_1d(double eps, double a, double b, double x) {
  return bump_1d_jet(eps, a, b, x)[0];
}

std::array<double, 3> bump_1d_jet(double eps, double a, double b, double x) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
  if (a > b) throw std::invalid_argument("bump needs a <= b");
  if (x > a && x < b) return {1.0, 0.0, 0.0};
  if (a > -kInf && x <= a) {
    if (x <= a - eps) return {0.0, 0.0, 0.0};
    return ramp_up_jet(eps, a, x);
  }
  if (b < kInf && x >= b) {
    if (x >= b + eps) return {0.0, 0.0, 0.0};
    auto r = ramp_up_jet(eps, -b, -x);  // mirror
    r[1] = -r[1];
    return r;
  }
  return {1.0, 0.0, 0.0};
}

namespace {

void check_domain(const BumpParams& p) {
  const Domain& d = p.domain;
  if (!(p.eps > 0.0)) throw std::invalid_argument("eps must be > 0");
  if (d.shape == Domain::Shape::kBox) {
    for (std::size_t i = 0; i < d.lo.size(); ++i) {
      const double lo2 = d.lo[i] > -kInf ? d.lo[i] + 2.0 * p.eps : -kInf;
      const double hi2 = d.hi[i] < kInf ? d.hi[i] - 2.0 * p.eps : kInf;
      if (!(lo2 < hi2))
        throw std::invalid_argument("domain empty at dilation 2 eps");
    }
  } else {
    if (!(d.radius > 2.0 * p.eps))
      throw std::invalid_argument("domain empty at dilation 2 eps");
  }
}

// Per-axis ramp bounds of the box localizer (closed form).
void box_ramp_bounds(const Domain& d, double eps, int i, double& a, double& b) {
  a = d.lo[std::size_t(i)] > -kInf ? d.lo[std::size_t(i)] + 2.0 * eps : -kInf;
  b = d.hi[std::size_t(i)] < kInf ? d.hi[std::size_t(i)] - 2.0 * eps : kInf;
}

}  // namespace

double bump_domain(const BumpParams& params, const std::vector<double>& x) {
  check_domain(params);
  const Domain& d = params.domain;
  if (int(x.size()) != d.dim()) throw std::invalid_argument("point dimension mismatch");
  if (d.shape == Domain::Shape::kBox) {
    double v = 1.0;
    for (int i = 0; i < d.dim(); ++i) {
      double a, b;
      box_ramp_bounds(d, params.eps, i, a, b);
      v *= bump_1d(params.eps, a, b, x[std::size_t(i)]);
      if (v == 0.0) break;
    }
    return v;
  }
  double r2 = 0.0;
  for (int i = 0; i < d.dim(); ++i) {
    const double t = x[std::size_t(i)] - d.center[std::size_t(i)];
    r2 += t * t;
  }
  return bump_1d(params.eps, -kInf, d.radius - 2.0 * params.eps, std::sqrt(r2));
}

BumpJet bump_domain_jet(const BumpParams& params, const std::vector<double>& x) {
  check_domain(params);
  const Domain& dom = params.domain;
  const int d = dom.dim();
  if (int(x.size()) != d) throw std::invalid_argument("point dimension mismatch");

  BumpJet out;
  out.grad.assign(std::size_t(d), 0.0);
  out.hess.assign(std::size_t(d) * d, 0.0);

  if (dom.shape == Domain::Shape::kBox) {
    std::vector<std::array<double, 3>> f(std::size_t(d));
    for (int i = 0; i < d; ++i) {
      double a, b;
      box_ramp_bounds(dom, params.eps, i, a, b);
      f[std::size_t(i)] = bump_1d_jet(params.eps, a, b, x[std::size_t(i)]);
    }
    double v = 1.0;
    for (int i = 0; i < d; ++i) v *= f[std::size_t(i)][0];
    out.value = v;
    if (v == 0.0) return out;
    for (int i = 0; i < d; ++i) {
      double gi = f[std::size_t(i)][1];
      for (int j = 0; j < d; ++j)
        if (j != i) gi *= f[std::size_t(j)][0];
      out.grad[std::size_t(i)] = gi;
    }
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double h = i == j ? f[std::size_t(i)][2] : f[std::size_t(i)][1] * f[std::size_t(j)][1];
        for (int k = 0; k < d; ++k)
          if (k != i && k != j) h *= f[std::size_t(k)][0];
        out.hess[std::size_t(i) * d + j] = h;
      }
    return out;
  }

  // radial: Psi(x) = psi(|x - c|) with the upper ramp at radius R - 2 eps
  double r2 = 0.0;
  std::vector<double> u(std::size_t(d));
  for (int i = 0; i < d; ++i) {
    u[std::size_t(i)] = x[std::size_t(i)] - dom.center[std::size_t(i)];
    r2 += u[std::size_t(i)] * u[std::size_t(i)];
  }
  const double b = dom.radius - 2.0 * params.eps;
  const double r = std::sqrt(r2);
  if (r <= b) {
    out.value = 1.0;
    return out;
  }
  const auto f = bump_1d_jet(params.eps, -kInf, b, r);
  out.value = f[0];
  if (f[0] == 0.0 || r == 0.0) return out;
  for (int i = 0; i < d; ++i) out.grad[std::size_t(i)] = f[1] * u[std::size_t(i)] / r;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const double rij = (double(i == j) - u[std::size_t(i)] * u[std::size_t(j)] / r2) / r;
      out.hess[std::size_t(i) * d + j] =
          f[2] * u[std::size_t(i)] * u[std::size_t(j)] / r2 + f[1] * rij;
    }
  return out;
}

GFunc localizer_g(const BumpParams& params) {
  check_domain(params);
  const BumpParams p = params;
  if (p.domain.shape == Domain::Shape::kBox) {
    std::vector<ScalarC2> factors;
    for (int i = 0; i < p.domain.dim(); ++i) {
      double a, b;
      box_ramp_bounds(p.domain, p.eps, i, a, b);
      factors.push_back([eps = p.eps, a, b](double y) { return bump_1d_jet(eps, a, b, y); });
    }
    return g_compose_product(std::move(factors));
  }
  // radial composition through the jet ring: psi(sqrt(sum (F^i - c_i)^2))
  return [p](const std::vector<double>& w, int order, const std::vector<Jet>& f_jets) {
    const int n = int(w.size());
    const int d = p.domain.dim();
    const double b = p.domain.radius - 2.0 * p.eps;
    Jet r2 = Jet::constant(order, n, 0.0);
    for (int i = 0; i < d; ++i) {
      const Jet t = f_jets[std::size_t(i)].truncated(order) - p.domain.center[std::size_t(i)];
      r2 += t * t;
    }
    if (r2.value() <= b * b) return Jet::constant(order, n, 1.0);
    const Jet r = sqrt(r2);
    const auto f = bump_1d_jet(p.eps, -kInf, b, r.value());
    return r.compose(f[0], f[1], f[2], 0.0);
  };
}

bool in_erosion(const Domain& domain, double eps, const std::vector<double>& x) {
  if (domain.shape == Domain::Shape::kBox) {
    for (int i = 0; i < domain.dim(); ++i) {
      if (domain.lo[std::size_t(i)] > -kInf && x[std::size_t(i)] < domain.lo[std::size_t(i)] + eps)
        return false;
      if (domain.hi[std::size_t(i)] < kInf && x[std::size_t(i)] > domain.hi[std::size_t(i)] - eps)
        return false;
    }
    return true;
  }
  double r2 = 0.0;
  for (int i = 0; i < domain.dim(); ++i) {
    const double t = x[std::size_t(i)] - domain.center[std::size_t(i)];
    r2 += t * t;
  }
  return std::sqrt(r2) <= domain.radius - eps;
}

LogGradBoundCheck log_grad_bound_check(const BumpParams& params, double p,
                                       int grid_per_axis) {
  check_domain(params);
  if (p < 1.0) throw ExponentError("log-gradient bound check requires p >= 1");
  const int d = params.domain.dim();
  if (grid_per_axis < 8) throw std::invalid_argument("grid too coarse");

  // bounding box of the eps-dilation, finite even for half-open boxes
  std::vector<double> lo(std::size_t(d)), hi(std::size_t(d));
  if (params.domain.shape == Domain::Shape::kBox) {
    for (int i = 0; i < d; ++i) {
      lo[std::size_t(i)] = params.domain.lo[std::size_t(i)] > -kInf
                               ? params.domain.lo[std::size_t(i)] + params.eps
                               : -8.0;
      hi[std::size_t(i)] = params.domain.hi[std::size_t(i)] < kInf
                               ? params.domain.hi[std::size_t(i)] - params.eps
                               : 8.0;
    }
  } else {
    for (int i = 0; i < d; ++i) {
      lo[std::size_t(i)] = params.domain.center[std::size_t(i)] - params.domain.radius;
      hi[std::size_t(i)] = params.domain.center[std::size_t(i)] + params.domain.radius;
    }
  }

  LogGradBoundCheck out;
  std::vector<int> idx(std::size_t(d), 0);
  std::vector<double> x(std::size_t(d));
  long long total = 1;
  for (int i = 0; i < d; ++i) total *= grid_per_axis;
  for (long long c = 0; c < total; ++c) {
    for (int i = 0; i < d; ++i)
      x[std::size_t(i)] = lo[std::size_t(i)] + (hi[std::size_t(i)] - lo[std::size_t(i)]) *
                                                   double(idx[std::size_t(i)]) /
                                                   double(grid_per_axis - 1);
    if (in_erosion(params.domain, params.eps, x)) {
      const BumpJet bj = bump_domain_jet(params, x);
      if (bj.value > 0.0) {
        double g2 = 0.0;
        for (int i = 0; i < d; ++i) {
          const double gi = bj.grad[std::size_t(i)] / bj.value;
          g2 += gi * gi;
        }
        out.sup_found =
            std::max(out.sup_found, std::pow(g2, 0.5 * p) * bj.value);
      }
    }
    for (int i = 0; i < d; ++i) {
      if (++idx[std::size_t(i)] < grid_per_axis) break;
      idx[std::size_t(i)] = 0;
    }
  }

  // sup over the ramp of (y^2/eps)^p exp(1-y) = eps^{-p} y^{2p} e^{1-y},
  // attained at y = 2p; the extra factor e relative to sup y^{2p} e^{-y}
  // comes from the ramp's exp(1 - y) normalization and is sharp at d = 1.
  const double y_star = std::max(2.0 * p, 1.0);
  const double ramp_sup = std::pow(y_star, 2.0 * p) * std::exp(1.0 - y_star);
  out.bound = double(d) * std::pow(params.eps, -p) * ramp_sup;
  out.holds = out.sup_found <= out.bound;
  return out;
}

EstimateResult localized_density(const Functional& f, const std::vector<double>& x,
                                 const BumpParams& params,
                                 const EstimatorConfig& cfg) {
  check_domain(params);
  if (params.domain.dim() != f.d)
    throw std::invalid_argument("domain dimension must match d");
  if (!in_erosion(params.domain, 2.0 * params.eps, x))
    throw LocalityError("probe point outside D_{2 eps}");
  EstimateResult r = estimate_density_weighted(f, localizer_g(params), x, cfg);
  r.note = "localized density (weights carry the domain bump)";
  return r;
}

}  // namespace riesz
