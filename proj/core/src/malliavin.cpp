#include "riesz/malliavin.hpp"

#include <algorithm>
#include <cmath>

namespace riesz {

namespace {

// Inverse of a small row-major matrix by Gaussian elimination with partial
// pivoting; returns false when a pivot underflows to zero.
bool invert_dense(std::vector<double> a, int d, std::vector<double>& out,
                  double& det) {
  std::vector<double> inv(std::size_t(d) * d, 0.0);
  for (int i = 0; i < d; ++i) inv[std::size_t(i) * d + i] = 1.0;
  det = 1.0;
  for (int col = 0; col < d; ++col) {
    int piv = col;
    for (int r = col + 1; r < d; ++r)
      if (std::abs(a[std::size_t(r) * d + col]) >
          std::abs(a[std::size_t(piv) * d + col]))
        piv = r;
    if (a[std::size_t(piv) * d + col] == 0.0) {
      det = 0.0;
      return false;
    }
    if (piv != col) {
      for (int c = 0; c < d; ++c) {
        std::swap(a[std::size_t(piv) * d + c], a[std::size_t(col) * d + c]);
        std::swap(inv[std::size_t(piv) * d + c], inv[std::size_t(col) * d + c]);
      }
      det = -det;
    }
    const double p = a[std::size_t(col) * d + col];
    det *= p;
    const double pinv = 1.0 / p;
    for (int c = 0; c < d; ++c) {
      a[std::size_t(col) * d + c] *= pinv;
      inv[std::size_t(col) * d + c] *= pinv;
    }
    for (int r = 0; r < d; ++r) {
      if (r == col) continue;
      const double m = a[std::size_t(r) * d + col];
      if (m == 0.0) continue;
      for (int c = 0; c < d; ++c) {
        a[std::size_t(r) * d + c] -= m * a[std::size_t(col) * d + c];
        inv[std::size_t(r) * d + c] -= m * inv[std::size_t(col) * d + c];
      }
    }
  }
  out = std::move(inv);
  return true;
}

double norm1(const std::vector<double>& a, int d) {
  double best = 0.0;
  for (int c = 0; c < d; ++c) {
    double s = 0.0;
    for (int r = 0; r < d; ++r) s += std::abs(a[std::size_t(r) * d + c]);
    best = std::max(best, s);
  }
  return best;
}

}  // namespace

std::vector<Jet> Functional::eval_jets(const std::vector<double>& w,
                                       int order) const {
  if (int(w.size()) != n) throw std::invalid_argument("input dimension mismatch");
  std::vector<Jet> out;
  out.reserve(components.size());
  for (const auto& c : components) out.push_back(jet_eval(c, w, order));
  return out;
}

std::vector<double> Functional::eval_values(const std::vector<double>& w) const {
  std::vector<double> v;
  v.reserve(components.size());
  for (const auto& c : components) v.push_back(jet_eval(c, w, 0).value());
  return v;
}

GFunc g_one() {
  return [](const std::vector<double>& w, int order,
            const std::vector<Jet>&) {
    return Jet::constant(order, int(w.size()), 1.0);
  };
}

GFunc g_expr(Expr e) {
  return [e = std::move(e)](const std::vector<double>& w, int order,
                            const std::vector<Jet>&) {
    return jet_eval(e, w, order);
  };
}

GFunc g_compose_component(int comp, ScalarC2 psi) {
  return [comp, psi = std::move(psi)](const std::vector<double>&, int order,
                                      const std::vector<Jet>& f_jets) {
    if (order > 2)
      throw WeightOrderError("composed G supports jets up to order 2");
    const Jet base = f_jets.at(comp).truncated(order);
    const auto v = psi(base.value());
    return base.compose(v[0], v[1], v[2], 0.0);
  };
}

GFunc g_compose_product(std::vector<ScalarC2> factors) {
  return [factors = std::move(factors)](const std::vector<double>& w, int order,
                                        const std::vector<Jet>& f_jets) {
    if (order > 2)
      throw WeightOrderError("composed G supports jets up to order 2");
    if (factors.size() != f_jets.size())
      throw std::invalid_argument("bump factor count must match d");
    Jet acc = Jet::constant(order, int(w.size()), 1.0);
    for (std::size_t i = 0; i < factors.size(); ++i) {
      const Jet base = f_jets[i].truncated(order);
      const auto v = factors[i](base.value());
      acc = acc * base.compose(v[0], v[1], v[2], 0.0);
    }
    return acc;
  };
}

GFunc g_product(GFunc a, GFunc b) {
  return [a = std::move(a), b = std::move(b)](const std::vector<double>& w,
                                              int order,
                                              const std::vector<Jet>& f_jets) {
    return a(w, order, f_jets) * b(w, order, f_jets);
  };
}

MalliavinFrame::MalliavinFrame(const Functional& f, std::vector<double> w,
                               int f_order, double det_rel_threshold)
    : f_(f), w_(std::move(w)), f_order_(f_order) {
  if (f_order < 2 || f_order > 3)
    throw WeightOrderError("frame order must be 2 or 3 (weights up to order 2)");
  f_jets_ = f_.eval_jets(w_, f_order);

  const int d = f_.d, n = f_.n;
  df_.reserve(std::size_t(d) * n);
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < n; ++k) df_.push_back(f_jets_[j].partial(k));

  // covariance as jets of order f_order - 1
  const int q = f_order - 1;
  std::vector<Jet> sigma;
  sigma.reserve(std::size_t(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      if (j < i) {
        sigma.push_back(sigma[std::size_t(j) * d + i]);
        continue;
      }
      Jet s = Jet::constant(q, n, 0.0);
      for (int k = 0; k < n; ++k) s += df(i, k) * df(j, k);
      sigma.push_back(std::move(s));
    }

  cov_.d = d;
  cov_.sigma.resize(std::size_t(d) * d);
  double trace = 0.0;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j)
      cov_.sigma[std::size_t(i) * d + j] = sigma[std::size_t(i) * d + j].value();
    trace += cov_.at(i, i);
  }

  std::vector<double> m0;
  double det = 0.0;
  const bool ok = invert_dense(cov_.sigma, d, m0, det);
  cov_.det = det;
  const double scale = std::pow(std::max(trace / d, 0.0), double(d));
  if (!ok || !(std::abs(det) > det_rel_threshold * std::max(scale, 1e-300))) {
    degenerate_ = true;
    return;
  }
  cov_.inverse = m0;
  cov_.cond = norm1(cov_.sigma, d) * norm1(m0, d);

  // sigma-hat as a jet matrix: with E = sigma - sigma(0) (zero value part)
  // and X = m0 E, the truncated Neumann series (I - X + X^2 - ...) m0 is the
  // analytic propagation of d(sigma-hat) = -sigma-hat d(sigma) sigma-hat.
  std::vector<Jet> e_jets;
  e_jets.reserve(sigma.size());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      Jet e = sigma[std::size_t(i) * d + j];
      e.value() = 0.0;
      e_jets.push_back(std::move(e));
    }

  auto matmul_scalar_jet = [&](const std::vector<double>& a,
                               const std::vector<Jet>& b) {
    std::vector<Jet> c(std::size_t(d) * d, Jet::constant(q, n, 0.0));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        Jet s = Jet::constant(q, n, 0.0);
        for (int k = 0; k < d; ++k)
          s += b[std::size_t(k) * d + j] * a[std::size_t(i) * d + k];
        c[std::size_t(i) * d + j] = std::move(s);
      }
    return c;
  };
  auto matmul_jet = [&](const std::vector<Jet>& a, const std::vector<Jet>& b) {
    std::vector<Jet> c(std::size_t(d) * d, Jet::constant(q, n, 0.0));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        Jet s = Jet::constant(q, n, 0.0);
        for (int k = 0; k < d; ++k)
          s += a[std::size_t(i) * d + k] * b[std::size_t(k) * d + j];
        c[std::size_t(i) * d + j] = std::move(s);
      }
    return c;
  };

  const std::vector<Jet> x = matmul_scalar_jet(m0, e_jets);
  // series I - X + X^2 - ... up to the jet order q
  std::vector<Jet> series(std::size_t(d) * d, Jet::constant(q, n, 0.0));
  for (int i = 0; i < d; ++i) series[std::size_t(i) * d + i].value() = 1.0;
  std::vector<Jet> term = series;
  for (int m = 1; m <= q; ++m) {
    term = matmul_jet(term, x);
    for (std::size_t t = 0; t < term.size(); ++t) {
      if (m % 2 == 1)
        series[t] -= term[t];
      else
        series[t] += term[t];
    }
  }
  // sigma_hat = series * m0 (scalar on the right)
  sigma_hat_.assign(std::size_t(d) * d, Jet::constant(q, n, 0.0));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      Jet s = Jet::constant(q, n, 0.0);
      for (int k = 0; k < d; ++k)
        s += series[std::size_t(i) * d + k] * m0[std::size_t(k) * d + j];
      sigma_hat_[std::size_t(i) * d + j] = std::move(s);
    }
}

std::vector<double> MalliavinFrame::f_values() const {
  std::vector<double> v(f_.d);
  for (int j = 0; j < f_.d; ++j) v[j] = f_jets_[j].value();
  return v;
}

std::vector<Jet> MalliavinFrame::weights(const Jet& g_jet, int r) const {
  if (degenerate_) throw DegenerateSampleError(cov_.det);
  if (r < 0 || r + 2 > f_order_)
    throw WeightOrderError("frame prepared with too low an F-jet order");
  if (g_jet.order() < r + 1)
    throw WeightOrderError("G jet order too low for requested weight order");

  const int d = f_.d, n = f_.n;
  const int q = r + 1;
  const Jet g = g_jet.truncated(q);

  std::vector<Jet> h;
  h.reserve(d);
  std::vector<Jet> t(d, Jet::constant(q, n, 0.0));
  std::vector<Jet> v(n, Jet::constant(q, n, 0.0));
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) t[j] = g * shat(j, i).truncated(q);
    for (int k = 0; k < n; ++k) {
      Jet s = Jet::constant(q, n, 0.0);
      for (int j = 0; j < d; ++j) s += t[j] * df(j, k).truncated(q);
      v[k] = std::move(s);
    }
    // H_i = -delta(V) = -(sum_k V_k w_k - sum_k d_k V_k)
    Jet div = Jet::constant(r, n, 0.0);
    for (int k = 0; k < n; ++k) {
      div += v[k].truncated(r) * Jet::variable(r, n, k, w_[k]);
      div -= v[k].partial(k);
    }
    h.push_back(-div);
  }
  return h;
}

CovMatrix malliavin_cov(const Functional& f, const std::vector<double>& w,
                        double det_rel_threshold) {
  MalliavinFrame frame(f, w, 2, det_rel_threshold);
  return frame.cov();
}

double skorohod(const Functional& u, const std::vector<double>& w) {
  if (u.d != u.n)
    throw std::invalid_argument("skorohod needs a vector field with d = n");
  const auto jets = u.eval_jets(w, 1);
  double s = 0.0;
  for (int k = 0; k < u.n; ++k) s += jets[k].value() * w[k] - jets[k].grad(k);
  return s;
}

double ou_operator(const Expr& f, const std::vector<double>& w) {
  const Jet j = jet_eval(f, w, 2);
  double s = 0.0;
  for (int k = 0; k < int(w.size()); ++k)
    s += j.grad(k) * w[k] - j.hess(k, k);
  return s;
}

std::vector<double> weight_first(const Functional& f, const GFunc& g,
                                 const std::vector<double>& w,
                                 double det_rel_threshold) {
  MalliavinFrame frame(f, w, 2, det_rel_threshold);
  const Jet gj = g(w, 1, frame.f_jets());
  const auto jets = frame.weights(gj, 0);
  std::vector<double> out(jets.size());
  for (std::size_t i = 0; i < jets.size(); ++i) out[i] = jets[i].value();
  return out;
}

double weight_multi(const Functional& f, const GFunc& g,
                    const std::vector<double>& w, const std::vector<int>& alpha,
                    double det_rel_threshold) {
  if (alpha.empty()) throw WeightOrderError("empty multi-index");
  if (alpha.size() > 2)
    throw WeightOrderError("weight order capped at |alpha| = 2");
  for (int a : alpha)
    if (a < 0 || a >= f.d) throw std::out_of_range("multi-index component out of range");

  if (alpha.size() == 1) return weight_first(f, g, w, det_rel_threshold)[alpha[0]];

  MalliavinFrame frame(f, w, 3, det_rel_threshold);
  const Jet gj = g(w, 2, frame.f_jets());
  const Jet inner = frame.weights(gj, 1)[alpha[0]];
  return frame.weights(inner, 0)[alpha[1]].value();
}

WeightSample make_weight_sample(const Functional& f, const GFunc& g,
                                const std::vector<double>& w, int order,
                                double det_rel_threshold) {
  if (order < 1 || order > 2) throw WeightOrderError("order must be 1 or 2");
  WeightSample s;
  s.w = w;
  MalliavinFrame frame(f, w, order + 1, det_rel_threshold);
  if (frame.degenerate()) throw DegenerateSampleError(frame.cov().det);
  s.f_val = frame.f_values();
  s.sigma_cond = frame.cov().cond;
  const Jet gj = g(w, order, frame.f_jets());
  s.g_val = gj.value();
  const auto h1 = frame.weights(gj, order == 2 ? 1 : 0);
  for (int i = 0; i < f.d; ++i) s.h[{i}] = h1[i].value();
  if (order == 2) {
    for (int a = 0; a < f.d; ++a) {
      const auto outer = frame.weights(h1[a], 0);
      for (int b = 0; b < f.d; ++b) s.h[{a, b}] = outer[b].value();
    }
  }
  return s;
}

}  // namespace riesz
