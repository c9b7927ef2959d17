#include "riesz/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numbers>
#include <thread>

#include "riesz/rng.hpp"

namespace riesz {

namespace {

constexpr double kPi = std::numbers::pi;

// Compensated (Kahan) accumulator; used for every per-chunk reduction.
struct Kahan {
  double sum = 0.0, c = 0.0;
  void add(double x) {
    const double y = x - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

struct KahanVec {
  explicit KahanVec(int m) : acc(m) {}
  void add(int i, double x) { acc[std::size_t(i)].add(x); }
  void store(std::vector<double>& out) const {
    out.resize(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) out[i] = acc[i].sum;
  }
  std::vector<Kahan> acc;
};

double sample_variance(double sum, double sumsq, long long n) {
  if (n < 2) return 0.0;
  const double mean = sum / double(n);
  const double v = (sumsq - double(n) * mean * mean) / double(n - 1);
  return std::max(v, 0.0);
}

double mean_std_error(double sum, double sumsq, long long n) {
  if (n < 2) return 0.0;
  return std::sqrt(sample_variance(sum, sumsq, n) / double(n));
}

}  // namespace

const char* to_string(EstimateKind k) {
  switch (k) {
    case EstimateKind::kDensity: return "density";
    case EstimateKind::kDerivative: return "derivative";
    case EstimateKind::kConditional: return "conditional";
    case EstimateKind::kTheta: return "theta";
    case EstimateKind::kNorm: return "norm";
    case EstimateKind::kTail: return "tail";
  }
  return "?";
}

McTotals run_chunked(const EstimatorConfig& cfg, int n_terms, const ChunkFn& fn) {
  if (cfg.n_samples < 1) throw std::invalid_argument("sample count must be >= 1");
  const std::uint64_t n = std::uint64_t(cfg.n_samples);
  const std::uint64_t chunk = std::uint64_t(std::max(1, cfg.chunk));
  const std::uint64_t n_chunks = (n + chunk - 1) / chunk;

  std::vector<std::vector<double>> partials(n_chunks);
  std::vector<long long> used(n_chunks, 0), rejected(n_chunks, 0);

  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  const unsigned workers = std::min<std::uint64_t>(
      n_chunks, cfg.workers > 0 ? unsigned(cfg.workers) : hw);

  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;

  auto work = [&]() {
    try {
      for (;;) {
        const std::uint64_t c = next.fetch_add(1);
        if (c >= n_chunks) break;
        const std::uint64_t first = c * chunk;
        const std::uint64_t last = std::min(n, first + chunk);
        partials[c].assign(std::size_t(n_terms), 0.0);
        fn(first, last, partials[c], used[c], rejected[c]);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mu);
      if (!error) error = std::current_exception();
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  McTotals totals;
  totals.sums.assign(std::size_t(n_terms), 0.0);
  std::vector<Kahan> combine(static_cast<std::size_t>(n_terms));
  for (std::uint64_t c = 0; c < n_chunks; ++c) {
    for (int t = 0; t < n_terms; ++t) combine[std::size_t(t)].add(partials[c][std::size_t(t)]);
    totals.used += used[c];
    totals.rejected += rejected[c];
  }
  for (int t = 0; t < n_terms; ++t) totals.sums[std::size_t(t)] = combine[std::size_t(t)].sum;
  return totals;
}

double auto_r_min(long long n_samples, int d) {
  return std::pow(double(n_samples), -1.0 / double(d + 2));
}

double effective_r_min(const EstimatorConfig& cfg, int d) {
  if (cfg.r_min < 0.0) return 0.0;  // untruncated mode
  if (cfg.r_min == 0.0) return auto_r_min(cfg.n_samples, d);
  return cfg.r_min;
}

namespace {

EstimateResult riesz_density_impl(const Functional& f, const GFunc& g,
                                  const std::vector<double>& x,
                                  const EstimatorConfig& cfg,
                                  EstimateKind kind) {
  if (int(x.size()) != f.d) throw std::invalid_argument("probe dimension mismatch");
  const int d = f.d, n = f.n;
  const double r_min = effective_r_min(cfg, d);
  const KernelParams kp = KernelParams::make(d, r_min);

  auto chunk_fn = [&](std::uint64_t first, std::uint64_t last,
                      std::vector<double>& out, long long& used,
                      long long& rejected) {
    KahanVec acc(2);
    std::vector<double> w(n), diff(d), kern(d);
    for (std::uint64_t j = first; j < last; ++j) {
      sample_normals(cfg.seed, j, 0, w.data(), n);
      MalliavinFrame frame(f, w, 2, cfg.det_threshold);
      if (frame.degenerate()) {
        ++rejected;
        continue;
      }
      const Jet gj = g(w, 1, frame.f_jets());
      const auto h = frame.weights(gj, 0);
      for (int i = 0; i < d; ++i) diff[std::size_t(i)] = frame.f_jets()[i].value() - x[std::size_t(i)];
      grad_kernel_into(kp, diff.data(), kern.data());
      double a = 0.0;
      for (int i = 0; i < d; ++i) a -= kern[std::size_t(i)] * h[std::size_t(i)].value();
      acc.add(0, a);
      acc.add(1, a * a);
      ++used;
    }
    acc.store(out);
  };

  const McTotals totals = run_chunked(cfg, 2, chunk_fn);
  if (totals.used == 0)
    throw DegenerateModelError("all samples rejected: model numerically degenerate");

  EstimateResult r;
  r.kind = kind;
  r.value = totals.sums[0] / double(totals.used);
  r.std_error = mean_std_error(totals.sums[0], totals.sums[1], totals.used);
  r.n_used = totals.used;
  r.n_rejected = totals.rejected;
  r.r_min_used = r_min;
  r.seed = cfg.seed;
  r.p = cfg.p;
  r.x = x;
  if (r_min == 0.0 && d >= 2)
    r.note = "untruncated kernel: estimator variance is infinite, no confidence interval";
  return r;
}

}  // namespace

EstimateResult estimate_density(const Functional& f, const std::vector<double>& x,
                                const EstimatorConfig& cfg) {
  return riesz_density_impl(f, g_one(), x, cfg, EstimateKind::kDensity);
}

EstimateResult estimate_density_weighted(const Functional& f, const GFunc& g,
                                         const std::vector<double>& x,
                                         const EstimatorConfig& cfg) {
  return riesz_density_impl(f, g, x, cfg, EstimateKind::kDensity);
}

EstimateResult estimate_density_grad(const Functional& f,
                                     const std::vector<double>& x,
                                     const std::vector<int>& alpha,
                                     const EstimatorConfig& cfg) {
  if (alpha.empty()) {
    EstimateResult r = estimate_density(f, x, cfg);
    r.kind = EstimateKind::kDerivative;
    return r;
  }
  if (alpha.size() > 1)
    throw WeightOrderError("density derivatives capped at |alpha| = 1");
  const int a = alpha[0];
  if (a < 0 || a >= f.d) throw std::out_of_range("derivative index out of range");
  if (int(x.size()) != f.d) throw std::invalid_argument("probe dimension mismatch");

  const int d = f.d, n = f.n;
  const double r_min = effective_r_min(cfg, d);
  const KernelParams kp = KernelParams::make(d, r_min);

  auto chunk_fn = [&](std::uint64_t first, std::uint64_t last,
                      std::vector<double>& out, long long& used,
                      long long& rejected) {
    KahanVec acc(2);
    std::vector<double> w(n), diff(d), kern(d);
    for (std::uint64_t j = first; j < last; ++j) {
      sample_normals(cfg.seed, j, 0, w.data(), n);
      MalliavinFrame frame(f, w, 3, cfg.det_threshold);
      if (frame.degenerate()) {
        ++rejected;
        continue;
      }
      const Jet gj = g_one()(w, 2, frame.f_jets());
      const Jet inner = frame.weights(gj, 1)[std::size_t(a)];
      const auto h2 = frame.weights(inner, 0);
      for (int i = 0; i < d; ++i) diff[std::size_t(i)] = frame.f_jets()[i].value() - x[std::size_t(i)];
      grad_kernel_into(kp, diff.data(), kern.data());
      double v = 0.0;
      for (int i = 0; i < d; ++i) v -= kern[std::size_t(i)] * h2[std::size_t(i)].value();
      acc.add(0, v);
      acc.add(1, v * v);
      ++used;
    }
    acc.store(out);
  };

  const McTotals totals = run_chunked(cfg, 2, chunk_fn);
  if (totals.used == 0)
    throw DegenerateModelError("all samples rejected: model numerically degenerate");

  EstimateResult r;
  r.kind = EstimateKind::kDerivative;
  r.value = totals.sums[0] / double(totals.used);
  r.std_error = mean_std_error(totals.sums[0], totals.sums[1], totals.used);
  r.n_used = totals.used;
  r.n_rejected = totals.rejected;
  r.r_min_used = r_min;
  r.seed = cfg.seed;
  r.p = cfg.p;
  r.x = x;
  return r;
}

EstimateResult estimate_conditional(const Functional& f, const GFunc& g,
                                    const std::vector<double>& x,
                                    const EstimatorConfig& cfg) {
  if (int(x.size()) != f.d) throw std::invalid_argument("probe dimension mismatch");
  const int d = f.d, n = f.n;
  const double r_min = effective_r_min(cfg, d);
  const KernelParams kp = KernelParams::make(d, r_min);

  auto chunk_fn = [&](std::uint64_t first, std::uint64_t last,
                      std::vector<double>& out, long long& used,
                      long long& rejected) {
    KahanVec acc(5);
    std::vector<double> w(n), diff(d), kern(d);
    for (std::uint64_t j = first; j < last; ++j) {
      sample_normals(cfg.seed, j, 0, w.data(), n);
      MalliavinFrame frame(f, w, 2, cfg.det_threshold);
      if (frame.degenerate()) {
        ++rejected;
        continue;
      }
      const Jet gj = g(w, 1, frame.f_jets());
      const auto h_g = frame.weights(gj, 0);
      const Jet one = Jet::constant(1, n, 1.0);
      const auto h_1 = frame.weights(one, 0);
      for (int i = 0; i < d; ++i) diff[std::size_t(i)] = frame.f_jets()[i].value() - x[std::size_t(i)];
      grad_kernel_into(kp, diff.data(), kern.data());
      double num = 0.0, den = 0.0;
      for (int i = 0; i < d; ++i) {
        num -= kern[std::size_t(i)] * h_g[std::size_t(i)].value();
        den -= kern[std::size_t(i)] * h_1[std::size_t(i)].value();
      }
      acc.add(0, num);
      acc.add(1, den);
      acc.add(2, num * num);
      acc.add(3, den * den);
      acc.add(4, num * den);
      ++used;
    }
    acc.store(out);
  };

  const McTotals totals = run_chunked(cfg, 5, chunk_fn);
  if (totals.used == 0)
    throw DegenerateModelError("all samples rejected: model numerically degenerate");

  const double nn = double(totals.used);
  const double a_mean = totals.sums[0] / nn;
  const double b_mean = totals.sums[1] / nn;
  if (!(b_mean > cfg.denom_floor))
    throw OutsideSupportError("denominator density below floor: x outside support");

  const double var_a = sample_variance(totals.sums[0], totals.sums[2], totals.used);
  const double var_b = sample_variance(totals.sums[1], totals.sums[3], totals.used);
  const double cov_ab =
      totals.used < 2 ? 0.0
                      : (totals.sums[4] - nn * a_mean * b_mean) / (nn - 1.0);
  // first-order delta method for the ratio a/b
  const double var_ratio = (var_a / (b_mean * b_mean) +
                            a_mean * a_mean * var_b / std::pow(b_mean, 4) -
                            2.0 * a_mean * cov_ab / std::pow(b_mean, 3)) /
                           nn;

  EstimateResult r;
  r.kind = EstimateKind::kConditional;
  r.value = a_mean / b_mean;
  r.std_error = std::sqrt(std::max(var_ratio, 0.0));
  r.n_used = totals.used;
  r.n_rejected = totals.rejected;
  r.r_min_used = r_min;
  r.seed = cfg.seed;
  r.p = cfg.p;
  r.x = x;
  return r;
}

EstimateResult estimate_theta(const Functional& f, double p,
                              const std::vector<std::vector<double>>& probes,
                              const EstimatorConfig& cfg) {
  const int d = f.d, n = f.n;
  if (!(p > double(d))) throw ExponentError("Theta_p requires p > d");
  if (probes.empty()) throw std::invalid_argument("Theta needs a non-empty probe grid");
  for (const auto& a : probes)
    if (int(a.size()) != d) throw std::invalid_argument("probe dimension mismatch");

  const double q = p / (p - 1.0);
  const int np = int(probes.size());
  const int n_terms = 2 * np * d;
  const KernelParams kp = KernelParams::make(d, 0.0);  // untruncated by definition

  std::vector<double> flat(std::size_t(np) * d);
  for (int a = 0; a < np; ++a)
    for (int i = 0; i < d; ++i) flat[std::size_t(a) * d + i] = probes[std::size_t(a)][std::size_t(i)];

  auto chunk_fn = [&](std::uint64_t first, std::uint64_t last,
                      std::vector<double>& out, long long& used,
                      long long& rejected) {
    (void)rejected;  // Theta is a property of the law of F alone: no weights
    KahanVec acc(n_terms);
    std::vector<double> w(n), fv(d), diff(d), kern(d);
    for (std::uint64_t j = first; j < last; ++j) {
      sample_normals(cfg.seed, j, 0, w.data(), n);
      const auto jets = f.eval_jets(w, 0);
      for (int i = 0; i < d; ++i) fv[std::size_t(i)] = jets[std::size_t(i)].value();
      for (int a = 0; a < np; ++a) {
        for (int i = 0; i < d; ++i)
          diff[std::size_t(i)] = fv[std::size_t(i)] - flat[std::size_t(a) * d + i];
        grad_kernel_into(kp, diff.data(), kern.data());
        for (int i = 0; i < d; ++i) {
          const double v = std::pow(std::abs(kern[std::size_t(i)]), q);
          const int base = 2 * (a * d + i);
          acc.add(base, v);
          acc.add(base + 1, v * v);
        }
      }
      ++used;
    }
    acc.store(out);
  };

  const McTotals totals = run_chunked(cfg, n_terms, chunk_fn);
  const double nn = double(totals.used);

  double best = -1.0;
  double best_se = 0.0;
  for (int a = 0; a < np; ++a) {
    double t = 0.0, se = 0.0;
    for (int i = 0; i < d; ++i) {
      const int base = 2 * (a * d + i);
      const double m = totals.sums[std::size_t(base)] / nn;
      const double se_m = mean_std_error(totals.sums[std::size_t(base)],
                                         totals.sums[std::size_t(base + 1)], totals.used);
      if (m > 0.0) {
        t += std::pow(m, 1.0 / q);
        se += (1.0 / q) * std::pow(m, 1.0 / q - 1.0) * se_m;
      }
    }
    if (t > best) {
      best = t;
      best_se = se;
    }
  }

  EstimateResult r;
  r.kind = EstimateKind::kTheta;
  r.value = best;
  r.std_error = best_se;
  r.n_used = totals.used;
  r.n_rejected = 0;
  r.r_min_used = 0.0;
  r.seed = cfg.seed;
  r.p = p;
  return r;
}

TheoreticalConstants theoretical_constants(int d, double p, double norm_w1p) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  if (!(p > double(d))) throw ExponentError("constants require p > d");
  const double big_a = KernelParams::make(d).big_a_d;
  TheoreticalConstants c;
  c.k = double(d - 1) * p / (p - double(d));
  const double aq = std::pow(big_a, p / (p - 1.0));
  c.big_k = 1.0 + 2.0 * aq * std::pow((p - 1.0) / (p - double(d)) * 2.0 * d * aq, c.k);
  c.theta_bound = double(d) * c.big_k * std::pow(norm_w1p, c.k);
  c.sup_bound = 2.0 * double(d) * c.big_k * std::pow(norm_w1p, c.k + 1.0);
  return c;
}

EstimateResult sobolev_norm_one(const Functional& f, double p,
                                const EstimatorConfig& cfg) {
  if (p < 1.0) throw ExponentError("Sobolev norm requires p >= 1");
  const int d = f.d, n = f.n;
  const int n_terms = 2 * d;

  auto chunk_fn = [&](std::uint64_t first, std::uint64_t last,
                      std::vector<double>& out, long long& used,
                      long long& rejected) {
    KahanVec acc(n_terms);
    std::vector<double> w(n);
    for (std::uint64_t j = first; j < last; ++j) {
      sample_normals(cfg.seed, j, 0, w.data(), n);
      MalliavinFrame frame(f, w, 2, cfg.det_threshold);
      if (frame.degenerate()) {
        ++rejected;
        continue;
      }
      const Jet one = Jet::constant(1, n, 1.0);
      const auto h = frame.weights(one, 0);
      for (int i = 0; i < d; ++i) {
        const double v = std::pow(std::abs(h[std::size_t(i)].value()), p);
        acc.add(2 * i, v);
        acc.add(2 * i + 1, v * v);
      }
      ++used;
    }
    acc.store(out);
  };

  const McTotals totals = run_chunked(cfg, n_terms, chunk_fn);
  if (totals.used == 0)
    throw DegenerateModelError("all samples rejected: model numerically degenerate");
  const double nn = double(totals.used);

  double value = 1.0, se = 0.0;
  for (int i = 0; i < d; ++i) {
    const double m = totals.sums[std::size_t(2 * i)] / nn;
    const double se_m =
        mean_std_error(totals.sums[std::size_t(2 * i)], totals.sums[std::size_t(2 * i + 1)], totals.used);
    if (m > 0.0) {
      value += std::pow(m, 1.0 / p);
      se += (1.0 / p) * std::pow(m, 1.0 / p - 1.0) * se_m;
    }
  }

  EstimateResult r;
  r.kind = EstimateKind::kNorm;
  r.value = value;
  r.std_error = se;
  r.n_used = totals.used;
  r.n_rejected = totals.rejected;
  r.seed = cfg.seed;
  r.p = p;
  r.note = "upper bound via H (conditional-expectation projection not applied)";
  return r;
}

TailCheck tail_bound_check(const Functional& f, const std::vector<double>& x,
                           double a, double p, const EstimatorConfig& cfg,
                           const std::vector<std::vector<double>>& theta_probes) {
  const int d = f.d;
  if (!(a > 0.0) || !(a < 1.0 / double(d) - 1.0 / p))
    throw ExponentError("tail check requires 0 < a < 1/d - 1/p");

  TailCheck out;
  out.p_bar = 1.0 / (a + 1.0 / p);

  const EstimateResult lhs = estimate_density(f, x, cfg);
  out.lhs = lhs.value;
  out.lhs_se = lhs.std_error;

  std::vector<std::vector<double>> probes = theta_probes;
  if (probes.empty()) probes = make_probe_grid(d, -3.0, 3.0, d >= 3 ? 7 : 13);
  probes.push_back(x);
  const EstimateResult theta = estimate_theta(f, out.p_bar, probes, cfg);
  out.theta = theta.value;

  const EstimateResult norm = sobolev_norm_one(f, p, cfg);
  out.norm_w1p = norm.value;

  // empirical mu(B_2(x))
  const int n = f.n;
  auto chunk_fn = [&](std::uint64_t first, std::uint64_t last,
                      std::vector<double>& outv, long long& used,
                      long long& rejected) {
    (void)rejected;
    KahanVec acc(1);
    std::vector<double> w(n);
    for (std::uint64_t j = first; j < last; ++j) {
      sample_normals(cfg.seed, j, 0, w.data(), n);
      const auto fv = f.eval_values(w);
      double s = 0.0;
      for (int i = 0; i < d; ++i) s += (fv[std::size_t(i)] - x[std::size_t(i)]) * (fv[std::size_t(i)] - x[std::size_t(i)]);
      acc.add(0, s <= 4.0 ? 1.0 : 0.0);
      ++used;
    }
    acc.store(outv);
  };
  const McTotals totals = run_chunked(cfg, 1, chunk_fn);
  out.mu_ball = totals.sums[0] / double(totals.used);
  const double se_ball =
      std::sqrt(std::max(out.mu_ball * (1.0 - out.mu_ball), 0.0) / double(totals.used));

  out.rhs = out.theta * (double(d) + out.norm_w1p) * std::pow(out.mu_ball, a);
  // first-order error propagation, taken additively (conservative)
  double rhs_se = theta.std_error * (double(d) + out.norm_w1p) * std::pow(out.mu_ball, a);
  rhs_se += out.theta * norm.std_error * std::pow(out.mu_ball, a);
  if (out.mu_ball > 0.0)
    rhs_se += out.theta * (double(d) + out.norm_w1p) * a *
              std::pow(out.mu_ball, a - 1.0) * se_ball;
  out.rhs_se = rhs_se;

  out.holds = out.lhs <= out.rhs + 3.0 * (out.lhs_se + out.rhs_se);
  return out;
}

SmoothingCheck smoothing_check(const Functional& f, double noise_sd,
                               const std::vector<double>& x,
                               const EstimatorConfig& cfg) {
  if (noise_sd < 0.0) throw std::invalid_argument("noise_sd must be >= 0");
  if (int(x.size()) != f.d) throw std::invalid_argument("probe dimension mismatch");
  const int d = f.d, n = f.n;
  const double r_min = effective_r_min(cfg, d);
  const KernelParams kp = KernelParams::make(d, r_min);
  const double p = cfg.p;
  const int n_terms = 2 + d;

  auto chunk_fn = [&](std::uint64_t first, std::uint64_t last,
                      std::vector<double>& out, long long& used,
                      long long& rejected) {
    KahanVec acc(n_terms);
    std::vector<double> w(n), noise(d), diff(d), kern(d);
    for (std::uint64_t j = first; j < last; ++j) {
      sample_normals(cfg.seed, j, 0, w.data(), n);
      sample_normals(cfg.seed, j, 1, noise.data(), d);
      MalliavinFrame frame(f, w, 2, cfg.det_threshold);
      if (frame.degenerate()) {
        ++rejected;
        continue;
      }
      const Jet one = Jet::constant(1, n, 1.0);
      const auto h = frame.weights(one, 0);
      for (int i = 0; i < d; ++i)
        diff[std::size_t(i)] =
            frame.f_jets()[i].value() + noise_sd * noise[std::size_t(i)] - x[std::size_t(i)];
      grad_kernel_into(kp, diff.data(), kern.data());
      double a = 0.0;
      for (int i = 0; i < d; ++i) a -= kern[std::size_t(i)] * h[std::size_t(i)].value();
      acc.add(0, a);
      acc.add(1, a * a);
      for (int i = 0; i < d; ++i)
        acc.add(2 + i, std::pow(std::abs(h[std::size_t(i)].value()), p));
      ++used;
    }
    acc.store(out);
  };

  const McTotals totals = run_chunked(cfg, n_terms, chunk_fn);
  if (totals.used == 0)
    throw DegenerateModelError("all samples rejected: model numerically degenerate");

  SmoothingCheck sc;
  sc.estimate.kind = EstimateKind::kDensity;
  sc.estimate.value = totals.sums[0] / double(totals.used);
  sc.estimate.std_error = mean_std_error(totals.sums[0], totals.sums[1], totals.used);
  sc.estimate.n_used = totals.used;
  sc.estimate.n_rejected = totals.rejected;
  sc.estimate.r_min_used = r_min;
  sc.estimate.seed = cfg.seed;
  sc.estimate.p = p;
  sc.estimate.x = x;
  sc.estimate.note = "density of F + noise with the H_i(F;1) weights reused";

  sc.h_norm_upper = 1.0;
  for (int i = 0; i < d; ++i)
    sc.h_norm_upper += std::pow(totals.sums[std::size_t(2 + i)] / double(totals.used), 1.0 / p);
  return sc;
}

double kde_baseline(const std::vector<std::vector<double>>& samples,
                    const std::vector<double>& x, double bandwidth) {
  if (samples.empty()) throw std::invalid_argument("KDE needs at least one sample");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("bandwidth must be > 0");
  const int d = int(x.size());
  const double inv_h2 = 1.0 / (bandwidth * bandwidth);
  Kahan acc;
  for (const auto& s : samples) {
    double q = 0.0;
    for (int i = 0; i < d; ++i) q += (x[std::size_t(i)] - s[std::size_t(i)]) * (x[std::size_t(i)] - s[std::size_t(i)]);
    acc.add(std::exp(-0.5 * q * inv_h2));
  }
  const double norm =
      std::pow(2.0 * kPi, -0.5 * d) * std::pow(bandwidth, -double(d));
  return norm * acc.sum / double(samples.size());
}

double silverman_bandwidth(const std::vector<std::vector<double>>& samples) {
  if (samples.empty()) throw std::invalid_argument("empty sample set");
  const int d = int(samples[0].size());
  const double nn = double(samples.size());
  double sd_avg = 0.0;
  for (int i = 0; i < d; ++i) {
    Kahan s, ss;
    for (const auto& v : samples) {
      s.add(v[std::size_t(i)]);
      ss.add(v[std::size_t(i)] * v[std::size_t(i)]);
    }
    const double mean = s.sum / nn;
    sd_avg += std::sqrt(std::max((ss.sum - nn * mean * mean) / (nn - 1.0), 0.0));
  }
  sd_avg /= double(d);
  return sd_avg * std::pow(4.0 / ((d + 2.0) * nn), 1.0 / (d + 4.0));
}

std::vector<std::vector<double>> draw_f_samples(const Functional& f,
                                                const EstimatorConfig& cfg) {
  if (cfg.n_samples < 1) throw std::invalid_argument("sample count must be >= 1");
  std::vector<std::vector<double>> out(std::size_t(cfg.n_samples));
  const int n = f.n;
  auto chunk_fn = [&](std::uint64_t first, std::uint64_t last,
                      std::vector<double>& partial, long long& used,
                      long long& rejected) {
    (void)partial;
    (void)rejected;
    std::vector<double> w(n);
    for (std::uint64_t j = first; j < last; ++j) {
      sample_normals(cfg.seed, j, 0, w.data(), n);
      out[std::size_t(j)] = f.eval_values(w);
      ++used;
    }
  };
  run_chunked(cfg, 0, chunk_fn);
  return out;
}

std::optional<double> analytic_reference(const std::string& scenario_id,
                                         const std::vector<double>& x,
                                         const ScenarioParams& params) {
  const Scenario s = get_scenario(scenario_id, params);
  if (!s.has_analytic()) return std::nullopt;
  return s.analytic_density(x);
}

GridEstimate estimate_density_grid(const Functional& f,
                                   const std::vector<std::vector<double>>& nodes,
                                   const EstimatorConfig& cfg) {
  const int d = f.d, n = f.n;
  const int nn = int(nodes.size());
  if (nn == 0) throw std::invalid_argument("empty node list");
  const double r_min = effective_r_min(cfg, d);
  const KernelParams kp = KernelParams::make(d, r_min);

  std::vector<double> flat(std::size_t(nn) * d);
  for (int a = 0; a < nn; ++a)
    for (int i = 0; i < d; ++i) flat[std::size_t(a) * d + i] = nodes[std::size_t(a)][std::size_t(i)];

  auto chunk_fn = [&](std::uint64_t first, std::uint64_t last,
                      std::vector<double>& out, long long& used,
                      long long& rejected) {
    KahanVec acc(2 * nn);
    std::vector<double> w(n), fv(d), hv(d), diff(d), kern(d);
    for (std::uint64_t j = first; j < last; ++j) {
      sample_normals(cfg.seed, j, 0, w.data(), n);
      MalliavinFrame frame(f, w, 2, cfg.det_threshold);
      if (frame.degenerate()) {
        ++rejected;
        continue;
      }
      const Jet one = Jet::constant(1, n, 1.0);
      const auto h = frame.weights(one, 0);
      for (int i = 0; i < d; ++i) {
        fv[std::size_t(i)] = frame.f_jets()[i].value();
        hv[std::size_t(i)] = h[std::size_t(i)].value();
      }
      for (int a = 0; a < nn; ++a) {
        for (int i = 0; i < d; ++i)
          diff[std::size_t(i)] = fv[std::size_t(i)] - flat[std::size_t(a) * d + i];
        grad_kernel_into(kp, diff.data(), kern.data());
        double v = 0.0;
        for (int i = 0; i < d; ++i) v -= kern[std::size_t(i)] * hv[std::size_t(i)];
        acc.add(2 * a, v);
        acc.add(2 * a + 1, v * v);
      }
      ++used;
    }
    acc.store(out);
  };

  const McTotals totals = run_chunked(cfg, 2 * nn, chunk_fn);
  if (totals.used == 0)
    throw DegenerateModelError("all samples rejected: model numerically degenerate");

  GridEstimate g;
  g.values.resize(std::size_t(nn));
  g.std_errors.resize(std::size_t(nn));
  for (int a = 0; a < nn; ++a) {
    g.values[std::size_t(a)] = totals.sums[std::size_t(2 * a)] / double(totals.used);
    g.std_errors[std::size_t(a)] =
        mean_std_error(totals.sums[std::size_t(2 * a)], totals.sums[std::size_t(2 * a + 1)], totals.used);
  }
  g.n_used = totals.used;
  g.n_rejected = totals.rejected;
  g.r_min_used = r_min;
  return g;
}

std::vector<std::vector<double>> make_probe_grid(int d, double lo, double hi,
                                                 int per_axis) {
  if (d < 1 || per_axis < 2) throw std::invalid_argument("bad probe grid shape");
  std::vector<std::vector<double>> out;
  const long long total = [&] {
    long long t = 1;
    for (int i = 0; i < d; ++i) t *= per_axis;
    return t;
  }();
  out.reserve(std::size_t(total));
  std::vector<int> idx(std::size_t(d), 0);
  for (long long c = 0; c < total; ++c) {
    std::vector<double> pt(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i)
      pt[std::size_t(i)] = lo + (hi - lo) * double(idx[std::size_t(i)]) / double(per_axis - 1);
    out.push_back(std::move(pt));
    for (int i = 0; i < d; ++i) {
      if (++idx[std::size_t(i)] < per_axis) break;
      idx[std::size_t(i)] = 0;
    }
  }
  return out;
}

DualityResidual duality_residual(const Functional& f, const GFunc& g,
                                 const TestFn& test_fn,
                                 const std::vector<int>& alpha,
                                 const EstimatorConfig& cfg) {
  if (alpha.empty() || alpha.size() > 2)
    throw WeightOrderError("duality residual needs |alpha| in {1, 2}");
  for (int a : alpha)
    if (a < 0 || a >= f.d) throw std::out_of_range("multi-index out of range");
  const int n = f.n;
  const int order = int(alpha.size());

  auto chunk_fn = [&](std::uint64_t first, std::uint64_t last,
                      std::vector<double>& out, long long& used,
                      long long& rejected) {
    KahanVec acc(2);
    std::vector<double> w(n);
    for (std::uint64_t j = first; j < last; ++j) {
      sample_normals(cfg.seed, j, 0, w.data(), n);
      MalliavinFrame frame(f, w, order + 1, cfg.det_threshold);
      if (frame.degenerate()) {
        ++rejected;
        continue;
      }
      const Jet gj = g(w, order, frame.f_jets());
      double h_val;
      if (order == 1) {
        h_val = frame.weights(gj, 0)[std::size_t(alpha[0])].value();
      } else {
        const Jet inner = frame.weights(gj, 1)[std::size_t(alpha[0])];
        h_val = frame.weights(inner, 0)[std::size_t(alpha[1])].value();
      }
      const Jet ft = test_fn(frame.f_values(), order);
      // E(d_alpha f(F) G) = (-1)^{|alpha|} E(f(F) H_alpha): residual per draw
      double resid;
      if (order == 1) {
        resid = ft.grad(alpha[0]) * gj.value() + ft.value() * h_val;
      } else {
        resid = ft.hess(alpha[0], alpha[1]) * gj.value() - ft.value() * h_val;
      }
      acc.add(0, resid);
      acc.add(1, resid * resid);
      ++used;
    }
    acc.store(out);
  };

  const McTotals totals = run_chunked(cfg, 2, chunk_fn);
  if (totals.used == 0)
    throw DegenerateModelError("all samples rejected: model numerically degenerate");

  DualityResidual r;
  r.residual = totals.sums[0] / double(totals.used);
  r.std_error = mean_std_error(totals.sums[0], totals.sums[1], totals.used);
  r.n_used = totals.used;
  r.n_rejected = totals.rejected;
  return r;
}

}  // namespace riesz
