#include "riesz/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "riesz/geometry.hpp"
#include "riesz/kernel.hpp"
#include "riesz/localize.hpp"
#include "riesz/rng.hpp"

namespace riesz {

namespace {

constexpr double kPi = std::numbers::pi;

double phi1(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }

std::array<double, 3> mollifier(double z) {
  const double s = 1.0 - z * z;
  if (s <= 0.0) return {0.0, 0.0, 0.0};
  const double v = std::exp(1.0 - 1.0 / s);
  const double d1 = v * (-2.0 * z / (s * s));
  const double d2 = v * (4.0 * z * z / (s * s * s * s) - 2.0 / (s * s) -
                         8.0 * z * z / (s * s * s));
  return {v, d1, d2};
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

class Suite {
 public:
  explicit Suite(const AcceptanceOptions& opts) : opts_(opts) {}

  std::vector<CriterionResult> results;

  void record(const std::string& id, const std::string& title, bool passed,
              const std::string& detail, double seconds) {
    results.push_back({id, title, passed, detail, seconds});
    if (opts_.live) {
      (*opts_.live) << (passed ? "PASS" : "FAIL") << "  " << id << "  " << title
                    << "  [" << detail << "]  (" << seconds << " s)\n";
      opts_.live->flush();
    }
  }

  template <typename Fn>
  void criterion(const std::string& id, const std::string& title, Fn&& fn) {
    Timer t;
    bool passed = false;
    std::string detail;
    try {
      passed = fn(detail);
    } catch (const std::exception& e) {
      passed = false;
      detail = std::string("exception: ") + e.what();
    }
    record(id, title, passed, detail, t.elapsed());
  }

  EstimatorConfig cfg(long long n_full) const {
    EstimatorConfig c;
    c.n_samples = opts_.quick ? std::max<long long>(n_full / 10, 20000) : n_full;
    c.workers = opts_.workers;
    return c;
  }

  const AcceptanceOptions& opts() const { return opts_; }

 private:
  const AcceptanceOptions& opts_;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

TestFn make_test_bump(std::vector<double> center, double width) {
  return [center = std::move(center), width](const std::vector<double>& f_val,
                                             int order) {
    const int d = int(f_val.size());
    Jet acc = Jet::constant(order, d, 1.0);
    for (int i = 0; i < d; ++i) {
      const Jet xi = Jet::variable(order, d, i, f_val[std::size_t(i)]);
      const double z = (f_val[std::size_t(i)] - center[std::size_t(i)]) / width;
      const auto m = mollifier(z);
      acc = acc * xi.compose(m[0], m[1] / width, m[2] / (width * width), 0.0);
    }
    return acc;
  };
}

namespace {

// --- A1 ------------------------------------------------------------------
bool a1_kernel_exactness(Suite&, std::string& detail) {
  Timer t;
  std::mt19937_64 gen(20240901ull);
  std::normal_distribution<double> nd;
  double worst_rel = 0.0, worst_prop = 0.0;
  for (int d = 1; d <= 3; ++d) {
    const KernelParams kp = KernelParams::make(d);
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<double> x(std::size_t(d));
      double r2 = 0.0;
      for (int i = 0; i < d; ++i) {
        x[std::size_t(i)] = nd(gen) * 2.0;
        r2 += x[std::size_t(i)] * x[std::size_t(i)];
      }
      if (r2 < 1e-8) continue;
      const auto g = grad_poisson_kernel(kp, x);
      if (d == 1) {
        const double want = x[0] > 0.0 ? 1.0 : 0.0;
        worst_rel = std::max(worst_rel, std::abs(g[0] - want));
      } else {
        // closed form recomputed independently in long double
        const long double r = std::sqrt((long double)r2);
        for (int i = 0; i < d; ++i) {
          const long double want = (long double)(kp.big_a_d) * x[std::size_t(i)] /
                                   ((long double)(kp.a_d) * powl(r, d));
          const double rel = std::abs(double((g[std::size_t(i)] - want) /
                                             (want == 0 ? 1.0L : want)));
          worst_rel = std::max(worst_rel, rel);
        }
      }
      // oddness
      std::vector<double> xn(std::size_t(d));
      for (int i = 0; i < d; ++i) xn[std::size_t(i)] = -x[std::size_t(i)];
      const auto gn = grad_poisson_kernel(kp, xn);
      for (int i = 0; i < d; ++i)
        if (d >= 2)
          worst_prop = std::max(worst_prop, std::abs(gn[std::size_t(i)] + g[std::size_t(i)]) /
                                                std::max(1.0, std::abs(g[std::size_t(i)])));
      if (d >= 2) {
        // homogeneity grad(l x) = l^{1-d} grad(x)
        const double lam = 0.5 + 2.0 * std::abs(nd(gen));
        std::vector<double> xl(std::size_t(d));
        for (int i = 0; i < d; ++i) xl[std::size_t(i)] = lam * x[std::size_t(i)];
        const auto gl = grad_poisson_kernel(kp, xl);
        for (int i = 0; i < d; ++i) {
          const double want = std::pow(lam, 1.0 - d) * g[std::size_t(i)];
          worst_prop = std::max(worst_prop,
                                std::abs(gl[std::size_t(i)] - want) / std::max(1.0, std::abs(want)));
        }
        // radial identity sum_i x_i d_i Q = A_d/a_d |x|^{2-d}
        double dot = 0.0;
        for (int i = 0; i < d; ++i) dot += x[std::size_t(i)] * g[std::size_t(i)];
        const double want = kp.big_a_d / kp.a_d * std::pow(std::sqrt(r2), 2.0 - d);
        worst_prop = std::max(worst_prop, std::abs(dot - want) / std::max(1.0, std::abs(want)));
      }
    }
  }
  const double secs = t.elapsed();
  detail = "closed-form rel " + fmt(worst_rel) + ", identities " + fmt(worst_prop) +
           ", " + fmt(secs) + " s";
  return worst_rel <= 1e-14 && worst_prop <= 1e-12 && secs < 1.0;
}

// --- A2 ------------------------------------------------------------------
bool a2_sign_convention(Suite& suite, std::string& detail) {
  Timer t;
  const Scenario s = get_scenario("gauss-identity-d1");
  EstimatorConfig cfg = suite.cfg(1000000);
  bool ok = true;
  std::ostringstream os;
  for (double x : {0.0, 1.0}) {
    const EstimateResult r = estimate_density(s.f, {x}, cfg);
    const double want = phi1(x);
    const bool pass = std::abs(r.value - want) <= 3.0 * r.std_error;
    ok = ok && pass;
    os << "x=" << x << ": " << fmt(r.value) << " vs " << fmt(want) << " (se "
       << fmt(r.std_error) << "); ";
  }
  const double secs = t.elapsed();
  ok = ok && secs < 10.0;
  detail = os.str() + fmt(secs) + " s";
  return ok;
}

// --- A3 ------------------------------------------------------------------
bool a3_density_oracle(Suite& suite, std::string& detail) {
  Timer t;
  EstimatorConfig cfg = suite.cfg(1000000);
  std::ostringstream os;
  bool ok = true;

  const Scenario g2 = get_scenario("gauss-identity-d2");
  const EstimateResult r0 = estimate_density(g2.f, {0.0, 0.0}, cfg);
  const double want0 = 1.0 / (2.0 * kPi);
  ok = ok && std::abs(r0.value - want0) <= 3.0 * r0.std_error;
  ok = ok && r0.std_error <= 2e-3;
  os << "gauss d2 @0: " << fmt(r0.value) << " (se " << fmt(r0.std_error) << "); ";

  const Scenario lin = get_scenario("linear");
  const std::vector<std::vector<double>> probes = {{0.0, 0.0}, {1.0, 0.5}, {-2.0, 1.0}};
  for (const auto& x : probes) {
    const EstimateResult r = estimate_density(lin.f, x, cfg);
    const double want = lin.analytic_density(x);
    const bool pass = std::abs(r.value - want) <= 3.0 * r.std_error;
    ok = ok && pass;
    os << "linear @(" << x[0] << "," << x[1] << "): " << fmt(r.value) << " vs "
       << fmt(want) << "; ";
  }
  const double secs = t.elapsed();
  ok = ok && secs < 60.0;
  detail = os.str() + fmt(secs) + " s";
  return ok;
}

// --- A4 ------------------------------------------------------------------
bool a4_weights_exact(Suite&, std::string& detail) {
  const Scenario g2 = get_scenario("gauss-identity-d2");
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> w(2);
    sample_normals(99, std::uint64_t(trial), 0, w.data(), 2);
    const auto h = weight_first(g2.f, g_one(), w);
    for (int i = 0; i < 2; ++i) worst = std::max(worst, std::abs(h[std::size_t(i)] + w[std::size_t(i)]));
  }
  const Scenario g1 = get_scenario("gauss-identity-d1");
  double worst2 = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> w(1);
    sample_normals(77, std::uint64_t(trial), 0, w.data(), 1);
    const double h = weight_multi(g1.f, g_one(), w, {0, 0});
    worst2 = std::max(worst2, std::abs(h - (w[0] * w[0] - 1.0)));
  }
  detail = "H_i vs -w_i: " + fmt(worst) + "; H_{(1,1)} vs w^2-1: " + fmt(worst2);
  return worst <= 1e-12 && worst2 <= 1e-12;
}

// --- A5 ------------------------------------------------------------------
bool a5_duality(Suite& suite, std::string& detail) {
  const std::vector<std::string> ids = {"gauss-identity-d2", "linear",
                                        "poly-perturb", "tanh-couple"};
  const std::vector<TestFn> bumps = {
      make_test_bump({0.0, 0.0}, 2.5), make_test_bump({1.0, -0.5}, 2.0),
      make_test_bump({-0.5, 0.8}, 3.0)};
  const std::vector<std::uint64_t> seeds = {101, 202, 303};

  EstimatorConfig base = suite.cfg(200000);
  int per_seed_total = 0;
  std::vector<int> per_seed_fail(seeds.size(), 0);
  for (std::size_t si = 0; si < seeds.size(); ++si) {
    EstimatorConfig cfg = base;
    cfg.seed = seeds[si];
    int total = 0, fail = 0;
    for (const auto& id : ids) {
      const Scenario s = get_scenario(id);
      for (const auto& g_name : {"one", "F1"}) {
        const GFunc& g = s.g_catalog.at(g_name);
        for (const auto& f : bumps) {
          for (int i = 0; i < s.d; ++i) {
            const DualityResidual r = duality_residual(s.f, g, f, {i}, cfg);
            ++total;
            if (std::abs(r.residual) > 3.0 * r.std_error) ++fail;
          }
        }
      }
    }
    per_seed_total = total;
    per_seed_fail[si] = fail;
  }

  bool ok = true;
  bool any_clean = false;
  std::ostringstream os;
  for (std::size_t si = 0; si < seeds.size(); ++si) {
    const double frac = 1.0 - double(per_seed_fail[si]) / double(per_seed_total);
    ok = ok && frac >= 0.95;
    any_clean = any_clean || per_seed_fail[si] == 0;
    os << "seed " << seeds[si] << ": " << per_seed_total - per_seed_fail[si] << "/"
       << per_seed_total << "; ";
  }
  detail = os.str();
  return ok && any_clean;
}

// --- A6 ------------------------------------------------------------------
bool a6_constants(Suite&, std::string& detail) {
  const auto c24 = theoretical_constants(2, 4.0);
  const bool exact = c24.k == 2.0 && c24.big_k == 73.0;

  const auto c36 = theoretical_constants(3, 6.0);
  // independent evaluation of the same closed forms, different grouping
  const long double p = 6.0L, d = 3.0L, big_a = 1.0L;  // A_3 = 3 - 2 = 1
  const long double k_ref = (d - 1.0L) * p / (p - d);
  const long double aq = powl(big_a, p / (p - 1.0L));
  const long double base = (p - 1.0L) / (p - d) * 2.0L * d * aq;
  const long double k_big_ref = 1.0L + 2.0L * aq * powl(base, k_ref);
  const bool match = std::abs(double(c36.k - k_ref)) <= 1e-12 &&
                     std::abs(double((c36.big_k - k_big_ref) / k_big_ref)) <= 1e-12;

  detail = "k24=" + fmt(c24.k) + " K24=" + fmt(c24.big_k) + "; k36=" + fmt(c36.k) +
           " K36=" + fmt(c36.big_k);
  return exact && match;
}

// --- A7 ------------------------------------------------------------------
bool a7_theta_bounds(Suite& suite, std::string& detail) {
  const Scenario s = get_scenario("gauss-identity-d2");
  EstimatorConfig cfg = suite.cfg(200000);
  const double p = 4.0;

  const auto probes = make_probe_grid(2, -3.0, 3.0, 13);
  const EstimateResult theta = estimate_theta(s.f, p, probes, cfg);
  const EstimateResult norm = sobolev_norm_one(s.f, p, cfg);
  const auto consts = theoretical_constants(2, p, norm.value);

  const double theta_slack =
      3.0 * (theta.std_error +
             2.0 * consts.big_k * consts.k * std::pow(norm.value, consts.k - 1.0) *
                 norm.std_error);
  const bool theta_ok = theta.value <= consts.theta_bound + theta_slack;

  const auto grid = make_probe_grid(2, -3.0, 3.0, 41);
  const GridEstimate ge = estimate_density_grid(s.f, grid, cfg);
  double max_p = 0.0, max_se = 0.0;
  for (std::size_t i = 0; i < ge.values.size(); ++i) {
    if (ge.values[i] > max_p) {
      max_p = ge.values[i];
      max_se = ge.std_errors[i];
    }
  }
  const bool sup_ok = max_p <= consts.sup_bound + 3.0 * max_se;

  detail = "theta " + fmt(theta.value) + " <= " + fmt(consts.theta_bound) +
           "; max p " + fmt(max_p) + " <= " + fmt(consts.sup_bound);
  return theta_ok && sup_ok;
}

// --- A8 ------------------------------------------------------------------
bool a8_sobolev_norm(Suite& suite, std::string& detail) {
  const Scenario s = get_scenario("gauss-identity-d2");
  EstimatorConfig cfg = suite.cfg(1000000);
  const EstimateResult r = sobolev_norm_one(s.f, 4.0, cfg);
  const double want = 1.0 + 2.0 * std::pow(3.0, 0.25);
  detail = fmt(r.value) + " vs " + fmt(want) + " (se " + fmt(r.std_error) + ")";
  return std::abs(r.value - want) <= 3.0 * r.std_error;
}

// --- A9 ------------------------------------------------------------------
bool a9_tails(Suite& suite, std::string& detail) {
  const Scenario s = get_scenario("gauss-identity-d2");
  EstimatorConfig cfg = suite.cfg(1000000);
  const TailCheck tc = tail_bound_check(s.f, {3.0, 0.0}, 0.2, 8.0, cfg);

  const EstimateResult far = estimate_density(s.f, {4.0, 0.0}, cfg);
  const bool decay_ok = far.value <= 1e-3;

  detail = "lhs " + fmt(tc.lhs) + " rhs " + fmt(tc.rhs) + " holds=" +
           (tc.holds ? "1" : "0") + "; p(4,0)=" + fmt(far.value);
  return tc.holds && decay_ok;
}

// --- A10 -----------------------------------------------------------------
bool a10_bell(Suite& suite, std::string& detail) {
  const Scenario s = get_scenario("gauss-identity-d2");
  GridSpec spec;
  spec.lo = {-3.0, -3.0};
  spec.hi = {3.0, 3.0};
  spec.per_axis = 61;

  const GridField analytic = build_grid_field_analytic(s, spec);

  std::mt19937_64 gen(7777);
  std::uniform_real_distribution<double> ud(-2.0, 2.0);
  auto random_polyline = [&](bool closed) {
    PathPolyline p;
    const int waypoints = 3 + int(gen() % 4);
    for (int k = 0; k < waypoints; ++k) p.points.push_back({ud(gen), ud(gen)});
    if (closed) p.points.push_back(p.points.front());
    // resample to 100 segments through straight interpolation
    PathPolyline dense;
    const int seg_per_leg = std::max(1, 100 / int(p.points.size() - 1));
    for (std::size_t leg = 1; leg < p.points.size(); ++leg) {
      for (int t = 0; t < seg_per_leg; ++t) {
        const double u = double(t) / seg_per_leg;
        dense.points.push_back(
            {p.points[leg - 1][0] + u * (p.points[leg][0] - p.points[leg - 1][0]),
             p.points[leg - 1][1] + u * (p.points[leg][1] - p.points[leg - 1][1])});
      }
    }
    dense.points.push_back(p.points.back());
    return dense;
  };

  double worst_open = 0.0, worst_closed = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto path = random_polyline(false);
    const double integral = bell_path_integral(analytic, path);
    const auto& a = path.points.front();
    const auto& b = path.points.back();
    const double want = -0.5 * (b[0] * b[0] + b[1] * b[1]) +
                        0.5 * (a[0] * a[0] + a[1] * a[1]);
    worst_open = std::max(worst_open, std::abs(integral - want));

    const auto loop = random_polyline(true);
    worst_closed = std::max(worst_closed, std::abs(bell_path_integral(analytic, loop)));
  }

  EstimatorConfig cfg = suite.cfg(1000000);
  GridSpec espec = spec;
  if (suite.opts().quick) espec.per_axis = 41;
  const GridField estimated = build_grid_field_estimated(s.f, espec, cfg);
  double worst_est = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto path = random_polyline(false);
    const double integral = bell_path_integral(estimated, path);
    const double want = estimated.interp_logp(path.points.back()) -
                        estimated.interp_logp(path.points.front());
    worst_est = std::max(worst_est, std::abs(integral - want));
  }

  detail = "analytic " + fmt(worst_open) + ", loops " + fmt(worst_closed) +
           ", estimated " + fmt(worst_est);
  return worst_open <= 1e-3 && worst_closed <= 1e-3 && worst_est <= 5e-2;
}

// --- A11 -----------------------------------------------------------------
bool a11_semidistance(Suite& suite, std::string& detail) {
  const Scenario s = get_scenario("gauss-identity-d2");
  GridSpec spec;
  spec.lo = {-3.0, -3.0};
  spec.hi = {3.0, 3.0};
  spec.per_axis = 121;
  const GridField field = build_grid_field_analytic(s, spec);

  const DistanceResult radial = riesz_distance(field, {0.0, 0.0}, {1.0, 0.0});
  const bool radial_ok = std::abs(radial.value - 0.5) <= 0.025;

  const DistanceResult level = riesz_distance(field, {1.0, 0.0}, {0.0, 1.0});
  const bool level_ok = !level.infinite && level.value <= 0.02;

  std::mt19937_64 gen(31337);
  std::uniform_real_distribution<double> ud(-2.0, 2.0);
  int ordering_fail = 0;
  const int pairs = suite.opts().quick ? 10 : 50;
  for (int k = 0; k < pairs; ++k) {
    const std::vector<double> a = {ud(gen), ud(gen)};
    const std::vector<double> b = {ud(gen), ud(gen)};
    const DistanceResult dr = riesz_distance(field, a, b);
    const double en = energy_distance(field, a, b, 16, 40);
    if (dr.value > en + 0.02) ++ordering_fail;
  }

  // two-component mixture with a positivity gap
  GridSpec mspec;
  mspec.lo = {-4.0, -4.0};
  mspec.hi = {4.0, 4.0};
  mspec.per_axis = 81;
  auto mixture = [](const std::vector<double>& x) {
    const double s2 = 0.35 * 0.35;
    const double l =
        std::exp(-0.5 * ((x[0] + 2.2) * (x[0] + 2.2) + x[1] * x[1]) / s2);
    const double r =
        std::exp(-0.5 * ((x[0] - 2.2) * (x[0] - 2.2) + x[1] * x[1]) / s2);
    return (l + r) / (2.0 * 2.0 * kPi * s2);
  };
  const GridField mfield = build_grid_field_function(2, mixture, mspec);
  const DistanceResult gap = riesz_distance(mfield, {-2.2, 0.0}, {2.2, 0.0});

  detail = "radial " + fmt(radial.value) + ", level " + fmt(level.value) +
           ", ordering fails " + std::to_string(ordering_fail) + "/" +
           std::to_string(pairs) + ", gap infinite=" + (gap.infinite ? "1" : "0");
  return radial_ok && level_ok && ordering_fail == 0 && gap.infinite;
}

// --- A12 -----------------------------------------------------------------
bool a12_localization(Suite& suite, std::string& detail) {
  Timer t;
  bool sandwich_ok = true, loc1_ok = true;
  for (const double eps : {0.1, 0.05}) {
    std::vector<BumpParams> shapes;
    shapes.push_back({eps, Domain::box({0.0, 0.0}, {1.0, 1.0})});
    shapes.push_back({eps, Domain::ball({0.0, 0.0}, 1.0)});
    for (const auto& bp : shapes) {
      const int per_axis = 101;
      for (int ia = 0; ia < per_axis; ++ia)
        for (int ib = 0; ib < per_axis; ++ib) {
          const std::vector<double> x = {-1.30001 + 2.6 * ia / (per_axis - 1.0) +
                                             (bp.domain.shape == Domain::Shape::kBox ? 1.15 : 0.0),
                                         -1.30001 + 2.6 * ib / (per_axis - 1.0) +
                                             (bp.domain.shape == Domain::Shape::kBox ? 1.15 : 0.0)};
          const double v = bump_domain(bp, x);
          if (in_erosion(bp.domain, 2.0 * bp.eps + 1e-9, x) && v < 1.0 - 1e-12)
            sandwich_ok = false;
          if (!in_erosion(bp.domain, bp.eps - 1e-9, x) && v > 1e-12)
            sandwich_ok = false;
          if (v < -1e-15 || v > 1.0 + 1e-12) sandwich_ok = false;
        }
      for (const double p : {2.0, 4.0}) {
        const auto chk = log_grad_bound_check(bp, p, 301);
        loc1_ok = loc1_ok && chk.holds;
      }
    }
  }

  const Scenario chi = get_scenario("chi-square");
  BumpParams bp;
  bp.eps = 0.1;
  bp.domain = Domain::box({0.5}, {10.0});
  EstimatorConfig cfg = suite.cfg(1000000);
  bool density_ok = true;
  std::ostringstream os;
  for (const double x : {1.0, 2.0, 4.0}) {
    const EstimateResult r = localized_density(chi.f, {x}, bp, cfg);
    const double want = std::exp(-0.5 * x) / std::sqrt(2.0 * kPi * x);
    const bool pass = std::abs(r.value - want) <= 3.0 * r.std_error;
    density_ok = density_ok && pass;
    os << "x=" << x << ": " << fmt(r.value) << " vs " << fmt(want) << "; ";
  }
  const double secs = t.elapsed();
  detail = std::string("sandwich=") + (sandwich_ok ? "1" : "0") + " loc1=" +
           (loc1_ok ? "1" : "0") + "; " + os.str() + fmt(secs) + " s";
  return sandwich_ok && loc1_ok && density_ok && secs < 60.0;
}

// --- A13 -----------------------------------------------------------------
// random expression DAGs checked against central finite differences
struct RandomExprGen {
  std::mt19937_64 gen;
  int n = 0;

  explicit RandomExprGen(std::uint64_t seed, int n_in) : gen(seed), n(n_in) {}

  Expr leaf() {
    if (gen() % 3 == 0) return lit(std::uniform_real_distribution<double>(-2.0, 2.0)(gen));
    return var(int(gen() % std::uint64_t(n)));
  }

  Expr build(int depth) {
    if (depth <= 0) return leaf();
    switch (gen() % 10) {
      case 0: return build(depth - 1) + build(depth - 1);
      case 1: return build(depth - 1) - build(depth - 1);
      case 2: return build(depth - 1) * build(depth - 1);
      case 3:  // division kept away from zero
        return build(depth - 1) / (sumsq({build(depth - 1)}) + 0.7);
      case 4: return exp(lit(0.3) * build(depth - 1));
      case 5:  // logarithm of a positive quantity
        return log(sumsq({build(depth - 1)}) + 0.5);
      case 6: return tanh(build(depth - 1));
      case 7: return sin(build(depth - 1));
      case 8: return cos(build(depth - 1));
      default: return pow(build(depth - 1), double(1 + int(gen() % 3)));
    }
  }
};

bool a13_jets_vs_fd(Suite&, std::string& detail) {
  double worst_g = 0.0, worst_h = 0.0, worst_t = 0.0;
  int checked = 0;
  RandomExprGen rng(424242, 3);
  std::normal_distribution<double> nd;
  while (checked < 200) {
    const Expr e = rng.build(2 + int(rng.gen() % 5));
    std::vector<double> w(3);
    for (auto& v : w) v = nd(rng.gen);
    Jet j;
    try {
      j = jet_eval(e, w, 3);
    } catch (const std::exception&) {
      continue;  // domain-unlucky draw; the generator guards make this rare
    }
    if (!j.finite() || std::abs(j.value()) > 1e6) continue;
    ++checked;

    auto value_at = [&](const std::vector<double>& pt) {
      return jet_eval(e, pt, 0).value();
    };
    const double hg = 1e-5, hh = 1e-4, ht = 1e-3;
    for (int i = 0; i < 3; ++i) {
      auto wp = w, wm = w;
      wp[std::size_t(i)] += hg;
      wm[std::size_t(i)] -= hg;
      const double fd = (value_at(wp) - value_at(wm)) / (2.0 * hg);
      worst_g = std::max(worst_g, std::abs(fd - j.grad(i)) / (1.0 + std::abs(j.grad(i))));
    }
    for (int i = 0; i < 3; ++i)
      for (int k = i; k < 3; ++k) {
        auto wpp = w, wpm = w, wmp = w, wmm = w;
        wpp[std::size_t(i)] += hh; wpp[std::size_t(k)] += hh;
        wpm[std::size_t(i)] += hh; wpm[std::size_t(k)] -= hh;
        wmp[std::size_t(i)] -= hh; wmp[std::size_t(k)] += hh;
        wmm[std::size_t(i)] -= hh; wmm[std::size_t(k)] -= hh;
        const double fd =
            (value_at(wpp) - value_at(wpm) - value_at(wmp) + value_at(wmm)) /
            (4.0 * hh * hh);
        worst_h = std::max(worst_h, std::abs(fd - j.hess(i, k)) / (1.0 + std::abs(j.hess(i, k))));
      }
    // third derivatives: diagonal-direction stencil per index triple
    for (int i = 0; i < 3; ++i) {
      auto w2p = w, wp = w, wm = w, w2m = w;
      w2p[std::size_t(i)] += 2 * ht;
      wp[std::size_t(i)] += ht;
      wm[std::size_t(i)] -= ht;
      w2m[std::size_t(i)] -= 2 * ht;
      const double fd = (value_at(w2p) - 2.0 * value_at(wp) + 2.0 * value_at(wm) -
                         value_at(w2m)) /
                        (2.0 * ht * ht * ht);
      worst_t = std::max(worst_t, std::abs(fd - j.third(i, i, i)) / (1.0 + std::abs(j.third(i, i, i))));
    }
  }
  detail = "grad " + fmt(worst_g) + ", hess " + fmt(worst_h) + ", third " + fmt(worst_t);
  return worst_g <= 1e-6 && worst_h <= 1e-4 && worst_t <= 1e-3;
}

// --- A14 -----------------------------------------------------------------
bool a14_kde_crosscheck(Suite& suite, std::string& detail) {
  const Scenario s = get_scenario("gauss-identity-d2");
  EstimatorConfig cfg = suite.cfg(1000000);
  const auto samples = draw_f_samples(s.f, cfg);
  const double h = silverman_bandwidth(samples);

  // 21 probe points: a 7 x 3 lattice over [-2,2] x [-1,1]
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 3; ++j)
      pts.push_back({-2.0 + 4.0 * i / 6.0, -1.0 + 2.0 * j / 2.0});

  const GridEstimate ge = estimate_density_grid(s.f, pts, cfg);
  bool ok = true;
  double worst = 0.0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double kde = kde_baseline(samples, pts[k], h);
    const double riesz = ge.values[k];
    // rough KDE standard error: p R(K) / (N h^d) with R(K) = (4 pi)^{-d/2}
    const double kde_se = std::sqrt(std::max(kde, 1e-12) / (4.0 * kPi) /
                                    (double(samples.size()) * h * h));
    const double tol = std::max(0.05 * std::max(std::abs(kde), std::abs(riesz)),
                                3.0 * (ge.std_errors[k] + kde_se));
    const double diff = std::abs(kde - riesz);
    worst = std::max(worst, diff / tol);
    if (diff > tol) ok = false;
  }
  detail = "worst diff/tol " + fmt(worst) + " over 21 points, h=" + fmt(h);
  return ok;
}

// --- A15 -----------------------------------------------------------------
bool a15_determinism(Suite& suite, std::string& detail) {
  const Scenario s = get_scenario("gauss-identity-d2");
  EstimatorConfig cfg = suite.cfg(100000);
  cfg.seed = 4242;
  cfg.workers = 1;
  const EstimateResult r1 = estimate_density(s.f, {0.3, -0.2}, cfg);
  const EstimateResult r2 = estimate_density(s.f, {0.3, -0.2}, cfg);
  const bool bitwise = r1.value == r2.value && r1.std_error == r2.std_error &&
                       r1.n_used == r2.n_used;

  bool across = true;
  for (int workers : {2, 4}) {
    EstimatorConfig c = cfg;
    c.workers = workers;
    const EstimateResult rw = estimate_density(s.f, {0.3, -0.2}, c);
    if (std::abs(rw.value - r1.value) > 1e-12 * std::max(1.0, std::abs(r1.value)))
      across = false;
  }
  detail = std::string("single-worker bitwise=") + (bitwise ? "1" : "0") +
           ", across workers=" + (across ? "1" : "0");
  return bitwise && across;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts) {
  Suite suite(opts);
  suite.criterion("A1", "kernel exactness", [&](std::string& d) { return a1_kernel_exactness(suite, d); });
  suite.criterion("A2", "sign-convention oracle (d=1)", [&](std::string& d) { return a2_sign_convention(suite, d); });
  suite.criterion("A3", "density oracle (d=2)", [&](std::string& d) { return a3_density_oracle(suite, d); });
  suite.criterion("A4", "weights exactness", [&](std::string& d) { return a4_weights_exact(suite, d); });
  suite.criterion("A5", "duality suite", [&](std::string& d) { return a5_duality(suite, d); });
  suite.criterion("A6", "explicit constants", [&](std::string& d) { return a6_constants(suite, d); });
  suite.criterion("A7", "Theta and sup bounds", [&](std::string& d) { return a7_theta_bounds(suite, d); });
  suite.criterion("A8", "Sobolev norm", [&](std::string& d) { return a8_sobolev_norm(suite, d); });
  suite.criterion("A9", "tail bound", [&](std::string& d) { return a9_tails(suite, d); });
  suite.criterion("A10", "Bell identity", [&](std::string& d) { return a10_bell(suite, d); });
  suite.criterion("A11", "semi-distance", [&](std::string& d) { return a11_semidistance(suite, d); });
  suite.criterion("A12", "localization", [&](std::string& d) { return a12_localization(suite, d); });
  suite.criterion("A13", "AD correctness", [&](std::string& d) { return a13_jets_vs_fd(suite, d); });
  suite.criterion("A14", "KDE cross-check", [&](std::string& d) { return a14_kde_crosscheck(suite, d); });
  suite.criterion("A15", "determinism", [&](std::string& d) { return a15_determinism(suite, d); });
  return suite.results;
}

bool all_passed(const std::vector<CriterionResult>& results) {
  for (const auto& r : results)
    if (!r.passed) return false;
  return true;
}

}  // namespace riesz
