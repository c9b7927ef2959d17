#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "riesz/kernel.hpp"
#include "riesz/malliavin.hpp"
#include "riesz/scenarios.hpp"

namespace riesz {

struct EstimatorConfig {
  long long n_samples = 200000;
  std::uint64_t seed = 12345;
  /// Truncation radius for the Riesz kernel: 0 selects the automatic
  /// schedule N^{-1/(d+2)}; a negative value forces the untruncated kernel
  /// (infinite variance: confidence intervals are withheld).
  double r_min = 0.0;
  int chunk = 65536;
  double p = 4.0;  // integrability exponent for norms / Theta / tails
  double det_threshold = 1e-12;  // relative det(sigma_F) rejection level
  double denom_floor = 1e-3;     // conditional-expectation denominator floor
  int workers = 0;               // 0 = hardware concurrency
};

enum class EstimateKind { kDensity, kDerivative, kConditional, kTheta, kNorm, kTail };

const char* to_string(EstimateKind k);

struct EstimateResult {
  EstimateKind kind = EstimateKind::kDensity;
  double value = 0.0;
  double std_error = 0.0;
  long long n_used = 0;
  long long n_rejected = 0;
  double r_min_used = 0.0;
  std::uint64_t seed = 0;
  double p = 0.0;
  std::vector<double> x;
  std::string scenario;  // label for serialization; empty for ad-hoc functionals
  std::string note;      // bias/validity remark (e.g. untruncated-variance flag)

  bool untruncated() const { return r_min_used == 0.0; }
};

class DegenerateModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class OutsideSupportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ExponentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Deterministic chunked Monte Carlo reduction. The chunk function fills
/// compensated partial sums for samples [first, last); partials are combined
/// in ascending chunk order, so results do not depend on the worker count.
struct McTotals {
  std::vector<double> sums;
  long long used = 0;
  long long rejected = 0;
};
using ChunkFn = std::function<void(std::uint64_t first, std::uint64_t last,
                                   std::vector<double>& partial,
                                   long long& used, long long& rejected)>;
McTotals run_chunked(const EstimatorConfig& cfg, int n_terms, const ChunkFn& fn);

double auto_r_min(long long n_samples, int d);
/// Resolves the configured truncation into the kernel radius (0 = none).
double effective_r_min(const EstimatorConfig& cfg, int d);

/// Riesz-transform density estimate at x:
///   p(x) ~ -(1/N) sum_j sum_i dQ_d(F_j - x)_i H_i(F;1)_j
/// with the truncated kernel and the sign convention fixed by the Gaussian
/// oracle (A2).
EstimateResult estimate_density(const Functional& f, const std::vector<double>& x,
                                const EstimatorConfig& cfg);

/// Same estimator with a caller-supplied G (used by the localized density
/// and by the conditional-expectation numerator).
EstimateResult estimate_density_weighted(const Functional& f, const GFunc& g,
                                         const std::vector<double>& x,
                                         const EstimatorConfig& cfg);

/// Derivative of the density for |alpha| <= 1 via second-order weights:
///   d_a p(x) ~ -(1/N) sum_j sum_i dQ_d(F_j - x)_i H_{(a,i)}(F;1)_j.
EstimateResult estimate_density_grad(const Functional& f,
                                     const std::vector<double>& x,
                                     const std::vector<int>& alpha,
                                     const EstimatorConfig& cfg);

/// E(G | F = x) as the ratio of two Riesz estimates sharing one sample
/// stream; standard error by the first-order delta method.
EstimateResult estimate_conditional(const Functional& f, const GFunc& g,
                                    const std::vector<double>& x,
                                    const EstimatorConfig& cfg);

/// Empirical Theta_p over a finite probe grid (untruncated kernel):
///   max_a sum_i (mean |dQ_d(F_j - a)_i|^{p/(p-1)})^{(p-1)/p}.
/// Requires p > d.
EstimateResult estimate_theta(const Functional& f, double p,
                              const std::vector<std::vector<double>>& probes,
                              const EstimatorConfig& cfg);

struct TheoreticalConstants {
  double k = 0.0;          // k_{d,p} = (d-1)p/(p-d)
  double big_k = 0.0;      // K_{d,p}
  double theta_bound = 0.0;  // d K ||1||^k, with the supplied norm argument
  double sup_bound = 0.0;    // 2 d K ||1||^{k+1}
};
/// Explicit constants of the Theta_p estimate; requires p > d.
TheoreticalConstants theoretical_constants(int d, double p, double norm_w1p = 1.0);

/// H-based upper bound for ||1||_{W^{1,p}}: 1 + sum_i (mean |H_i(F;1)|^p)^{1/p}.
EstimateResult sobolev_norm_one(const Functional& f, double p,
                                const EstimatorConfig& cfg);

struct TailCheck {
  double lhs = 0.0;       // density estimate at x
  double lhs_se = 0.0;
  double rhs = 0.0;       // Theta_pbar (d + ||1||) mu(B_2(x))^a
  double rhs_se = 0.0;
  double theta = 0.0;
  double norm_w1p = 0.0;
  double mu_ball = 0.0;   // empirical mu(B_2(x))
  double p_bar = 0.0;
  bool holds = false;
};
/// Tail estimate check at x: requires 0 < a < 1/d - 1/p.
TailCheck tail_bound_check(const Functional& f, const std::vector<double>& x,
                           double a, double p, const EstimatorConfig& cfg,
                           const std::vector<std::vector<double>>& theta_probes = {});

/// Density of F + noise_sd * (independent Gaussian), reusing the H_i(F;1)
/// weights; the duality survives because the noise is independent of F.
struct SmoothingCheck {
  EstimateResult estimate;
  double h_norm_upper = 0.0;  // reported H-based norm (unchanged by the noise)
};
SmoothingCheck smoothing_check(const Functional& f, double noise_sd,
                               const std::vector<double>& x,
                               const EstimatorConfig& cfg);

/// Gaussian-product-kernel density estimate (independent baseline oracle).
double kde_baseline(const std::vector<std::vector<double>>& samples,
                    const std::vector<double>& x, double bandwidth);
double silverman_bandwidth(const std::vector<std::vector<double>>& samples);
/// Draws N values of F (no weights, no rejection).
std::vector<std::vector<double>> draw_f_samples(const Functional& f,
                                                const EstimatorConfig& cfg);

/// Closed-form density for scenarios that have one; nullopt otherwise.
std::optional<double> analytic_reference(const std::string& scenario_id,
                                         const std::vector<double>& x,
                                         const ScenarioParams& params = {});

/// Batched density estimation over many probe points in one sample pass.
struct GridEstimate {
  std::vector<double> values;
  std::vector<double> std_errors;
  long long n_used = 0;
  long long n_rejected = 0;
  double r_min_used = 0.0;
};
GridEstimate estimate_density_grid(const Functional& f,
                                   const std::vector<std::vector<double>>& nodes,
                                   const EstimatorConfig& cfg);

/// Axis-aligned probe lattice with `per_axis` points per axis.
std::vector<std::vector<double>> make_probe_grid(int d, double lo, double hi,
                                                 int per_axis);

/// Duality residual diagnostic: mean and standard error of
/// d_i f(F) G + f(F) H_i(F;G) over N samples (should be 0 within noise).
struct DualityResidual {
  double residual = 0.0;
  double std_error = 0.0;
  long long n_used = 0;
  long long n_rejected = 0;
};
/// `test_fn` returns the jet of the test function at the point F(w) in
/// R^d (order >= |alpha|); alpha has length 1 or 2.
using TestFn = std::function<Jet(const std::vector<double>& f_val, int order)>;
DualityResidual duality_residual(const Functional& f, const GFunc& g,
                                 const TestFn& test_fn,
                                 const std::vector<int>& alpha,
                                 const EstimatorConfig& cfg);

}  // namespace riesz
