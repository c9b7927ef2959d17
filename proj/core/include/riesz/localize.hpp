#pragma once

#include <array>
#include <limits>
#include <vector>

#include "riesz/estimators.hpp"
#include "riesz/malliavin.hpp"

namespace riesz {

/// Localization domain: an axis-aligned box or a ball, the shapes with
/// closed-form per-axis ramp bounds.
struct Domain {
  enum class Shape { kBox, kBall } shape = Shape::kBox;
  std::vector<double> lo, hi;   // box; entries may be +-inf
  std::vector<double> center;   // ball
  double radius = 0.0;

  static Domain box(std::vector<double> lo, std::vector<double> hi);
  static Domain ball(std::vector<double> center, double radius);
  int dim() const;
};

struct BumpParams {
  double eps = 0.1;
  Domain domain;
};

class LocalityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// One-dimensional ramp bump: 0 outside (a-eps, b+eps), smooth exponential
/// ramps exp(1 - eps/(x+eps-a)) up and mirrored down, 1 on (a, b).
/// a = -inf or b = +inf drops the corresponding ramp.
double bump_1d(double eps, double a, double b, double x);
/// Value and first two derivatives of the ramp bump.
std::array<double, 3> bump_1d_jet(double eps, double a, double b, double x);

/// Smooth localizer sandwiched between the indicator of the 2eps- and
/// eps-erosions of the domain; value plus gradient and Hessian at x.
struct BumpJet {
  double value = 0.0;
  std::vector<double> grad;
  std::vector<double> hess;  // row-major d x d
};
double bump_domain(const BumpParams& params, const std::vector<double>& x);
BumpJet bump_domain_jet(const BumpParams& params, const std::vector<double>& x);

/// G-functional Psi_{D,eps}(F) for the localized weights H_i(F, Psi(F)).
GFunc localizer_g(const BumpParams& params);

/// Erosion membership x in D_eps (distance to the complement >= eps).
bool in_erosion(const Domain& domain, double eps, const std::vector<double>& x);

struct LogGradBoundCheck {
  double sup_found = 0.0;
  double bound = 0.0;
  bool holds = false;
};

/// Grid check of the localizer's log-gradient estimate:
/// sup |grad ln Psi|^p Psi against d eps^{-p} sup_{y>=1} y^{2p} e^{1-y}
/// (the exact supremum of the ramp factor; the e-factor is required for the
/// inequality to hold, see the ramp analysis in the tests).
LogGradBoundCheck log_grad_bound_check(const BumpParams& params, double p,
                                       int grid_per_axis = 201);

/// Localized Riesz density at x in D_{2eps}:
///   p(x) ~ -(1/N) sum_j sum_i dQ_d(F_j - x)_i H_i(F, Psi_{D,eps}(F))_j.
/// Draws rejected by degeneracy are harmless when Psi vanishes near the
/// degeneracy set (the chi-square scenario with D away from 0).
EstimateResult localized_density(const Functional& f, const std::vector<double>& x,
                                 const BumpParams& params,
                                 const EstimatorConfig& cfg);

}  // namespace riesz
