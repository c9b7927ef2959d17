#pragma once

#include <span>
#include <vector>

namespace riesz {

/// Dimension-dependent constants of the Poisson kernel Q_d and its
/// truncated gradient. Conventions: a_1 = 1 and Q_1(x) = max(x, 0);
/// a_d = 2 pi^{d/2} / Gamma(d/2) for d >= 2; A_2 = 1 and A_d = d-2 for d > 2.
struct KernelParams {
  int d = 2;
  double a_d = 0.0;     // area of the unit sphere in R^d
  double big_a_d = 0.0; // the constant A_d in the gradient formula
  double r_min = 0.0;   // truncation radius; 0 means the untruncated kernel

  static KernelParams make(int d, double r_min = 0.0);
};

double unit_sphere_area(int d);

/// Q_d at x. Throws std::domain_error at the singularity (x = 0, d >= 2).
double poisson_kernel(const KernelParams& p, std::span<const double> x);

/// Gradient of Q_d (the Riesz kernel): component i is a_d^{-1} A_d x_i/|x|^d.
/// For d = 1 returns the indicator of (0, inf).
std::vector<double> grad_poisson_kernel(const KernelParams& p,
                                        std::span<const double> x);

/// Radially clamped gradient: exact outside |x| >= r_min, frozen at the
/// r_min sphere inside, zero at the origin. Requires r_min > 0. For d = 1
/// the kernel gradient is already bounded and the clamp is a no-op.
std::vector<double> truncated_grad(const KernelParams& p,
                                   std::span<const double> x);

/// In-place variant used by the sampling hot loop: writes the (possibly
/// clamped when p.r_min > 0) gradient of Q_d at x into out.
void grad_kernel_into(const KernelParams& p, const double* x, double* out);

struct LocalLpNorm {
  double value = 0.0;
  bool finite = true;  // false means the integral diverges (+inf flag)
};

/// Closed-form local integrability of one Riesz-kernel component:
/// integral over {|x| <= R} of |d_i Q_d|^q, reduced to polar coordinates
/// with the angular factor S_q evaluated by adaptive quadrature.
/// Diverges (finite = false) when q + d - d*q <= 0, i.e. q >= d/(d-1).
LocalLpNorm local_lp_norm(const KernelParams& p, double q, double R, int i);

/// Angular moment S_q = integral over the unit sphere of |omega_i|^q.
double sphere_component_moment(int d, double q);

}  // namespace riesz
