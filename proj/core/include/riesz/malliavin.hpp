#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "riesz/expr.hpp"
#include "riesz/jet.hpp"

namespace riesz {

/// A map from the n-dimensional standard Gaussian input to R^d, evaluable
/// to jets. Houses F (and, through GFunc below, G).
struct Functional {
  int n = 0;
  int d = 0;
  std::vector<Expr> components;
  int max_order = 2;  // weights of order m need F-jets up to m + 1

  std::vector<Jet> eval_jets(const std::vector<double>& w, int order) const;
  std::vector<double> eval_values(const std::vector<double>& w) const;
};

/// Scalar functional G, evaluated as a jet at w. The F-jets of the ambient
/// frame are supplied so G may be a composition with F (e.g. a localization
/// bump of F) without re-deriving F.
using GFunc = std::function<Jet(const std::vector<double>& w, int order,
                                const std::vector<Jet>& f_jets)>;

GFunc g_one();
GFunc g_expr(Expr e);
/// G = psi(F^comp) from a univariate map given as value/first/second
/// derivative at a point.
using ScalarC2 = std::function<std::array<double, 3>(double)>;
GFunc g_compose_component(int comp, ScalarC2 psi);
/// G = prod_i psi_i(F^i); factors.size() must equal d.
GFunc g_compose_product(std::vector<ScalarC2> factors);
GFunc g_product(GFunc a, GFunc b);

/// Malliavin covariance matrix sigma^{ij} = <grad F^i, grad F^j> at a point,
/// with inverse kept only when the determinant clears the relative threshold.
struct CovMatrix {
  int d = 0;
  std::vector<double> sigma;              // row-major d x d, symmetric
  std::optional<std::vector<double>> inverse;
  double det = 0.0;
  double cond = 0.0;                      // 1-norm condition estimate

  double at(int i, int j) const { return sigma[std::size_t(i) * d + j]; }
};

/// Raised when a sample draw violates the non-degeneracy condition
/// numerically (det sigma_F below threshold); estimators count and skip.
class DegenerateSampleError : public std::runtime_error {
 public:
  explicit DegenerateSampleError(double det)
      : std::runtime_error("degenerate Malliavin covariance"), det_(det) {}
  double det() const { return det_; }

 private:
  double det_;
};

class WeightOrderError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One Monte Carlo draw with its weight values, kept mainly for inspection.
struct WeightSample {
  std::vector<double> w;
  std::vector<double> f_val;
  double g_val = 0.0;
  std::map<std::vector<int>, double> h;  // multi-index (|alpha| <= 2) -> H value
  double sigma_cond = 0.0;
};

/// Per-point frame caching F-jets, the covariance and its jet-valued
/// inverse; all weight computations at this w go through it.
class MalliavinFrame {
 public:
  /// f_order: highest F-jet order prepared (2 for first-order weights,
  /// 3 when second-order weights will be requested).
  MalliavinFrame(const Functional& f, std::vector<double> w, int f_order,
                 double det_rel_threshold = 1e-12);

  const std::vector<double>& w() const { return w_; }
  const std::vector<Jet>& f_jets() const { return f_jets_; }
  std::vector<double> f_values() const;
  const CovMatrix& cov() const { return cov_; }
  bool degenerate() const { return degenerate_; }

  /// H_i(F; G) for i = 1..d as jets of order r (requires r + 2 <= f_order).
  /// Throws DegenerateSampleError when the covariance was rejected.
  std::vector<Jet> weights(const Jet& g_jet, int r) const;

 private:
  const Functional& f_;
  std::vector<double> w_;
  int f_order_;
  bool degenerate_ = false;
  std::vector<Jet> f_jets_;
  std::vector<Jet> df_;         // d x n partials, order f_order - 1
  std::vector<Jet> sigma_hat_;  // d x d jet inverse, order f_order - 1
  CovMatrix cov_;

  const Jet& df(int j, int k) const { return df_[std::size_t(j) * f_.n + k]; }
  const Jet& shat(int i, int j) const { return sigma_hat_[std::size_t(i) * f_.d + j]; }
};

CovMatrix malliavin_cov(const Functional& f, const std::vector<double>& w,
                        double det_rel_threshold = 1e-12);

/// Finite-dimensional Skorohod divergence of a vector field u with d = n:
/// delta(u) = sum_k u_k w_k - sum_k d_k u_k.
double skorohod(const Functional& u, const std::vector<double>& w);

/// Ornstein-Uhlenbeck operator L f = sum_k d_k f w_k - sum_k d^2_kk f.
double ou_operator(const Expr& f, const std::vector<double>& w);

/// First-order weights H_i(F; G) = -sum_j delta(G sigma_hat^{ji} grad F^j),
/// the convention under which E(d_i f(F) G) = -E(f(F) H_i(F;G)).
std::vector<double> weight_first(const Functional& f, const GFunc& g,
                                 const std::vector<double>& w,
                                 double det_rel_threshold = 1e-12);

/// Recursive weight H_alpha(F;G) = H_{alpha_k}(F, H_{(alpha_1..alpha_{k-1})}(F,G));
/// satisfies E(d_alpha f(F) G) = (-1)^{|alpha|} E(f(F) H_alpha(F;G)).
/// alpha components are 0-based; |alpha| is capped at 2.
double weight_multi(const Functional& f, const GFunc& g,
                    const std::vector<double>& w, const std::vector<int>& alpha,
                    double det_rel_threshold = 1e-12);

/// Evaluates a full WeightSample (all H_alpha up to order `order`, 1 or 2).
WeightSample make_weight_sample(const Functional& f, const GFunc& g,
                                const std::vector<double>& w, int order,
                                double det_rel_threshold = 1e-12);

}  // namespace riesz
