#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "riesz/estimators.hpp"
#include "riesz/scenarios.hpp"

namespace riesz {

/// Rectangular-grid tabulation of a density and its log-gradient (the score
/// field d^mu 1 = grad ln p on the positivity set). d in {1, 2, 3}.
class GridField {
 public:
  int d = 0;
  std::array<double, 3> lo{}, hi{};
  std::array<int, 3> res{};
  double threshold = 0.0;  // positivity cutoff on p_hat

  std::vector<double> p_hat;
  std::vector<double> logp;          // defined on inside nodes only
  std::vector<std::uint8_t> inside;  // U_mu node set {p_hat > threshold}
  std::vector<double> score;         // d components per node
  std::vector<double> std_errors;    // empty for analytic sources
  bool analytic_score = false;

  long long node_count() const;
  long long node_index(const std::array<int, 3>& idx) const;
  std::array<int, 3> node_coords_idx(long long node) const;
  std::vector<double> node_point(long long node) const;
  double spacing(int axis) const;

  /// Nearest grid node; throws std::domain_error outside the box.
  long long snap_node(const std::vector<double>& x) const;
  bool is_inside_node(long long node) const { return inside[std::size_t(node)] != 0; }

  /// Multilinear interpolation; valid only where the surrounding cell is
  /// entirely inside U_mu (throws OutsideSupportError otherwise).
  double interp_logp(const std::vector<double>& x) const;
  std::vector<double> interp_score(const std::vector<double>& x) const;
  bool cell_inside(const std::vector<double>& x) const;

  /// CSV node dump: coordinates, p_hat, logp, score components.
  void dump_csv(std::ostream& os) const;
};

struct GridSpec {
  std::vector<double> lo, hi;  // d entries each
  int per_axis = 61;
  double threshold_rel = 1e-4;  // positivity cutoff as a fraction of max p_hat
};

GridField build_grid_field_analytic(const Scenario& s, const GridSpec& spec);
GridField build_grid_field_estimated(const Functional& f, const GridSpec& spec,
                                     const EstimatorConfig& cfg);
GridField build_grid_field_samples(const std::vector<std::vector<double>>& samples,
                                   const GridSpec& spec, double bandwidth = 0.0);
/// Analytic field from an explicit density (used for constructed test
/// densities such as mixtures with a positivity gap).
GridField build_grid_field_function(
    int d, const std::function<double(const std::vector<double>&)>& density,
    const GridSpec& spec);

struct PathPolyline {
  std::vector<std::vector<double>> points;
};

struct DistanceResult {
  double value = 0.0;
  bool infinite = false;  // x and y in different connected components
  PathPolyline path;      // realizable grid path (seed for the energy descent)
};

struct GeometryOptions {
  /// Width of the log-density level bands used by the semi-distance
  /// relaxation; 0 picks (logp range)/2048.
  double level_delta = 0.0;
};

/// Grid approximation of the semi-distance d_mu(x, y): the infimum over
/// paths inside U_mu of the total variation of ln p. Computed on the
/// level-band component graph (free transport along connected level bands,
/// unit band steps across), which converges to the path-infimum; the
/// reported path realizes the node-graph shortest path (8-neighborhood in
/// 2d, 26 in 3d) with edge weight |logp(v) - logp(u)|.
DistanceResult riesz_distance(const GridField& field, const std::vector<double>& x,
                              const std::vector<double>& y,
                              const GeometryOptions& opts = {});

/// Square root of the path energy (dist-2bis): starts from the shortest
/// path resampled to `segments` legs, then coordinate descent on interior
/// vertices minimizing segments * sum_k <score(mid_k), delta_k>^2.
double energy_distance(const GridField& field, const std::vector<double>& x,
                       const std::vector<double>& y, int segments,
                       int iterations, const GeometryOptions& opts = {});

/// Midpoint-rule line integral of <score, dphi> along the polyline.
double bell_path_integral(const GridField& field, const PathPolyline& path);

struct PositivityReport {
  int num_components = 0;
  std::vector<long long> component_sizes;
  /// per probe: (p_hat at probe, distance to the first probe)
  std::vector<std::pair<double, double>> probe_findings;
};

PositivityReport positivity_report(const GridField& field,
                                   const std::vector<std::vector<double>>& probes,
                                   const GeometryOptions& opts = {});

}  // namespace riesz
