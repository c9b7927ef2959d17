#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "riesz/malliavin.hpp"

namespace riesz {

/// Built-in functional with known structure: F, a catalog of companion G
/// functionals, and closed-form density/score where available.
struct Scenario {
  std::string id;
  int n = 0;
  int d = 0;
  Functional f;
  std::map<std::string, GFunc> g_catalog;  // "one", "F1", "F1sq", "bumpF1"
  std::function<double(const std::vector<double>&)> analytic_density;  // null if none
  std::function<std::vector<double>(const std::vector<double>&)> analytic_score;
  bool local_only = false;  // density formula valid only through localization
  std::string notes;

  bool has_analytic() const { return bool(analytic_density); }
};

struct ScenarioParams {
  // linear scenario: F = A w + b with A d x n (row-major), invertible d = n
  std::vector<double> linear_a = {2.0, 0.0, 0.0, 1.0};
  std::vector<double> linear_b = {0.0, 0.0};
  int linear_d = 2;
  // poly-perturb coupling strength
  double gamma = 0.1;
};

/// ids: gauss-identity-d1|d2|d3, linear, poly-perturb, tanh-couple, chi-square.
/// Throws std::invalid_argument for unknown ids, degenerate linear A, or a
/// poly-perturb gamma whose Jacobian loses positivity on [-6,6]^n.
Scenario get_scenario(const std::string& id, const ScenarioParams& params = {});

std::vector<std::string> scenario_ids();

}  // namespace riesz
