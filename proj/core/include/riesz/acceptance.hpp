#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "riesz/estimators.hpp"

namespace riesz {

struct CriterionResult {
  std::string id;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  bool quick = false;   // reduced sample counts for a fast smoke run
  int workers = 0;      // 0 = hardware concurrency
  std::ostream* live = nullptr;  // stream for one pass/fail line per criterion
};

/// Runs the self-verification suite (one entry per criterion) and returns
/// the per-criterion outcomes. Hermetic: no files, no network.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts);

bool all_passed(const std::vector<CriterionResult>& results);

/// Compactly supported smooth product bump centered at `center` with
/// half-width `width`, exposed as a duality test function (jets to order 2).
TestFn make_test_bump(std::vector<double> center, double width);

}  // namespace riesz
