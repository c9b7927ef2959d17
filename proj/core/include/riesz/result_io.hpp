#pragma once

#include <iosfwd>
#include <string>

#include "riesz/estimators.hpp"

namespace riesz {

/// One line-JSON record per estimate, fields exactly:
/// kind, scenario, x, value, stderr, N, N_rejected, r_min, p, seed.
std::string to_json_line(const EstimateResult& r);

/// Metadata header record emitted once per run: version, seed, config hash.
std::string meta_json_line(const std::string& version, std::uint64_t seed,
                           const std::string& config_hash);

/// FNV-1a hash of a config blob, hex-encoded; stable across runs.
std::string config_hash(const std::string& text);

/// CSV dump of probe/value/stderr triples with a fixed column order.
void write_grid_csv(std::ostream& os, const std::vector<std::vector<double>>& points,
                    const std::vector<double>& values,
                    const std::vector<double>& std_errors);

}  // namespace riesz
