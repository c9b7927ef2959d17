#include "riesz/result_io.hpp"

#include <json.hpp>

#include <ostream>

namespace riesz {

std::string to_json_line(const EstimateResult& r) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(r.kind);
  j["scenario"] = r.scenario;
  j["x"] = r.x;
  j["value"] = r.value;
  j["stderr"] = r.std_error;
  j["N"] = r.n_used + r.n_rejected;
  j["N_rejected"] = r.n_rejected;
  j["r_min"] = r.r_min_used;
  j["p"] = r.p;
  j["seed"] = r.seed;
  return j.dump();
}

std::string meta_json_line(const std::string& version, std::uint64_t seed,
                           const std::string& hash) {
  nlohmann::ordered_json j;
  j["kind"] = "meta";
  j["version"] = version;
  j["seed"] = seed;
  j["config_hash"] = hash;
  return j.dump();
}

std::string config_hash(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

void write_grid_csv(std::ostream& os, const std::vector<std::vector<double>>& points,
                    const std::vector<double>& values,
                    const std::vector<double>& std_errors) {
  if (points.empty()) return;
  const int d = int(points[0].size());
  for (int i = 0; i < d; ++i) os << "x" << (i + 1) << ",";
  os << "value,stderr\n";
  for (std::size_t k = 0; k < points.size(); ++k) {
    for (int i = 0; i < d; ++i) os << points[k][std::size_t(i)] << ",";
    os << values[k] << "," << (k < std_errors.size() ? std_errors[k] : 0.0) << "\n";
  }
}

}  // namespace riesz
