#include "riesz/rng.hpp"

#include <cmath>
#include <numbers>

namespace riesz {

namespace {

constexpr std::uint32_t kPhiloxW32A = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW32B = 0xBB67AE85u;
constexpr std::uint32_t kPhiloxM4x32A = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM4x32B = 0xCD9E8D57u;

inline void philox_round(std::array<std::uint32_t, 4>& c, std::uint32_t k0,
                         std::uint32_t k1) {
  const std::uint64_t p0 = std::uint64_t(kPhiloxM4x32A) * c[0];
  const std::uint64_t p1 = std::uint64_t(kPhiloxM4x32B) * c[2];
  const std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
  const std::uint32_t hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
  c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
}

// 53-bit uniform in (0, 1] -- strictly positive so log() below is safe.
inline double to_unit_open(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (std::uint64_t(hi) << 32) | lo;
  return double((bits >> 11) + 1) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> Philox::block(
    std::uint64_t key, const std::array<std::uint32_t, 4>& counter) {
  std::array<std::uint32_t, 4> c = counter;
  std::uint32_t k0 = std::uint32_t(key);
  std::uint32_t k1 = std::uint32_t(key >> 32);
  for (int round = 0; round < 10; ++round) {
    philox_round(c, k0, k1);
    k0 += kPhiloxW32A;
    k1 += kPhiloxW32B;
  }
  return c;
}

std::array<double, 2> normal_pair(std::uint64_t seed, std::uint64_t index,
                                  std::uint32_t stream) {
  const std::array<std::uint32_t, 4> ctr = {
      std::uint32_t(index), std::uint32_t(index >> 32), stream, 0u};
  const auto b = Philox::block(seed, ctr);
  const double u1 = to_unit_open(b[0], b[1]);
  const double u2 = to_unit_open(b[2], b[3]);
  const double rho = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return {rho * std::cos(theta), rho * std::sin(theta)};
}

double uniform01(std::uint64_t seed, std::uint64_t index, std::uint32_t stream) {
  const std::array<std::uint32_t, 4> ctr = {
      std::uint32_t(index), std::uint32_t(index >> 32), stream, 1u};
  const auto b = Philox::block(seed, ctr);
  const std::uint64_t bits = (std::uint64_t(b[0]) << 32) | b[1];
  return double(bits >> 11) * 0x1.0p-53;
}

void sample_normals(std::uint64_t seed, std::uint64_t sample_index,
                    std::uint32_t stream, double* out, int n) {
  const std::uint64_t pairs = std::uint64_t(n + 1) / 2;
  const std::uint64_t base = sample_index * pairs;
  for (std::uint64_t p = 0; p < pairs; ++p) {
    const auto z = normal_pair(seed, base + p, stream);
    out[2 * p] = z[0];
    if (int(2 * p + 1) < n) out[2 * p + 1] = z[1];
  }
}

}  // namespace riesz
