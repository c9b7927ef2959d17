#pragma once

#include <array>
#include <cstdint>

namespace riesz {

/// Philox4x32-10 counter-based generator (Salmon et al., SC 2011).
/// A (key, counter) pair maps to 128 random bits with no sequential state,
/// so any sample index can be regenerated independently of scheduling.
struct Philox {
  static std::array<std::uint32_t, 4> block(std::uint64_t key,
                                            const std::array<std::uint32_t, 4>& counter);
};

/// Two standard normals from one Philox block via Box-Muller.
/// `stream` separates independent uses of the same (seed, index) lattice
/// (e.g. the main Gaussian draw vs. auxiliary smoothing noise).
std::array<double, 2> normal_pair(std::uint64_t seed, std::uint64_t index,
                                  std::uint32_t stream);

/// Uniform in [0, 1) from half a Philox block.
double uniform01(std::uint64_t seed, std::uint64_t index, std::uint32_t stream);

/// Fills out[0..n) with the standard normal draw for one sample index.
/// Deterministic in (seed, sample_index, stream, n).
void sample_normals(std::uint64_t seed, std::uint64_t sample_index,
                    std::uint32_t stream, double* out, int n);

}  // namespace riesz
