#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>

namespace wentzell::detail {

/// splitmix64 stream keyed by (seed, index); identical bytes on every platform.
class SplitMix {
 public:
  SplitMix(std::uint64_t seed, std::uint64_t index)
      : state_(seed ^ (0x9e3779b97f4a7c15ULL * (index + 1))) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in (0, 1).
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller.
  double next_normal() {
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  Eigen::VectorXd normal_vector(int size) {
    Eigen::VectorXd out(size);
    for (int i = 0; i < size; ++i) out(i) = next_normal();
    return out;
  }

 private:
  std::uint64_t state_;
};

}  // namespace wentzell::detail
