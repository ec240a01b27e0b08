#pragma once

#include <cstdint>
#include <random>

#include "epodyn/dynamics.hpp"

namespace epodyn {

/// mt19937_64 with platform-independent uniform draws (the standard
/// distributions are implementation-defined, which would break seed
/// reproducibility across toolchains).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, std::uint64_t stream);

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t next() { return engine_(); }

  /// Uniform draw from the probability simplex of dimension m.
  Vector simplex(std::size_t m);

 private:
  std::mt19937_64 engine_;
};

/// d, phi uniform in [0,1]; off-diagonal rows of A uniform on the simplex.
EpoParameters random_feasible_params(std::size_t n, Rng& rng);

}  // namespace epodyn
