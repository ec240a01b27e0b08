#pragma once

#include <string>
#include <vector>

#include "epodyn/dynamics.hpp"
#include "epodyn/random.hpp"

namespace testutil {

using namespace epodyn;

inline std::vector<std::string> labels(const char* prefix, std::size_t count) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(prefix + std::to_string(i + 1));
  return out;
}

inline OpinionPanel make_panel(const Matrix& values) {
  OpinionPanel p;
  p.developers = labels("dev", static_cast<std::size_t>(values.rows()));
  p.periods = labels("p", static_cast<std::size_t>(values.cols()));
  p.values = values;
  return p;
}

inline Vector random_state(std::size_t n, Rng& rng) {
  Vector v(n);
  for (std::size_t i = 0; i < n; ++i) v(i) = rng.uniform();
  return v;
}

/// Feasible parameters with Phi = I: the expressed series then equals the
/// private one, so a single observed series is exactly representable.
inline EpoParameters candid_params(std::size_t n, Rng& rng) {
  const EpoParameters p = random_feasible_params(n, rng);
  return EpoParameters::from_decomposition(p.d, p.A, Vector::Ones(n));
}

inline double rmse(const Matrix& a, const Matrix& b) {
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

}  // namespace testutil
