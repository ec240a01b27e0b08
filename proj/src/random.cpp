#include "epodyn/random.hpp"

#include <cmath>

namespace epodyn {

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

Vector Rng::simplex(std::size_t m) {
  Vector v(m);
  for (std::size_t i = 0; i < m; ++i) v(i) = -std::log1p(-uniform());
  const double total = v.sum();
  if (total > 0.0) {
    v /= total;
  } else {
    v.setConstant(1.0 / static_cast<double>(m));
  }
  return v;
}

EpoParameters random_feasible_params(std::size_t n, Rng& rng) {
  Vector d(n), phi(n);
  for (std::size_t i = 0; i < n; ++i) d(i) = rng.uniform();
  for (std::size_t i = 0; i < n; ++i) phi(i) = rng.uniform();
  Matrix A = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vector row = rng.simplex(n - 1);
    for (std::size_t j = 0, k = 0; j < n; ++j) {
      if (j != i) A(i, j) = row(k++);
    }
  }
  return EpoParameters::from_decomposition(std::move(d), std::move(A), std::move(phi));
}

}  // namespace epodyn
