#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "json.hpp"

#include "epodyn/dynamics.hpp"

namespace epodyn {

struct FitOptions {
  std::size_t multistart_count = 16;
  std::size_t max_iterations = 10000;
  double step_tolerance = 1e-8;
  double feasibility_tolerance = kFeasibilityTolerance;
  std::uint64_t seed = 0;

  void validate() const;
};

/// `panel` holds the observed (expressed) series. Without `private_series`
/// it stands in for both x(t) and x^e(t); when the private trajectory is
/// known (synthetic data from the simulator) it is used for x(t).
struct FitProblem {
  OpinionPanel panel;
  PeriodRange fit_range;
  FitOptions options;
  std::optional<Matrix> private_series;

  void validate() const;
};

struct FitResult {
  EpoParameters params;
  double objective_value = 0.0;
  std::size_t iterations_used = 0;
  bool converged = false;
  /// One entry per start; failed starts hold NaN.
  std::vector<double> per_start_objectives;
};

/// Sum over t in [first, last) of
///   |x(t+1) - diag(W) x(t) - (W - diag(W)) xe(t)|^2
/// + |xe(t+1) - Phi x(t+1) - (I - Phi) A xe(t)|^2.
double evaluate_objective(const EpoParameters& params, const Matrix& x, const Matrix& xe,
                          PeriodRange range);
double evaluate_objective(const EpoParameters& params, const OpinionPanel& panel,
                          PeriodRange range);

/// Gradient with respect to the free variables (d, phi, off-diagonal A),
/// with W tied to D + (I - D) A. Diagonal entries of `A` are always zero.
struct ObjectiveGradient {
  Vector d;
  Vector phi;
  Matrix A;
};

ObjectiveGradient objective_gradient(const EpoParameters& params, const Matrix& x,
                                     const Matrix& xe, PeriodRange range);

/// Central differences; parameters are perturbed without re-projection.
ObjectiveGradient finite_difference_gradient(const EpoParameters& params, const Matrix& x,
                                             const Matrix& xe, PeriodRange range,
                                             double step = 1e-6);

/// Euclidean projection onto {v : v >= 0, sum v = 1}.
Vector project_simplex(const Vector& v);

/// Multistart projected-gradient fit; returns the best start.
FitResult fit(const FitProblem& problem);

nlohmann::json to_json(const FitResult& result);
FitResult fit_result_from_json(const nlohmann::json& doc);

}  // namespace epodyn
