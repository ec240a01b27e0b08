#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "epodyn/types.hpp"

namespace epodyn {

inline constexpr double kFeasibilityTolerance = 1e-8;

/// Parameters of the expressed/private opinion model.
///
/// W is the private-opinion trust matrix, A the expressed-opinion interaction
/// matrix (zero diagonal), phi the per-agent expression coupling and d the
/// self-weight diagonal. Feasible parameters satisfy W = D + (I - D) A with
/// both W and A row-stochastic.
struct EpoParameters {
  Matrix W;
  Matrix A;
  Vector phi;
  Vector d;
  std::vector<std::string> developers;

  std::size_t size() const { return static_cast<std::size_t>(W.rows()); }

  /// Builds W from (d, A). A's diagonal is forced to zero.
  static EpoParameters from_decomposition(Vector d, Matrix A, Vector phi,
                                          std::vector<std::string> developers = {});

  /// Human-readable descriptions of every violated constraint; empty when feasible.
  std::vector<std::string> violations(double tol = kFeasibilityTolerance) const;

  /// Throws ValidationError listing all violations.
  void require_feasible(double tol = kFeasibilityTolerance) const;
};

struct StepResult {
  Vector private_next;
  Vector expressed_next;
};

/// One application of the private update followed by the expressed update.
/// The private update consumes the previous expressed vector; the expressed
/// update consumes the fresh private vector.
StepResult epo_step(const EpoParameters& params, const Vector& x_prev, const Vector& xe_prev);

/// Iterates epo_step `steps` times; column 0 holds the initial state.
TrajectoryPair epo_simulate(const EpoParameters& params, const Vector& x0, const Vector& xe0,
                            std::size_t steps);

nlohmann::json to_json(const EpoParameters& params);
/// Re-validates every invariant; malformed documents raise InputError.
EpoParameters params_from_json(const nlohmann::json& doc);

}  // namespace epodyn
