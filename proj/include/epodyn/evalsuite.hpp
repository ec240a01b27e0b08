#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "epodyn/estimator.hpp"

namespace epodyn {

struct PeriodGroup {
  std::string label;
  /// Column indices into the compared matrices.
  std::vector<std::size_t> columns;
};

struct EvalReport {
  /// Signed sum of observed - predicted.
  double sum_residuals = 0.0;
  double mae = 0.0;
  double mape_percent = 0.0;
  /// Entries left out of MAPE because |observed| <= 1e-9.
  std::size_t mape_excluded = 0;
  std::size_t entries = 0;
  std::vector<std::pair<std::string, double>> rmse_by_group;
  bool clamped_upstream = false;
  bool imputed_upstream = false;

  double rmse(const std::string& group) const;
};

inline constexpr double kMapeEpsilon = 1e-9;

EvalReport error_metrics(const Matrix& predicted, const Matrix& observed,
                         const std::vector<PeriodGroup>& groups);

/// Forward simulation of `horizon` steps from X = X^e = observed panel at the
/// last fit period. Column 0 is that initial state.
TrajectoryPair predict(const EpoParameters& params, const OpinionPanel& panel,
                       PeriodRange fit_range, std::size_t horizon);

/// Simulation across the fit window from X = X^e = first fit period.
TrajectoryPair reproduce_fit_window(const EpoParameters& params, const OpinionPanel& panel,
                                    PeriodRange fit_range);

/// In-sample error over the fit window (initial column excluded, group
/// "fit") plus one group per forecast step ("h1", "h2", ...), all on the
/// expressed trajectory.
EvalReport evaluate_fit(const EpoParameters& params, const OpinionPanel& panel,
                        PeriodRange fit_range, std::size_t horizon);

struct WindowRow {
  std::size_t fit_length = 0;
  /// (period index, RMSE) for every forecast period.
  std::vector<std::pair<std::size_t, double>> forecast_rmse;
  EvalReport report;
  double objective = 0.0;
};

/// For each length L: fit on periods [0, L), forecast the rest of the panel.
std::vector<WindowRow> window_experiment(const OpinionPanel& panel,
                                         const std::vector<std::size_t>& fit_lengths,
                                         const FitOptions& options = {});

nlohmann::json to_json(const EvalReport& report);

}  // namespace epodyn
