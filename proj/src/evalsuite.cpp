#include "epodyn/evalsuite.hpp"

#include <cmath>
#include <set>

namespace epodyn {

double EvalReport::rmse(const std::string& group) const {
  for (const auto& [label, value] : rmse_by_group) {
    if (label == group) return value;
  }
  throw ValidationError("no RMSE group labelled '" + group + "'");
}

EvalReport error_metrics(const Matrix& predicted, const Matrix& observed,
                         const std::vector<PeriodGroup>& groups) {
  if (predicted.rows() != observed.rows()) {
    throw DimensionError("predicted rows", observed.rows(), predicted.rows());
  }
  if (predicted.cols() != observed.cols()) {
    throw DimensionError("predicted columns", observed.cols(), predicted.cols());
  }
  if (groups.empty()) throw ValidationError("error_metrics needs at least one period group");

  std::set<std::size_t> seen;
  for (const auto& g : groups) {
    if (g.columns.empty()) throw ValidationError("period group '" + g.label + "' is empty");
    for (std::size_t c : g.columns) {
      if (c >= static_cast<std::size_t>(observed.cols())) {
        throw ValidationError("period group '" + g.label + "' references column " +
                              std::to_string(c) + " beyond the compared range");
      }
      if (!seen.insert(c).second) {
        throw ValidationError("period column " + std::to_string(c) +
                              " appears in more than one group");
      }
    }
  }

  EvalReport rep;
  const Eigen::Index n = observed.rows();
  double abs_sum = 0.0, pct_sum = 0.0;
  std::size_t pct_count = 0;
  for (const auto& g : groups) {
    double sq = 0.0;
    for (std::size_t c : g.columns) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double obs = observed(i, static_cast<Eigen::Index>(c));
        const double res = obs - predicted(i, static_cast<Eigen::Index>(c));
        rep.sum_residuals += res;
        abs_sum += std::abs(res);
        sq += res * res;
        if (std::abs(obs) > kMapeEpsilon) {
          pct_sum += std::abs(res) / std::abs(obs);
          ++pct_count;
        } else {
          ++rep.mape_excluded;
        }
      }
    }
    const auto count = static_cast<double>(g.columns.size() * static_cast<std::size_t>(n));
    rep.rmse_by_group.emplace_back(g.label, std::sqrt(sq / count));
    rep.entries += g.columns.size() * static_cast<std::size_t>(n);
  }
  rep.mae = rep.entries ? abs_sum / static_cast<double>(rep.entries) : 0.0;
  rep.mape_percent = pct_count ? 100.0 * pct_sum / static_cast<double>(pct_count) : 0.0;
  return rep;
}

TrajectoryPair predict(const EpoParameters& params, const OpinionPanel& panel,
                       PeriodRange fit_range, std::size_t horizon) {
  if (horizon < 1) throw ValidationError("prediction horizon must be >= 1");
  params.require_feasible();
  if (fit_range.last >= panel.num_periods()) {
    throw ValidationError("fit_range ends after the panel's last period");
  }
  if (panel.num_developers() != params.size()) {
    throw DimensionError("panel developers", params.size(), panel.num_developers());
  }
  const Vector start = panel.values.col(static_cast<Eigen::Index>(fit_range.last));
  return epo_simulate(params, start, start, horizon);
}

TrajectoryPair reproduce_fit_window(const EpoParameters& params, const OpinionPanel& panel,
                                    PeriodRange fit_range) {
  if (fit_range.last >= panel.num_periods() || fit_range.length() < 2) {
    throw ValidationError("fit_range must cover at least two periods inside the panel");
  }
  if (panel.num_developers() != params.size()) {
    throw DimensionError("panel developers", params.size(), panel.num_developers());
  }
  const Vector start = panel.values.col(static_cast<Eigen::Index>(fit_range.first));
  return epo_simulate(params, start, start, fit_range.transitions());
}

EvalReport evaluate_fit(const EpoParameters& params, const OpinionPanel& panel,
                        PeriodRange fit_range, std::size_t horizon) {
  const std::size_t T = panel.num_periods();
  if (fit_range.last >= T || fit_range.last + horizon > T - 1) {
    throw ValidationError("horizon " + std::to_string(horizon) + " runs past the panel's " +
                          std::to_string(T) + " periods");
  }
  const std::size_t in_sample = fit_range.transitions();
  const auto cols = static_cast<Eigen::Index>(in_sample + horizon);
  const auto n = static_cast<Eigen::Index>(panel.num_developers());
  Matrix predicted(n, cols);
  const Matrix observed =
      panel.values.middleCols(static_cast<Eigen::Index>(fit_range.first) + 1, cols);

  std::vector<PeriodGroup> groups;
  if (in_sample > 0) {
    const TrajectoryPair window = reproduce_fit_window(params, panel, fit_range);
    predicted.leftCols(static_cast<Eigen::Index>(in_sample)) =
        window.expressed.rightCols(static_cast<Eigen::Index>(in_sample));
    PeriodGroup fit_group{"fit", {}};
    for (std::size_t c = 0; c < in_sample; ++c) fit_group.columns.push_back(c);
    groups.push_back(std::move(fit_group));
  }
  if (horizon > 0) {
    const TrajectoryPair forecast = predict(params, panel, fit_range, horizon);
    predicted.rightCols(static_cast<Eigen::Index>(horizon)) =
        forecast.expressed.rightCols(static_cast<Eigen::Index>(horizon));
    for (std::size_t h = 1; h <= horizon; ++h) {
      groups.push_back({"h" + std::to_string(h), {in_sample + h - 1}});
    }
  }
  return error_metrics(predicted, observed, groups);
}

std::vector<WindowRow> window_experiment(const OpinionPanel& panel,
                                         const std::vector<std::size_t>& fit_lengths,
                                         const FitOptions& options) {
  const std::size_t T = panel.num_periods();
  if (fit_lengths.empty()) throw ValidationError("window experiment needs at least one fit length");
  for (std::size_t L : fit_lengths) {
    if (L < 3 || L + 1 > T) {
      throw ValidationError("fit length " + std::to_string(L) + " must lie in [3, " +
                            std::to_string(T > 0 ? T - 1 : 0) + "] for a " + std::to_string(T) +
                            "-period panel");
    }
  }
  std::vector<WindowRow> rows;
  for (std::size_t L : fit_lengths) {
    FitProblem problem{panel, {0, L - 1}, options, std::nullopt};
    const FitResult result = fit(problem);
    WindowRow row;
    row.fit_length = L;
    row.objective = result.objective_value;
    row.report = evaluate_fit(result.params, panel, problem.fit_range, T - L);
    for (std::size_t h = 1; h <= T - L; ++h) {
      row.forecast_rmse.emplace_back(L + h - 1, row.report.rmse("h" + std::to_string(h)));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json to_json(const EvalReport& report) {
  auto ordered = nlohmann::json::array();
  for (const auto& [label, value] : report.rmse_by_group) {
    ordered.push_back({{"group", label}, {"rmse", value}});
  }
  return {{"sum_residuals", report.sum_residuals},
          {"mae", report.mae},
          {"mape_percent", report.mape_percent},
          {"mape_excluded", report.mape_excluded},
          {"entries", report.entries},
          {"rmse_by_group", std::move(ordered)},
          {"clamped_upstream", report.clamped_upstream},
          {"imputed_upstream", report.imputed_upstream}};
}

}  // namespace epodyn
