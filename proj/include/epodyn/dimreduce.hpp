#pragma once

#include <cstddef>
#include <vector>

#include "json.hpp"

#include "epodyn/types.hpp"

namespace epodyn {

/// Principal axes of the fitting data plus the per-component min-max bounds
/// observed on that data.
struct PcaModel {
  Vector mean;
  /// r x q, orthonormal rows, sign fixed so each row's largest-magnitude
  /// coordinate is positive.
  Matrix components;
  Vector explained_variance;
  Vector explained_variance_ratio;
  Vector lo;
  Vector hi;
  /// Components whose fit-time projections have zero spread; they normalize to 0.5.
  std::vector<bool> degenerate;
  /// Numerical rank of the centered data.
  std::size_t rank = 0;
  /// Set when r exceeds the rank; trailing components are an arbitrary
  /// orthonormal completion with ratio 0.
  bool rank_deficient = false;

  std::size_t dim() const { return static_cast<std::size_t>(components.cols()); }
  std::size_t retained() const { return static_cast<std::size_t>(components.rows()); }
};

PcaModel pca_fit(const Matrix& data, std::size_t r);

/// Raw component scores (centered data projected on the retained axes).
Matrix pca_project(const PcaModel& model, const Matrix& data);

struct NormalizedProjection {
  Matrix values;
  /// Entries that fell outside the fit-time bounds and were clamped.
  std::size_t clamped = 0;
};

NormalizedProjection pca_transform_normalized(const PcaModel& model, const Matrix& data);

/// Explained-variance ratio of every component, descending.
Vector explained_variance_spectrum(const Matrix& data);

struct QualityReport {
  std::size_t k = 0;
  double trustworthiness = 0.0;
  double continuity = 0.0;
  double mrre = 0.0;
  double spearman_global = 0.0;
};

/// Neighbourhood-preservation scores of `low` as an embedding of `high`.
/// Requires m >= k + 2 and 2m - 3k - 1 > 0.
QualityReport quality_report(const Matrix& high, const Matrix& low, std::size_t k);

/// Requested k clamped to the largest value quality_report accepts for m points.
std::size_t clamp_neighborhood(std::size_t requested, std::size_t m);

nlohmann::json to_json(const PcaModel& model);
PcaModel pca_model_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const QualityReport& report);

}  // namespace epodyn
