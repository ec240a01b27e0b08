#include "epodyn/types.hpp"

#include <cmath>
#include <set>

namespace epodyn {

namespace {

void require_unique(const std::vector<std::string>& labels, const char* what) {
  std::set<std::string> seen;
  for (const auto& label : labels) {
    if (!seen.insert(label).second) {
      throw ValidationError(std::string("duplicate ") + what + " label '" + label + "'");
    }
  }
}

}  // namespace

void OpinionPanel::validate(bool require_unit) const {
  if (static_cast<std::size_t>(values.rows()) != developers.size()) {
    throw DimensionError("panel rows (developers)", developers.size(),
                         static_cast<std::size_t>(values.rows()));
  }
  if (static_cast<std::size_t>(values.cols()) != periods.size()) {
    throw DimensionError("panel columns (periods)", periods.size(),
                         static_cast<std::size_t>(values.cols()));
  }
  require_unique(developers, "developer");
  require_unique(periods, "period");
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index t = 0; t < values.cols(); ++t) {
      const double v = values(i, t);
      if (!std::isfinite(v)) {
        throw ValidationError("panel value for developer '" + developers[i] + "' in period '" +
                              periods[t] + "' is not finite");
      }
      if (require_unit && (v < 0.0 || v > 1.0)) {
        throw ValidationError("panel value for developer '" + developers[i] + "' in period '" +
                              periods[t] + "' lies outside [0,1]");
      }
    }
  }
}

}  // namespace epodyn
