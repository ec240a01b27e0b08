#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace epodyn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Error kinds map onto CLI exit codes: malformed input (2), validation (3),
// numerical failure (4).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public ValidationError {
 public:
  DimensionError(const std::string& dimension, std::size_t expected, std::size_t actual)
      : ValidationError("dimension mismatch in " + dimension + ": expected " +
                        std::to_string(expected) + ", got " + std::to_string(actual)),
        dimension_(dimension) {}
  const std::string& dimension() const { return dimension_; }

 private:
  std::string dimension_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Complete developer x period grid of scalar opinions. Rows follow
/// `developers`, columns follow `periods`.
struct OpinionPanel {
  std::vector<std::string> developers;
  std::vector<std::string> periods;
  Matrix values;

  std::size_t num_developers() const { return developers.size(); }
  std::size_t num_periods() const { return periods.size(); }

  /// Throws ValidationError on shape mismatch, duplicate labels, or
  /// non-finite entries. `require_unit` additionally enforces [0,1].
  void validate(bool require_unit = true) const;
};

/// Inclusive range of period (column) indices.
struct PeriodRange {
  std::size_t first = 0;
  std::size_t last = 0;

  std::size_t length() const { return last >= first ? last - first + 1 : 0; }
  std::size_t transitions() const { return length() ? length() - 1 : 0; }
};

/// Private (X) and expressed (X^e) trajectories, one column per step.
struct TrajectoryPair {
  Matrix private_opinions;
  Matrix expressed;
};

}  // namespace epodyn
