#include "epodyn/dynamics.hpp"

#include <cmath>
#include <sstream>

namespace epodyn {

namespace {

std::string fmt_entry(const char* name, Eigen::Index i, Eigen::Index j, double v) {
  std::ostringstream os;
  os << name << "(" << i << "," << j << ")=" << v;
  return os.str();
}

void check_stochastic_rows(const Matrix& M, const char* name, double tol,
                           std::vector<std::string>& out) {
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      const double v = M(i, j);
      if (!std::isfinite(v) || v < -tol || v > 1.0 + tol) {
        out.push_back(fmt_entry(name, i, j, v) + " outside [0,1]");
      }
    }
    const double sum = M.row(i).sum();
    if (!(std::abs(sum - 1.0) <= tol)) {
      std::ostringstream os;
      os << name << " row " << i << " sums to " << sum << ", not 1";
      out.push_back(os.str());
    }
  }
}

void check_unit_interval(const Vector& v, const char* name, std::vector<std::string>& out) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(v(i) >= 0.0 && v(i) <= 1.0)) {
      std::ostringstream os;
      os << name << "[" << i << "]=" << v(i) << " outside [0,1]";
      out.push_back(os.str());
    }
  }
}

void require_length(const Vector& v, std::size_t n, const char* name) {
  if (static_cast<std::size_t>(v.size()) != n) {
    throw DimensionError(name, n, static_cast<std::size_t>(v.size()));
  }
}

}  // namespace

EpoParameters EpoParameters::from_decomposition(Vector d, Matrix A, Vector phi,
                                                std::vector<std::string> developers) {
  const auto n = static_cast<std::size_t>(A.rows());
  if (static_cast<std::size_t>(A.cols()) != n) {
    throw DimensionError("A columns", n, static_cast<std::size_t>(A.cols()));
  }
  require_length(d, n, "d");
  require_length(phi, n, "phi");
  if (!developers.empty() && developers.size() != n) {
    throw DimensionError("developers", n, developers.size());
  }
  A.diagonal().setZero();
  EpoParameters p;
  p.W = A;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    p.W.row(i) *= (1.0 - d(i));
    p.W(i, i) = d(i);
  }
  p.A = std::move(A);
  p.phi = std::move(phi);
  p.d = std::move(d);
  p.developers = std::move(developers);
  return p;
}

std::vector<std::string> EpoParameters::violations(double tol) const {
  std::vector<std::string> out;
  const Eigen::Index n = W.rows();
  if (W.cols() != n || A.rows() != n || A.cols() != n || phi.size() != n || d.size() != n) {
    out.push_back("inconsistent parameter shapes");
    return out;
  }
  if (!developers.empty() && static_cast<Eigen::Index>(developers.size()) != n) {
    out.push_back("developer list length does not match parameter size");
  }
  check_stochastic_rows(W, "W", tol, out);
  check_stochastic_rows(A, "A", tol, out);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (A(i, i) != 0.0) out.push_back(fmt_entry("A", i, i, A(i, i)) + " on diagonal, expected 0");
  }
  check_unit_interval(phi, "phi", out);
  check_unit_interval(d, "d", out);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double expected = (i == j ? d(i) : 0.0) + (1.0 - d(i)) * A(i, j);
      if (!(std::abs(W(i, j) - expected) <= tol)) {
        out.push_back(fmt_entry("W", i, j, W(i, j)) + " differs from D + (I-D)A");
      }
    }
  }
  return out;
}

void EpoParameters::require_feasible(double tol) const {
  const auto v = violations(tol);
  if (v.empty()) return;
  std::string msg = "infeasible EPO parameters:";
  for (const auto& s : v) msg += "\n  " + s;
  throw ValidationError(msg);
}

namespace {

StepResult step_unchecked(const EpoParameters& params, const Vector& x_prev,
                          const Vector& xe_prev) {
  const Eigen::Index n = params.W.rows();
  StepResult r;
  r.private_next.resize(n);
  r.expressed_next.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double peers = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) peers += params.W(i, j) * xe_prev(j);
    }
    r.private_next(i) = params.W(i, i) * x_prev(i) + peers;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double peers = params.A.row(i).dot(xe_prev);
    r.expressed_next(i) = params.phi(i) * r.private_next(i) + (1.0 - params.phi(i)) * peers;
  }
  return r;
}

}  // namespace

StepResult epo_step(const EpoParameters& params, const Vector& x_prev, const Vector& xe_prev) {
  const std::size_t n = params.size();
  require_length(x_prev, n, "x_prev");
  require_length(xe_prev, n, "xe_prev");
  params.require_feasible();
  return step_unchecked(params, x_prev, xe_prev);
}

TrajectoryPair epo_simulate(const EpoParameters& params, const Vector& x0, const Vector& xe0,
                            std::size_t steps) {
  if (steps < 1) throw ValidationError("epo_simulate requires steps >= 1");
  const std::size_t n = params.size();
  require_length(x0, n, "x0");
  require_length(xe0, n, "xe0");
  params.require_feasible();

  TrajectoryPair out;
  out.private_opinions.resize(n, steps + 1);
  out.expressed.resize(n, steps + 1);
  out.private_opinions.col(0) = x0;
  out.expressed.col(0) = xe0;
  for (std::size_t k = 0; k < steps; ++k) {
    auto next = step_unchecked(params, out.private_opinions.col(k), out.expressed.col(k));
    out.private_opinions.col(k + 1) = next.private_next;
    out.expressed.col(k + 1) = next.expressed_next;
  }
  return out;
}

namespace {

nlohmann::json matrix_json(const Matrix& M) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json vector_json(const Vector& v) {
  auto out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Matrix matrix_from(const nlohmann::json& doc, const char* key, std::size_t n) {
  if (!doc.contains(key) || !doc[key].is_array()) {
    throw InputError(std::string("parameters document lacks array '") + key + "'");
  }
  const auto& rows = doc[key];
  if (rows.size() != n) throw DimensionError(std::string(key) + " rows", n, rows.size());
  Matrix M(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!rows[i].is_array() || rows[i].size() != n) {
      throw DimensionError(std::string(key) + " row " + std::to_string(i), n,
                           rows[i].is_array() ? rows[i].size() : 0);
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (!rows[i][j].is_number()) throw InputError(std::string(key) + " entry is not a number");
      M(i, j) = rows[i][j].get<double>();
    }
  }
  return M;
}

Vector vector_from(const nlohmann::json& doc, const char* key, std::size_t n) {
  if (!doc.contains(key) || !doc[key].is_array()) {
    throw InputError(std::string("parameters document lacks array '") + key + "'");
  }
  const auto& arr = doc[key];
  if (arr.size() != n) throw DimensionError(key, n, arr.size());
  Vector v(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!arr[i].is_number()) throw InputError(std::string(key) + " entry is not a number");
    v(i) = arr[i].get<double>();
  }
  return v;
}

}  // namespace

nlohmann::json to_json(const EpoParameters& params) {
  nlohmann::json doc;
  doc["developers"] = params.developers;
  doc["W"] = matrix_json(params.W);
  doc["A"] = matrix_json(params.A);
  doc["phi"] = vector_json(params.phi);
  doc["d"] = vector_json(params.d);
  return doc;
}

EpoParameters params_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw InputError("parameters document must be a JSON object");
  if (!doc.contains("developers") || !doc["developers"].is_array()) {
    throw InputError("parameters document lacks array 'developers'");
  }
  EpoParameters p;
  for (const auto& dev : doc["developers"]) {
    if (!dev.is_string()) throw InputError("developer identifiers must be strings");
    p.developers.push_back(dev.get<std::string>());
  }
  const std::size_t n = p.developers.size();
  if (n < 2) throw ValidationError("parameters need at least two developers");
  p.W = matrix_from(doc, "W", n);
  p.A = matrix_from(doc, "A", n);
  p.phi = vector_from(doc, "phi", n);
  p.d = vector_from(doc, "d", n);
  p.require_feasible();
  return p;
}

}  // namespace epodyn
