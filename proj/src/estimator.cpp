#include "epodyn/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "epodyn/random.hpp"

namespace epodyn {

void FitOptions::validate() const {
  if (multistart_count < 1) throw ValidationError("multistart_count must be >= 1");
  if (max_iterations < 1) throw ValidationError("max_iterations must be >= 1");
  if (!(step_tolerance > 0.0)) throw ValidationError("step_tolerance must be > 0");
  if (!(feasibility_tolerance > 0.0)) throw ValidationError("feasibility_tolerance must be > 0");
}

namespace {

void check_range(PeriodRange range, std::size_t periods) {
  if (range.last >= periods || range.first > range.last) {
    throw ValidationError("fit_range [" + std::to_string(range.first + 1) + ", " +
                          std::to_string(range.last + 1) + "] lies outside the panel's " +
                          std::to_string(periods) + " periods");
  }
  if (range.length() < 3) {
    throw ValidationError("fit_range length " + std::to_string(range.length()) +
                          " is below the minimum of 3 periods (2 transitions)");
  }
}

void check_series(const EpoParameters& params, const Matrix& x, const Matrix& xe,
                  PeriodRange range) {
  const auto n = static_cast<Eigen::Index>(params.size());
  if (x.rows() != n) throw DimensionError("private series rows", n, x.rows());
  if (xe.rows() != n) throw DimensionError("expressed series rows", n, xe.rows());
  if (xe.cols() != x.cols()) throw DimensionError("expressed series columns", x.cols(), xe.cols());
  check_range(range, static_cast<std::size_t>(x.cols()));
}

// Objective contribution of one agent's row; the rows decouple because every
// free variable (d_i, phi_i, a_i.) appears only in agent i's residuals.
class RowProblem {
 public:
  RowProblem(const Matrix& x, const Matrix& xe, PeriodRange range, Eigen::Index agent)
      : n_(x.rows()), agent_(agent) {
    const auto steps = static_cast<Eigen::Index>(range.transitions());
    const auto t0 = static_cast<Eigen::Index>(range.first);
    own_now_.resize(steps);
    own_next_.resize(steps);
    exp_next_.resize(steps);
    peers_.resize(steps, n_ - 1);
    for (Eigen::Index t = 0; t < steps; ++t) {
      own_now_(t) = x(agent, t0 + t);
      own_next_(t) = x(agent, t0 + t + 1);
      exp_next_(t) = xe(agent, t0 + t + 1);
      for (Eigen::Index j = 0, k = 0; j < n_; ++j) {
        if (j != agent) peers_(t, k++) = xe(j, t0 + t);
      }
    }
  }

  // z = [d, phi, a (n-1 off-diagonal entries)]
  Eigen::Index dim() const { return n_ + 1; }

  double value(const Vector& z) const {
    const double d = z(0), phi = z(1);
    const Vector s = peers_ * z.tail(n_ - 1);
    const Vector r1 = own_next_ - d * own_now_ - (1.0 - d) * s;
    const Vector r2 = exp_next_ - phi * own_next_ - (1.0 - phi) * s;
    return r1.squaredNorm() + r2.squaredNorm();
  }

  Vector gradient(const Vector& z) const {
    const double d = z(0), phi = z(1);
    const Vector s = peers_ * z.tail(n_ - 1);
    const Vector r1 = own_next_ - d * own_now_ - (1.0 - d) * s;
    const Vector r2 = exp_next_ - phi * own_next_ - (1.0 - phi) * s;
    Vector g(dim());
    g(0) = 2.0 * r1.dot(s - own_now_);
    g(1) = 2.0 * r2.dot(s - own_next_);
    g.tail(n_ - 1) = -2.0 * peers_.transpose() * ((1.0 - d) * r1 + (1.0 - phi) * r2);
    return g;
  }

  Vector project(const Vector& z) const {
    Vector p(dim());
    p(0) = std::clamp(z(0), 0.0, 1.0);
    p(1) = std::clamp(z(1), 0.0, 1.0);
    p.tail(n_ - 1) = project_simplex(z.tail(n_ - 1));
    return p;
  }

  Vector pack(const EpoParameters& params) const {
    Vector z(dim());
    z(0) = params.d(agent_);
    z(1) = params.phi(agent_);
    for (Eigen::Index j = 0, k = 2; j < n_; ++j) {
      if (j != agent_) z(k++) = params.A(agent_, j);
    }
    return z;
  }

  void unpack(const Vector& z, Vector& d, Vector& phi, Matrix& A) const {
    d(agent_) = z(0);
    phi(agent_) = z(1);
    for (Eigen::Index j = 0, k = 2; j < n_; ++j) {
      A(agent_, j) = j == agent_ ? 0.0 : z(k++);
    }
  }

 private:
  Eigen::Index n_;
  Eigen::Index agent_;
  Vector own_now_;
  Vector own_next_;
  Vector exp_next_;
  Matrix peers_;
};

struct RowOutcome {
  Vector z;
  std::size_t iterations = 0;
  bool converged = false;
};

struct StartFailed {};

// Spectral projected gradient: Barzilai-Borwein trial step, projected onto
// the feasible set, then Armijo backtracking along the projected direction.
RowOutcome solve_row(const RowProblem& row, Vector z, const FitOptions& opt) {
  constexpr double kArmijo = 1e-4;
  constexpr double kStepMin = 1e-12;
  constexpr double kStepMax = 1e12;
  constexpr int kMaxBacktracks = 60;

  RowOutcome out;
  z = row.project(z);
  double f = row.value(z);
  if (!std::isfinite(f)) throw StartFailed{};
  Vector g = row.gradient(z);
  double alpha = 1.0;

  for (std::size_t it = 0; it < opt.max_iterations; ++it) {
    out.iterations = it;
    const Vector mapping = row.project(z - g) - z;
    if (mapping.norm() <= opt.step_tolerance) {
      out.converged = true;
      break;
    }
    const Vector dir = row.project(z - alpha * g) - z;
    const double slope = g.dot(dir);
    double lambda = 1.0;
    Vector trial;
    double f_trial = f;
    bool accepted = false;
    for (int b = 0; b < kMaxBacktracks; ++b) {
      trial = z + lambda * dir;
      f_trial = row.value(trial);
      if (!std::isfinite(f_trial)) throw StartFailed{};
      if (f_trial <= f + kArmijo * lambda * slope) {
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) break;  // stalled at round-off level

    // Convex combination of feasible points; re-projection only removes drift.
    trial = row.project(trial);
    f_trial = row.value(trial);
    const Vector g_trial = row.gradient(trial);
    const Vector s = trial - z;
    const double sy = s.dot(g_trial - g);
    alpha = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, kStepMin, kStepMax) : kStepMax;
    z = trial;
    f = f_trial;
    g = g_trial;
    out.iterations = it + 1;
  }
  out.z = std::move(z);
  return out;
}

EpoParameters initial_point(std::size_t n, std::size_t start, std::uint64_t seed) {
  if (start == 0) {
    Matrix A = Matrix::Constant(n, n, 1.0 / static_cast<double>(n - 1));
    return EpoParameters::from_decomposition(Vector::Constant(n, 0.5), std::move(A),
                                             Vector::Constant(n, 0.5));
  }
  Rng rng(seed, start);
  return random_feasible_params(n, rng);
}

}  // namespace

void FitProblem::validate() const {
  options.validate();
  panel.validate(false);
  if (panel.num_developers() < 2) {
    throw ValidationError("fitting requires at least two developers");
  }
  check_range(fit_range, panel.num_periods());
  if (private_series) {
    if (private_series->rows() != panel.values.rows()) {
      throw DimensionError("private series rows", panel.values.rows(), private_series->rows());
    }
    if (private_series->cols() != panel.values.cols()) {
      throw DimensionError("private series columns", panel.values.cols(),
                           private_series->cols());
    }
    if (!private_series->allFinite()) throw ValidationError("private series is not finite");
  }
}

double evaluate_objective(const EpoParameters& params, const Matrix& x, const Matrix& xe,
                          PeriodRange range) {
  params.require_feasible();
  check_series(params, x, xe, range);
  const Eigen::Index n = x.rows();
  const Vector self = params.W.diagonal();
  Matrix peer_trust = params.W;
  peer_trust.diagonal().setZero();
  const Vector keep = Vector::Ones(n) - params.phi;

  double total = 0.0;
  for (std::size_t t = range.first; t < range.last; ++t) {
    const auto c = static_cast<Eigen::Index>(t);
    const Vector r1 = x.col(c + 1) - self.cwiseProduct(x.col(c)) - peer_trust * xe.col(c);
    const Vector r2 = xe.col(c + 1) - params.phi.cwiseProduct(x.col(c + 1)) -
                      keep.cwiseProduct(params.A * xe.col(c));
    total += r1.squaredNorm() + r2.squaredNorm();
  }
  return total;
}

double evaluate_objective(const EpoParameters& params, const OpinionPanel& panel,
                          PeriodRange range) {
  return evaluate_objective(params, panel.values, panel.values, range);
}

ObjectiveGradient objective_gradient(const EpoParameters& params, const Matrix& x,
                                     const Matrix& xe, PeriodRange range) {
  check_series(params, x, xe, range);
  const Eigen::Index n = x.rows();
  ObjectiveGradient g{Vector::Zero(n), Vector::Zero(n), Matrix::Zero(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    RowProblem row(x, xe, range, i);
    const Vector gz = row.gradient(row.pack(params));
    g.d(i) = gz(0);
    g.phi(i) = gz(1);
    for (Eigen::Index j = 0, k = 2; j < n; ++j) {
      if (j != i) g.A(i, j) = gz(k++);
    }
  }
  return g;
}

ObjectiveGradient finite_difference_gradient(const EpoParameters& params, const Matrix& x,
                                             const Matrix& xe, PeriodRange range, double step) {
  check_series(params, x, xe, range);
  const Eigen::Index n = x.rows();
  auto objective_at = [&](const Vector& d, const Vector& phi, const Matrix& A) {
    // Perturbed points may leave the feasible set, so skip validation.
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      RowProblem row(x, xe, range, i);
      Vector z(n + 1);
      z(0) = d(i);
      z(1) = phi(i);
      for (Eigen::Index j = 0, k = 2; j < n; ++j) {
        if (j != i) z(k++) = A(i, j);
      }
      total += row.value(z);
    }
    return total;
  };
  auto central = [&](auto&& perturb) {
    Vector d = params.d, phi = params.phi;
    Matrix A = params.A;
    perturb(d, phi, A, step);
    const double up = objective_at(d, phi, A);
    d = params.d;
    phi = params.phi;
    A = params.A;
    perturb(d, phi, A, -step);
    const double down = objective_at(d, phi, A);
    return (up - down) / (2.0 * step);
  };

  ObjectiveGradient g{Vector::Zero(n), Vector::Zero(n), Matrix::Zero(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    g.d(i) = central([i](Vector& d, Vector&, Matrix&, double h) { d(i) += h; });
    g.phi(i) = central([i](Vector&, Vector& phi, Matrix&, double h) { phi(i) += h; });
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      g.A(i, j) = central([i, j](Vector&, Vector&, Matrix& A, double h) { A(i, j) += h; });
    }
  }
  return g;
}

Vector project_simplex(const Vector& v) {
  const Eigen::Index m = v.size();
  if (m < 1) throw ValidationError("project_simplex requires a non-empty vector");
  if (!v.allFinite()) throw ValidationError("project_simplex input contains non-finite entries");

  std::vector<double> sorted(v.data(), v.data() + m);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) theta = candidate;
  }
  Vector out = (v.array() - theta).max(0.0).matrix();
  return out;
}

FitResult fit(const FitProblem& problem) {
  problem.validate();
  const auto& opt = problem.options;
  const Matrix& xe = problem.panel.values;
  const Matrix& x = problem.private_series ? *problem.private_series : xe;
  const auto n = static_cast<Eigen::Index>(problem.panel.num_developers());

  std::vector<RowProblem> rows;
  rows.reserve(n);
  for (Eigen::Index i = 0; i < n; ++i) rows.emplace_back(x, xe, problem.fit_range, i);

  FitResult best;
  bool have_best = false;
  best.per_start_objectives.reserve(opt.multistart_count);

  for (std::size_t start = 0; start < opt.multistart_count; ++start) {
    const EpoParameters init = initial_point(n, start, opt.seed);
    Vector d = init.d, phi = init.phi;
    Matrix A = Matrix::Zero(n, n);
    std::size_t iterations = 0;
    bool converged = true;
    try {
      for (Eigen::Index i = 0; i < n; ++i) {
        const RowOutcome outcome = solve_row(rows[i], rows[i].pack(init), opt);
        rows[i].unpack(outcome.z, d, phi, A);
        iterations = std::max(iterations, outcome.iterations);
        converged = converged && outcome.converged;
      }
    } catch (const StartFailed&) {
      best.per_start_objectives.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }

    EpoParameters params = EpoParameters::from_decomposition(
        std::move(d), std::move(A), std::move(phi), problem.panel.developers);
    if (!params.violations(opt.feasibility_tolerance).empty()) {
      best.per_start_objectives.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    const double objective = evaluate_objective(params, x, xe, problem.fit_range);
    if (!std::isfinite(objective)) {
      best.per_start_objectives.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    best.per_start_objectives.push_back(objective);
    if (!have_best || objective < best.objective_value - 1e-12) {
      have_best = true;
      best.params = std::move(params);
      best.objective_value = objective;
      best.iterations_used = iterations;
      best.converged = converged;
    }
  }
  if (!have_best) {
    throw NumericalError("all " + std::to_string(opt.multistart_count) +
                         " fit starts failed with non-finite objectives");
  }
  return best;
}

nlohmann::json to_json(const FitResult& result) {
  nlohmann::json doc = to_json(result.params);
  doc["objective"] = result.objective_value;
  doc["converged"] = result.converged;
  doc["iterations"] = result.iterations_used;
  auto starts = nlohmann::json::array();
  for (double v : result.per_start_objectives) {
    if (std::isfinite(v)) {
      starts.push_back(v);
    } else {
      starts.push_back(nullptr);
    }
  }
  doc["per_start_objectives"] = std::move(starts);
  return doc;
}

FitResult fit_result_from_json(const nlohmann::json& doc) {
  FitResult r;
  r.params = params_from_json(doc);
  try {
    r.objective_value = doc.at("objective").get<double>();
    r.converged = doc.at("converged").get<bool>();
    r.iterations_used = doc.at("iterations").get<std::size_t>();
    for (const auto& v : doc.at("per_start_objectives")) {
      r.per_start_objectives.push_back(v.is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                   : v.get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed fit result document: ") + e.what());
  }
  return r;
}

}  // namespace epodyn
