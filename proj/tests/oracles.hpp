#pragma once

// Straight-line reference implementations used only by the tests. None of
// these share code paths with the library.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "epodyn/embed.hpp"
#include "epodyn/types.hpp"

namespace oracle {

using epodyn::Matrix;
using epodyn::Vector;

/// Double sum of the EPO residuals by explicit scalar loops.
inline double objective(const Matrix& W, const Matrix& A, const Vector& phi, const Matrix& x,
                        const Matrix& xe, int first, int last) {
  const int n = static_cast<int>(W.rows());
  double total = 0.0;
  for (int t = first; t < last; ++t) {
    for (int i = 0; i < n; ++i) {
      double pred_private = W(i, i) * x(i, t);
      for (int j = 0; j < n; ++j) {
        if (j != i) pred_private += W(i, j) * xe(j, t);
      }
      const double r1 = x(i, t + 1) - pred_private;
      double peer = 0.0;
      for (int j = 0; j < n; ++j) peer += A(i, j) * xe(j, t);
      const double r2 = xe(i, t + 1) - phi(i) * x(i, t + 1) - (1.0 - phi(i)) * peer;
      total += r1 * r1 + r2 * r2;
    }
  }
  return total;
}

/// Simplex projection by bisection on the threshold.
inline Vector simplex_projection(const Vector& v) {
  double lo = v.minCoeff() - 1.0, hi = v.maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    double s = 0.0;
    for (int i = 0; i < v.size(); ++i) s += std::max(v(i) - mid, 0.0);
    (s > 1.0 ? lo : hi) = mid;
  }
  const double theta = 0.5 * (lo + hi);
  Vector out(v.size());
  for (int i = 0; i < v.size(); ++i) out(i) = std::max(v(i) - theta, 0.0);
  return out;
}

/// Cyclic Jacobi rotations on a symmetric matrix; eigenvalues descending.
inline std::vector<double> jacobi_eigenvalues(Matrix S) {
  const int n = static_cast<int>(S.rows());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += S(p, q) * S(p, q);
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(S(p, q)) < 1e-300) continue;
        const double theta = (S(q, q) - S(p, p)) / (2.0 * S(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (int k = 0; k < n; ++k) {
          const double skp = S(k, p), skq = S(k, q);
          S(k, p) = c * skp - s * skq;
          S(k, q) = s * skp + c * skq;
        }
        for (int k = 0; k < n; ++k) {
          const double spk = S(p, k), sqk = S(q, k);
          S(p, k) = c * spk - s * sqk;
          S(q, k) = s * spk + c * sqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (int i = 0; i < n; ++i) ev[i] = S(i, i);
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

/// Explained-variance ratios from an explicitly accumulated covariance.
inline std::vector<double> pca_ratios(const Matrix& data) {
  const int m = static_cast<int>(data.rows()), q = static_cast<int>(data.cols());
  std::vector<double> mean(q, 0.0);
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < q; ++k) mean[k] += data(i, k) / m;
  Matrix C = Matrix::Zero(q, q);
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b) {
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += (data(i, a) - mean[a]) * (data(i, b) - mean[b]);
      C(a, b) = s / (m - 1);
    }
  auto ev = jacobi_eigenvalues(C);
  double total = 0.0;
  for (double& e : ev) {
    e = std::max(e, 0.0);
    total += e;
  }
  for (double& e : ev) e /= total;
  return ev;
}

struct Quality {
  double trustworthiness, continuity, mrre, spearman;
};

inline double dist(const Matrix& P, int i, int j) {
  double s = 0.0;
  for (int c = 0; c < P.cols(); ++c) s += (P(i, c) - P(j, c)) * (P(i, c) - P(j, c));
  return std::sqrt(s);
}

/// rank(i, j) by counting every point strictly closer to i than j (ties
/// broken by index): O(m^3), no sorting.
inline std::vector<std::vector<int>> rank_matrix(const Matrix& P) {
  const int m = static_cast<int>(P.rows());
  std::vector<std::vector<int>> R(m, std::vector<int>(m, 0));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      const double dij = dist(P, i, j);
      int r = 1;
      for (int l = 0; l < m; ++l) {
        if (l == i || l == j) continue;
        const double dil = dist(P, i, l);
        if (dil < dij || (dil == dij && l < j)) ++r;
      }
      R[i][j] = r;
    }
  return R;
}

inline std::vector<double> avg_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) ++less;
      if (v[j] == v[i]) ++equal;
    }
    r[i] = less + (equal + 1.0) / 2.0;
  }
  return r;
}

inline Quality quality(const Matrix& high, const Matrix& low, int k) {
  const int m = static_cast<int>(high.rows());
  const auto RH = rank_matrix(high), RL = rank_matrix(low);
  double t_pen = 0, c_pen = 0, mrre_l = 0, mrre_h = 0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      const bool in_low = RL[i][j] <= k, in_high = RH[i][j] <= k;
      if (in_low && !in_high) t_pen += RH[i][j] - k;
      if (in_high && !in_low) c_pen += RL[i][j] - k;
      if (in_low) mrre_l += std::abs(RH[i][j] - RL[i][j]) / double(RL[i][j]);
      if (in_high) mrre_h += std::abs(RH[i][j] - RL[i][j]) / double(RH[i][j]);
    }
  const double norm = 2.0 / (double(m) * k * (2.0 * m - 3.0 * k - 1.0));
  double z = 0;
  for (int l = 1; l <= k; ++l) z += std::abs(m - 2.0 * l + 1.0) / l;
  z *= m;
  std::vector<double> dh, dl;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      dh.push_back(dist(high, i, j));
      dl.push_back(dist(low, i, j));
    }
  const auto rh = avg_ranks(dh), rl = avg_ranks(dl);
  double mh = 0, ml = 0;
  for (std::size_t i = 0; i < rh.size(); ++i) {
    mh += rh[i];
    ml += rl[i];
  }
  mh /= rh.size();
  ml /= rl.size();
  double cov = 0, vh = 0, vl = 0;
  for (std::size_t i = 0; i < rh.size(); ++i) {
    cov += (rh[i] - mh) * (rl[i] - ml);
    vh += (rh[i] - mh) * (rh[i] - mh);
    vl += (rl[i] - ml) * (rl[i] - ml);
  }
  return {1.0 - norm * t_pen, 1.0 - norm * c_pen, 0.5 * (mrre_l + mrre_h) / z,
          cov / std::sqrt(vh * vl)};
}

/// Nested-loop aggregation: for each cell, for each PR id, average its
/// files; then average the PRs.
inline std::vector<Vector> vector_panel(const std::vector<epodyn::EmbeddingRecord>& records,
                                        const std::vector<std::string>& devs,
                                        const std::vector<std::string>& periods) {
  std::vector<Vector> cells;
  for (const auto& d : devs) {
    for (const auto& p : periods) {
      std::vector<std::string> prs;
      for (const auto& r : records)
        if (r.developer == d && r.period == p &&
            std::find(prs.begin(), prs.end(), r.pr_id) == prs.end())
          prs.push_back(r.pr_id);
      Vector acc;
      for (const auto& pr : prs) {
        Vector file_sum;
        int files = 0;
        for (const auto& r : records) {
          if (r.developer != d || r.period != p || r.pr_id != pr) continue;
          const Vector diff = r.sigma_new - r.sigma_old;
          file_sum = files == 0 ? diff : Vector(file_sum + diff);
          ++files;
        }
        const Vector pr_mean = file_sum / files;
        acc = acc.size() == 0 ? pr_mean : Vector(acc + pr_mean);
      }
      cells.push_back(acc / static_cast<double>(prs.size()));
    }
  }
  return cells;
}

}  // namespace oracle
