#include "epodyn/dimreduce.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace epodyn {

namespace {

void require_columns(const Matrix& data, std::size_t q) {
  if (static_cast<std::size_t>(data.cols()) != q) {
    throw DimensionError("data columns (embedding dimension)", q,
                         static_cast<std::size_t>(data.cols()));
  }
}

void fix_sign(Eigen::Ref<Vector> axis) {
  Eigen::Index arg = 0;
  axis.cwiseAbs().maxCoeff(&arg);
  if (axis(arg) < 0.0) axis = -axis;
}

Matrix pairwise_distances(const Matrix& points) {
  const Eigen::Index m = points.rows();
  Matrix dist = Matrix::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const double d = (points.row(i) - points.row(j)).norm();
      dist(i, j) = d;
      dist(j, i) = d;
    }
  }
  return dist;
}

// neighbours[i] lists every j != i by increasing distance, ties by index;
// ranks(i, j) is j's 1-based position in that list.
struct Neighbourhoods {
  std::vector<std::vector<Eigen::Index>> order;
  Eigen::MatrixXi ranks;
};

Neighbourhoods neighbourhoods(const Matrix& dist) {
  const Eigen::Index m = dist.rows();
  Neighbourhoods nb;
  nb.order.resize(m);
  nb.ranks = Eigen::MatrixXi::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    auto& order = nb.order[i];
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j != i) order.push_back(j);
    }
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return dist(i, a) < dist(i, b) || (dist(i, a) == dist(i, b) && a < b);
    });
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      nb.ranks(i, order[pos]) = static_cast<int>(pos + 1);
    }
  }
  return nb;
}

// Penalty of neighbours gained in `shown` that were not neighbours in `truth`,
// weighted by their rank in `truth`.
double intrusion_sum(const Neighbourhoods& shown, const Neighbourhoods& truth, std::size_t k) {
  double total = 0.0;
  for (std::size_t i = 0; i < shown.order.size(); ++i) {
    for (std::size_t pos = 0; pos < k; ++pos) {
      const Eigen::Index j = shown.order[i][pos];
      const int r = truth.ranks(static_cast<Eigen::Index>(i), j);
      if (r > static_cast<int>(k)) total += r - static_cast<double>(k);
    }
  }
  return total;
}

double relative_rank_error(const Neighbourhoods& base, const Neighbourhoods& other,
                           std::size_t k) {
  double total = 0.0;
  for (std::size_t i = 0; i < base.order.size(); ++i) {
    for (std::size_t pos = 0; pos < k; ++pos) {
      const Eigen::Index j = base.order[i][pos];
      const double rb = base.ranks(static_cast<Eigen::Index>(i), j);
      const double ro = other.ranks(static_cast<Eigen::Index>(i), j);
      total += std::abs(ro - rb) / rb;
    }
  }
  return total;
}

std::vector<double> average_ranks(const std::vector<double>& values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t start = 0;
  while (start < idx.size()) {
    std::size_t end = start + 1;
    while (end < idx.size() && values[idx[end]] == values[idx[start]]) ++end;
    const double avg = 0.5 * static_cast<double>(start + end + 1);
    for (std::size_t p = start; p < end; ++p) ranks[idx[p]] = avg;
    start = end;
  }
  return ranks;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  if (ra == rb) return 1.0;
  const double n = static_cast<double>(ra.size());
  const double mean = (n + 1.0) / 2.0;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    cov += (ra[i] - mean) * (rb[i] - mean);
    va += (ra[i] - mean) * (ra[i] - mean);
    vb += (rb[i] - mean) * (rb[i] - mean);
  }
  if (va == 0.0 || vb == 0.0) return 0.0;
  return std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
}

}  // namespace

PcaModel pca_fit(const Matrix& data, std::size_t r) {
  const auto m = static_cast<std::size_t>(data.rows());
  const auto q = static_cast<std::size_t>(data.cols());
  if (m < 2) throw ValidationError("pca_fit needs at least 2 rows, got " + std::to_string(m));
  if (r < 1 || r > std::min(m, q)) {
    throw ValidationError("pca_fit: retained dimension " + std::to_string(r) +
                          " must lie in [1, min(m, q) = " + std::to_string(std::min(m, q)) + "]");
  }
  if (!data.allFinite()) throw ValidationError("pca_fit: data contains non-finite entries");

  PcaModel model;
  model.mean = data.colwise().mean().transpose();
  const Matrix centered = data.rowwise() - model.mean.transpose();
  const Matrix cov = (centered.transpose() * centered) / static_cast<double>(m - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericalError("covariance eigendecomposition failed");

  // Eigen sorts ascending.
  const Vector values = eig.eigenvalues().reverse().cwiseMax(0.0);
  const Matrix vectors = eig.eigenvectors().rowwise().reverse();
  const double total = values.sum();
  const double cutoff = values.size() ? values(0) * static_cast<double>(q) * 1e-14 : 0.0;
  model.rank = static_cast<std::size_t>((values.array() > cutoff).count());
  if (total == 0.0) model.rank = 0;
  model.rank_deficient = r > model.rank;

  model.components.resize(r, q);
  model.explained_variance.resize(r);
  model.explained_variance_ratio.resize(r);
  for (std::size_t c = 0; c < r; ++c) {
    Vector axis = vectors.col(c);
    fix_sign(axis);
    model.components.row(c) = axis.transpose();
    const bool beyond_rank = c >= model.rank;
    model.explained_variance(c) = beyond_rank ? 0.0 : values(c);
    model.explained_variance_ratio(c) = beyond_rank ? 0.0 : values(c) / total;
  }

  const Matrix scores = centered * model.components.transpose();
  model.lo = scores.colwise().minCoeff().transpose();
  model.hi = scores.colwise().maxCoeff().transpose();
  model.degenerate.resize(r);
  for (std::size_t c = 0; c < r; ++c) {
    model.degenerate[c] = c >= model.rank || !(model.hi(c) > model.lo(c));
  }
  return model;
}

Matrix pca_project(const PcaModel& model, const Matrix& data) {
  require_columns(data, model.dim());
  return (data.rowwise() - model.mean.transpose()) * model.components.transpose();
}

NormalizedProjection pca_transform_normalized(const PcaModel& model, const Matrix& data) {
  const Matrix scores = pca_project(model, data);
  NormalizedProjection out;
  out.values.resize(scores.rows(), scores.cols());
  for (Eigen::Index c = 0; c < scores.cols(); ++c) {
    const double lo = model.lo(c);
    const double span = model.hi(c) - lo;
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
      if (model.degenerate[c]) {
        out.values(i, c) = 0.5;
        continue;
      }
      const double v = (scores(i, c) - lo) / span;
      if (v < 0.0 || v > 1.0) ++out.clamped;
      out.values(i, c) = std::clamp(v, 0.0, 1.0);
    }
  }
  return out;
}

Vector explained_variance_spectrum(const Matrix& data) {
  if (data.rows() < 2) throw ValidationError("scree analysis needs at least 2 rows");
  const Matrix centered = data.rowwise() - data.colwise().mean();
  const Matrix cov = (centered.transpose() * centered) / static_cast<double>(data.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov, Eigen::EigenvaluesOnly);
  const Vector values = eig.eigenvalues().reverse().cwiseMax(0.0);
  const double total = values.sum();
  return total > 0.0 ? Vector(values / total) : Vector(Vector::Zero(values.size()));
}

std::size_t clamp_neighborhood(std::size_t requested, std::size_t m) {
  const std::size_t limit = m >= 2 ? std::min(m - 2, (2 * m - 2) / 3) : 0;
  if (limit < 1) {
    throw ValidationError("quality metrics need more points: m = " + std::to_string(m) +
                          " admits no neighbourhood size with 2m - 3k - 1 > 0");
  }
  return std::clamp<std::size_t>(requested, 1, limit);
}

QualityReport quality_report(const Matrix& high, const Matrix& low, std::size_t k) {
  const auto m = static_cast<std::size_t>(high.rows());
  if (static_cast<std::size_t>(low.rows()) != m) {
    throw DimensionError("low-dimensional rows", m, static_cast<std::size_t>(low.rows()));
  }
  if (k < 1) throw ValidationError("neighbourhood size k must be >= 1");
  const long long normalizer = 2LL * static_cast<long long>(m) - 3LL * static_cast<long long>(k) - 1;
  if (m <= k + 1 || normalizer <= 0) {
    throw ValidationError("neighbourhood size k = " + std::to_string(k) + " too large for m = " +
                          std::to_string(m) +
                          " points: need m >= k + 2 and normalizer 2m - 3k - 1 > 0");
  }
  if (!high.allFinite() || !low.allFinite()) {
    throw ValidationError("quality_report inputs contain non-finite entries");
  }

  const Matrix dh = pairwise_distances(high);
  const Matrix dl = pairwise_distances(low);
  const Neighbourhoods nh = neighbourhoods(dh);
  const Neighbourhoods nl = neighbourhoods(dl);

  QualityReport rep;
  rep.k = k;
  const double md = static_cast<double>(m), kd = static_cast<double>(k);
  const double scale = 2.0 / (md * kd * static_cast<double>(normalizer));
  rep.trustworthiness = 1.0 - scale * intrusion_sum(nl, nh, k);
  rep.continuity = 1.0 - scale * intrusion_sum(nh, nl, k);

  double z = 0.0;
  for (std::size_t l = 1; l <= k; ++l) {
    z += std::abs(md - 2.0 * static_cast<double>(l) + 1.0) / static_cast<double>(l);
  }
  z *= md;
  const double mrre_low = relative_rank_error(nl, nh, k) / z;
  const double mrre_high = relative_rank_error(nh, nl, k) / z;
  rep.mrre = 0.5 * (mrre_low + mrre_high);

  std::vector<double> flat_high, flat_low;
  flat_high.reserve(m * (m - 1) / 2);
  flat_low.reserve(m * (m - 1) / 2);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      flat_high.push_back(dh(i, j));
      flat_low.push_back(dl(i, j));
    }
  }
  rep.spearman_global = spearman(flat_high, flat_low);
  return rep;
}

namespace {

std::vector<double> as_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

nlohmann::json to_json(const PcaModel& model) {
  nlohmann::json doc;
  doc["mean"] = as_std(model.mean);
  auto rows = nlohmann::json::array();
  for (Eigen::Index c = 0; c < model.components.rows(); ++c) {
    rows.push_back(as_std(model.components.row(c).transpose()));
  }
  doc["components"] = std::move(rows);
  doc["explained_variance"] = as_std(model.explained_variance);
  doc["explained_variance_ratio"] = as_std(model.explained_variance_ratio);
  doc["lo"] = as_std(model.lo);
  doc["hi"] = as_std(model.hi);
  doc["degenerate"] = model.degenerate;
  doc["rank"] = model.rank;
  doc["rank_deficient"] = model.rank_deficient;
  return doc;
}

PcaModel pca_model_from_json(const nlohmann::json& doc) {
  auto vec = [](const nlohmann::json& j) {
    const auto v = j.get<std::vector<double>>();
    return Vector(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  PcaModel model;
  try {
    model.mean = vec(doc.at("mean"));
    const auto& rows = doc.at("components");
    model.components.resize(rows.size(), model.mean.size());
    for (std::size_t c = 0; c < rows.size(); ++c) {
      const Vector row = vec(rows[c]);
      if (row.size() != model.mean.size()) {
        throw DimensionError("PCA component length", model.mean.size(), row.size());
      }
      model.components.row(c) = row.transpose();
    }
    model.explained_variance = vec(doc.at("explained_variance"));
    model.explained_variance_ratio = vec(doc.at("explained_variance_ratio"));
    model.lo = vec(doc.at("lo"));
    model.hi = vec(doc.at("hi"));
    model.degenerate = doc.at("degenerate").get<std::vector<bool>>();
    model.rank = doc.at("rank").get<std::size_t>();
    model.rank_deficient = doc.at("rank_deficient").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed PCA model document: ") + e.what());
  }
  const auto r = model.components.rows();
  if (model.lo.size() != r || model.hi.size() != r ||
      static_cast<Eigen::Index>(model.degenerate.size()) != r) {
    throw DimensionError("PCA bounds", static_cast<std::size_t>(r),
                         static_cast<std::size_t>(model.lo.size()));
  }
  return model;
}

nlohmann::json to_json(const QualityReport& report) {
  return {{"k", report.k},
          {"trustworthiness", report.trustworthiness},
          {"continuity", report.continuity},
          {"mrre", report.mrre},
          {"spearman_global", report.spearman_global}};
}

}  // namespace epodyn
