#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "epodyn/types.hpp"

namespace epodyn {

/// One file-level change: embeddings of the old and new snippet.
struct EmbeddingRecord {
  std::string developer;
  std::string period;
  std::string pr_id;
  std::string file_path;
  Vector sigma_old;
  Vector sigma_new;
};

/// Developer x period grid of q-dimensional opinion vectors.
struct OpinionVectorPanel {
  std::vector<std::string> developers;
  std::vector<std::string> periods;
  std::size_t dim = 0;
  /// Row-major: cell (i, t) lives at i * periods.size() + t.
  std::vector<Vector> cells;
  /// Cells filled by carry-forward imputation rather than observed PRs.
  std::vector<bool> imputed;
  std::size_t skipped_records = 0;

  const Vector& at(std::size_t developer, std::size_t period) const {
    return cells[developer * periods.size() + period];
  }
  bool is_imputed(std::size_t developer, std::size_t period) const {
    return imputed[developer * periods.size() + period];
  }
  bool any_imputed() const;

  /// Stacks cells into an [n*T x q] matrix, developer-major.
  Matrix stacked() const;
};

enum class ImputeMode { None, CarryForward };

struct AggregateOptions {
  /// Unknown developers/periods raise instead of being skipped.
  bool strict = false;
  ImputeMode impute = ImputeMode::None;
};

/// sigma_new - sigma_old.
Vector diff_opinion(const EmbeddingRecord& record);

/// Mean of a PR's file diffs.
Vector pr_opinion(std::span<const Vector> diffs);

/// Mean of a developer's PR opinions within one period.
Vector developer_opinion(std::span<const Vector> pr_opinions);

OpinionVectorPanel build_vector_panel(std::span<const EmbeddingRecord> records,
                                      const std::vector<std::string>& developers,
                                      const std::vector<std::string>& periods,
                                      const AggregateOptions& options = {});

/// "YYYY-MM" passes through; an ISO-8601 timestamp is binned to its UTC month.
std::string period_label(const std::string& text);

/// One record per non-blank line. Malformed lines raise InputError carrying
/// the 1-based line number.
std::vector<EmbeddingRecord> read_embedding_jsonl(std::istream& in);
nlohmann::json to_json(const EmbeddingRecord& record);

/// Sorted unique developer and period labels found in `records`.
std::vector<std::string> developers_of(std::span<const EmbeddingRecord> records);
std::vector<std::string> periods_of(std::span<const EmbeddingRecord> records);

nlohmann::json to_json(const OpinionVectorPanel& panel);
OpinionVectorPanel vector_panel_from_json(const nlohmann::json& doc);

}  // namespace epodyn
