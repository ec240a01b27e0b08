#include "epodyn/embed.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <set>

namespace epodyn {

namespace {

// Neumaier summation keeps cell means independent of record order to within
// the last ulp or so.
Vector compensated_mean(std::span<const Vector> vectors) {
  const Eigen::Index q = vectors.front().size();
  Vector sum = Vector::Zero(q);
  Vector carry = Vector::Zero(q);
  for (const auto& v : vectors) {
    if (v.size() != q) throw DimensionError("opinion vector", q, v.size());
    for (Eigen::Index k = 0; k < q; ++k) {
      const double t = sum(k) + v(k);
      if (std::abs(sum(k)) >= std::abs(v(k))) {
        carry(k) += (sum(k) - t) + v(k);
      } else {
        carry(k) += (v(k) - t) + sum(k);
      }
      sum(k) = t;
    }
  }
  return (sum + carry) / static_cast<double>(vectors.size());
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

int to_int(std::string_view s) {
  int v = 0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

std::size_t index_of(const std::vector<std::string>& labels, const std::string& key) {
  const auto it = std::find(labels.begin(), labels.end(), key);
  return it == labels.end() ? labels.size() : static_cast<std::size_t>(it - labels.begin());
}

std::string cell_name(const std::string& developer, const std::string& period) {
  return "(" + developer + ", " + period + ")";
}

}  // namespace

bool OpinionVectorPanel::any_imputed() const {
  return std::find(imputed.begin(), imputed.end(), true) != imputed.end();
}

Matrix OpinionVectorPanel::stacked() const {
  Matrix out(cells.size(), dim);
  for (std::size_t r = 0; r < cells.size(); ++r) out.row(r) = cells[r].transpose();
  return out;
}

Vector diff_opinion(const EmbeddingRecord& record) {
  if (record.sigma_old.size() != record.sigma_new.size()) {
    throw ValidationError("embedding dimension mismatch for pr_id '" + record.pr_id +
                          "', file '" + record.file_path + "': sigma_old has " +
                          std::to_string(record.sigma_old.size()) + " entries, sigma_new has " +
                          std::to_string(record.sigma_new.size()));
  }
  return record.sigma_new - record.sigma_old;
}

Vector pr_opinion(std::span<const Vector> diffs) {
  if (diffs.empty()) throw ValidationError("PR has no file diffs");
  return compensated_mean(diffs);
}

Vector developer_opinion(std::span<const Vector> pr_opinions) {
  if (pr_opinions.empty()) throw ValidationError("developer has no PRs in period");
  return compensated_mean(pr_opinions);
}

std::string period_label(const std::string& text) {
  const std::string_view s(text);
  if (s.size() == 7 && s[4] == '-' && all_digits(s.substr(0, 4)) && all_digits(s.substr(5, 2))) {
    const int month = to_int(s.substr(5, 2));
    if (month >= 1 && month <= 12) return text;
  }
  // YYYY-MM-DD[THH:MM[:SS[.fff]]][Z|+HH:MM|-HH:MM]
  if (s.size() < 10 || s[4] != '-' || s[7] != '-' || !all_digits(s.substr(0, 4)) ||
      !all_digits(s.substr(5, 2)) || !all_digits(s.substr(8, 2))) {
    throw InputError("period '" + text + "' is neither YYYY-MM nor an ISO-8601 timestamp");
  }
  using namespace std::chrono;
  const year_month_day date{year{to_int(s.substr(0, 4))},
                            month{static_cast<unsigned>(to_int(s.substr(5, 2)))},
                            day{static_cast<unsigned>(to_int(s.substr(8, 2)))}};
  if (!date.ok()) throw InputError("period '" + text + "' is not a valid calendar date");

  int minutes = 0;
  int offset = 0;
  if (s.size() > 10) {
    if ((s[10] != 'T' && s[10] != ' ') || s.size() < 16 || s[13] != ':' ||
        !all_digits(s.substr(11, 2)) || !all_digits(s.substr(14, 2))) {
      throw InputError("period '" + text + "' has a malformed time of day");
    }
    minutes = to_int(s.substr(11, 2)) * 60 + to_int(s.substr(14, 2));
    const auto zone = s.find_first_of("Z+-", 16);
    if (zone != std::string_view::npos && s[zone] != 'Z') {
      const auto tz = s.substr(zone + 1);
      if (tz.size() != 5 || tz[2] != ':' || !all_digits(tz.substr(0, 2)) ||
          !all_digits(tz.substr(3, 2))) {
        throw InputError("period '" + text + "' has a malformed UTC offset");
      }
      offset = (to_int(tz.substr(0, 2)) * 60 + to_int(tz.substr(3, 2))) * (s[zone] == '-' ? -1 : 1);
    }
  }
  const auto utc = sys_days{date} + std::chrono::minutes{minutes - offset};
  const year_month_day utc_date{floor<days>(utc)};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u", static_cast<int>(utc_date.year()),
                static_cast<unsigned>(utc_date.month()));
  return buf;
}

OpinionVectorPanel build_vector_panel(std::span<const EmbeddingRecord> records,
                                      const std::vector<std::string>& developers,
                                      const std::vector<std::string>& periods,
                                      const AggregateOptions& options) {
  if (developers.empty()) throw ValidationError("developer list is empty");
  if (periods.empty()) throw ValidationError("period list is empty");

  OpinionVectorPanel panel;
  panel.developers = developers;
  panel.periods = periods;
  const std::size_t n = developers.size();
  const std::size_t T = periods.size();

  // cell -> pr_id -> file diffs; std::map keeps PR order independent of input order.
  std::vector<std::map<std::string, std::vector<Vector>>> grouped(n * T);
  bool have_dim = false;
  for (const auto& record : records) {
    Vector diff = diff_opinion(record);
    if (!diff.allFinite()) {
      throw ValidationError("non-finite embedding for pr_id '" + record.pr_id + "', file '" +
                            record.file_path + "'");
    }
    if (!have_dim) {
      panel.dim = static_cast<std::size_t>(diff.size());
      have_dim = true;
    } else if (static_cast<std::size_t>(diff.size()) != panel.dim) {
      throw DimensionError("embedding dimension q (pr_id '" + record.pr_id + "', file '" +
                               record.file_path + "')",
                           panel.dim, static_cast<std::size_t>(diff.size()));
    }
    const std::size_t i = index_of(developers, record.developer);
    const std::size_t t = index_of(periods, period_label(record.period));
    if (i == n || t == T) {
      if (options.strict) {
        throw ValidationError(std::string("record for ") +
                              (i == n ? "unknown developer '" + record.developer + "'"
                                      : "unknown period '" + record.period + "'") +
                              " (pr_id '" + record.pr_id + "')");
      }
      ++panel.skipped_records;
      continue;
    }
    grouped[i * T + t][record.pr_id].push_back(std::move(diff));
  }
  if (!have_dim) throw ValidationError("no embedding records to aggregate");

  panel.cells.assign(n * T, Vector());
  panel.imputed.assign(n * T, false);
  std::vector<std::string> empty_cells;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < T; ++t) {
      const auto& prs = grouped[i * T + t];
      if (prs.empty()) {
        if (options.impute == ImputeMode::CarryForward && t > 0 &&
            panel.cells[i * T + t - 1].size() > 0) {
          panel.cells[i * T + t] = panel.cells[i * T + t - 1];
          panel.imputed[i * T + t] = true;
        } else {
          empty_cells.push_back(cell_name(developers[i], periods[t]));
        }
        continue;
      }
      std::vector<Vector> pr_vectors;
      pr_vectors.reserve(prs.size());
      for (const auto& [pr_id, diffs] : prs) pr_vectors.push_back(pr_opinion(diffs));
      panel.cells[i * T + t] = developer_opinion(pr_vectors);
    }
  }
  if (!empty_cells.empty()) {
    std::string msg = "panel incomplete: " + std::to_string(empty_cells.size()) +
                      " (developer, period) cells have no PRs:";
    for (const auto& c : empty_cells) msg += " " + c;
    throw ValidationError(msg);
  }
  return panel;
}

namespace {

Vector json_vector(const nlohmann::json& arr, const char* key, std::size_t line) {
  if (!arr.is_array()) throw InputError(std::string("'") + key + "' must be an array", line);
  Vector v(arr.size());
  for (std::size_t k = 0; k < arr.size(); ++k) {
    if (!arr[k].is_number()) {
      throw InputError(std::string("'") + key + "' entry " + std::to_string(k) +
                           " is not a number",
                       line);
    }
    v(k) = arr[k].get<double>();
  }
  return v;
}

std::string json_label(const nlohmann::json& doc, const char* key, std::size_t line) {
  if (!doc.contains(key)) throw InputError(std::string("missing key '") + key + "'", line);
  const auto& v = doc[key];
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw InputError(std::string("'") + key + "' must be a string", line);
}

}  // namespace

std::vector<EmbeddingRecord> read_embedding_jsonl(std::istream& in) {
  std::vector<EmbeddingRecord> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError(std::string("invalid JSON: ") + e.what(), number);
    }
    if (!doc.is_object()) throw InputError("record must be a JSON object", number);
    EmbeddingRecord r;
    r.developer = json_label(doc, "developer", number);
    r.period = json_label(doc, "period", number);
    r.pr_id = json_label(doc, "pr_id", number);
    r.file_path = json_label(doc, "file_path", number);
    if (!doc.contains("sigma_old") || !doc.contains("sigma_new")) {
      throw InputError("record lacks sigma_old/sigma_new", number);
    }
    r.sigma_old = json_vector(doc["sigma_old"], "sigma_old", number);
    r.sigma_new = json_vector(doc["sigma_new"], "sigma_new", number);
    if (r.sigma_old.size() != r.sigma_new.size()) {
      throw InputError("sigma_old and sigma_new differ in length for pr_id '" + r.pr_id +
                           "', file '" + r.file_path + "'",
                       number);
    }
    try {
      period_label(r.period);
    } catch (const InputError& e) {
      throw InputError(e.what(), number);
    }
    out.push_back(std::move(r));
  }
  return out;
}

nlohmann::json to_json(const EmbeddingRecord& record) {
  auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return {{"developer", record.developer}, {"period", record.period},
          {"pr_id", record.pr_id},         {"file_path", record.file_path},
          {"sigma_old", vec(record.sigma_old)}, {"sigma_new", vec(record.sigma_new)}};
}

std::vector<std::string> developers_of(std::span<const EmbeddingRecord> records) {
  std::set<std::string> s;
  for (const auto& r : records) s.insert(r.developer);
  return {s.begin(), s.end()};
}

std::vector<std::string> periods_of(std::span<const EmbeddingRecord> records) {
  std::set<std::string> s;
  for (const auto& r : records) s.insert(period_label(r.period));
  return {s.begin(), s.end()};
}

nlohmann::json to_json(const OpinionVectorPanel& panel) {
  nlohmann::json doc;
  doc["developers"] = panel.developers;
  doc["periods"] = panel.periods;
  doc["q"] = panel.dim;
  doc["skipped_records"] = panel.skipped_records;
  auto vectors = nlohmann::json::array();
  auto imputed = nlohmann::json::array();
  const std::size_t T = panel.periods.size();
  for (std::size_t i = 0; i < panel.developers.size(); ++i) {
    auto row = nlohmann::json::array();
    auto flags = nlohmann::json::array();
    for (std::size_t t = 0; t < T; ++t) {
      const Vector& v = panel.at(i, t);
      row.push_back(std::vector<double>(v.data(), v.data() + v.size()));
      flags.push_back(static_cast<bool>(panel.is_imputed(i, t)));
    }
    vectors.push_back(std::move(row));
    imputed.push_back(std::move(flags));
  }
  doc["vectors"] = std::move(vectors);
  doc["imputed"] = std::move(imputed);
  return doc;
}

OpinionVectorPanel vector_panel_from_json(const nlohmann::json& doc) {
  OpinionVectorPanel panel;
  try {
    panel.developers = doc.at("developers").get<std::vector<std::string>>();
    panel.periods = doc.at("periods").get<std::vector<std::string>>();
    panel.dim = doc.at("q").get<std::size_t>();
    panel.skipped_records = doc.value("skipped_records", std::size_t{0});
    const auto& vectors = doc.at("vectors");
    const std::size_t n = panel.developers.size();
    const std::size_t T = panel.periods.size();
    if (vectors.size() != n) throw DimensionError("vector panel rows", n, vectors.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (vectors[i].size() != T) throw DimensionError("vector panel columns", T, vectors[i].size());
      for (std::size_t t = 0; t < T; ++t) {
        const auto v = vectors[i][t].get<std::vector<double>>();
        if (v.size() != panel.dim) throw DimensionError("vector panel cell dimension", panel.dim, v.size());
        panel.cells.emplace_back(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
        bool flag = false;
        if (doc.contains("imputed")) flag = doc["imputed"].at(i).at(t).get<bool>();
        panel.imputed.push_back(flag);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed vector panel document: ") + e.what());
  }
  return panel;
}

}  // namespace epodyn
