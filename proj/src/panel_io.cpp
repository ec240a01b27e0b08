#include "epodyn/panel_io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace epodyn {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) {
    if (!field.empty() && field.back() == '\r') field.pop_back();
    out.push_back(field);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void write_panel_csv(std::ostream& out, const OpinionPanel& panel,
                     const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << "\n";
  out << "developer";
  for (const auto& p : panel.periods) out << "," << p;
  out << "\n";
  for (std::size_t i = 0; i < panel.developers.size(); ++i) {
    out << panel.developers[i];
    for (std::size_t t = 0; t < panel.periods.size(); ++t) {
      out << "," << format_double(panel.values(static_cast<Eigen::Index>(i),
                                               static_cast<Eigen::Index>(t)));
    }
    out << "\n";
  }
}

OpinionPanel read_panel_csv(std::istream& in) {
  OpinionPanel panel;
  std::string line;
  std::size_t number = 0;
  bool have_header = false;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty() || line[0] == '#' || line == "\r") continue;
    const auto fields = split_csv(line);
    if (!have_header) {
      if (fields.size() < 2 || fields[0] != "developer") {
        throw InputError("panel CSV header must start with 'developer' and list periods", number);
      }
      panel.periods.assign(fields.begin() + 1, fields.end());
      have_header = true;
      continue;
    }
    if (fields.size() != panel.periods.size() + 1) {
      throw InputError("panel CSV row has " + std::to_string(fields.size()) + " fields, expected " +
                           std::to_string(panel.periods.size() + 1),
                       number);
    }
    panel.developers.push_back(fields[0]);
    std::vector<double> values;
    for (std::size_t k = 1; k < fields.size(); ++k) {
      double v = 0.0;
      const auto& f = fields[k];
      const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
        throw InputError("panel CSV value '" + f + "' is not a number", number);
      }
      values.push_back(v);
    }
    rows.push_back(std::move(values));
  }
  if (!have_header) throw InputError("panel CSV is empty");
  panel.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(panel.periods.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t t = 0; t < rows[i].size(); ++t) {
      panel.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = rows[i][t];
    }
  }
  return panel;
}

}  // namespace epodyn
