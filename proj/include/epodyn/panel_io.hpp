#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "epodyn/types.hpp"

namespace epodyn {

/// Shortest text that round-trips the double exactly.
std::string format_double(double v);

/// Wide CSV: header `developer,<period>...`, one row per developer.
/// `comments` become leading `# ` lines; the reader skips them.
void write_panel_csv(std::ostream& out, const OpinionPanel& panel,
                     const std::vector<std::string>& comments = {});
OpinionPanel read_panel_csv(std::istream& in);

}  // namespace epodyn
