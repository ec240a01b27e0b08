#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace epodyn {

inline constexpr const char* kToolName = "epodyn";
inline constexpr const char* kToolVersion = "0.1.0";

/// Exit statuses of the command-line front-end.
enum ExitCode : int {
  kExitOk = 0,
  kExitMalformedInput = 2,
  kExitValidation = 3,
  kExitNumerical = 4,
};

/// Settings shared by every subcommand. Loaded from `--config` (JSON, same
/// key names) and overridden by explicit flags.
struct RunConfig {
  std::string input;
  std::string params;
  std::string out = ".";
  std::string repo = "repo";
  /// 1-based inclusive fit window; 0 selects the default.
  std::size_t fit_first = 0;
  std::size_t fit_last = 0;
  std::size_t horizon = 2;
  std::size_t pca_dim = 1;
  std::size_t k = 5;
  bool k_explicit = false;
  std::size_t multistarts = 16;
  std::size_t max_iterations = 10000;
  double step_tolerance = 1e-8;
  std::uint64_t seed = 0;
  double threshold = 0.01;
  std::string source = "W";
  bool strict = false;
  std::string impute = "none";
  std::vector<std::size_t> window_lengths;

  /// Settings that determine artifact contents; paths are excluded so the
  /// same run reproduces the same digest from any directory.
  nlohmann::json digest_document() const;
  std::string digest() const;
};

/// Runs one subcommand. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// SHA-256 of `bytes` as lowercase hex.
std::string sha256_hex(const std::string& bytes);

}  // namespace epodyn
