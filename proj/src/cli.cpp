#include "epodyn/cli.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include <openssl/evp.h>

#include "CLI11.hpp"

#include "epodyn/dimreduce.hpp"
#include "epodyn/embed.hpp"
#include "epodyn/evalsuite.hpp"
#include "epodyn/netview.hpp"
#include "epodyn/panel_io.hpp"

namespace epodyn {

namespace fs = std::filesystem;

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

nlohmann::json RunConfig::digest_document() const {
  return {{"repo", repo},
          {"fit_first", fit_first},
          {"fit_last", fit_last},
          {"horizon", horizon},
          {"pca_dim", pca_dim},
          {"k", k},
          {"k_explicit", k_explicit},
          {"multistarts", multistarts},
          {"max_iterations", max_iterations},
          {"step_tolerance", step_tolerance},
          {"seed", seed},
          {"threshold", threshold},
          {"source", source},
          {"strict", strict},
          {"impute", impute},
          {"window_lengths", window_lengths}};
}

std::string RunConfig::digest() const { return sha256_hex(digest_document().dump()); }

namespace {

struct FitArtifact {
  FitResult result;
  PeriodRange range;
};

struct UpstreamFlags {
  bool clamped = false;
  bool imputed = false;
};

class Runner {
 public:
  explicit Runner(RunConfig cfg) : cfg_(std::move(cfg)), out_dir_(cfg_.out) {}

  // --- loaders -----------------------------------------------------------

  std::vector<EmbeddingRecord> load_records() const {
    std::ifstream in(require_input(cfg_.input, "--input"));
    return read_embedding_jsonl(in);
  }

  OpinionVectorPanel load_vector_panel() const {
    return vector_panel_from_json(load_json(require_input(cfg_.input, "--input")));
  }

  OpinionPanel load_panel(UpstreamFlags& flags) const {
    const auto path = require_input(cfg_.input, "--input");
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line) && !line.empty() && line[0] == '#') {
      if (line == "# imputed=true") flags.imputed = true;
      if (line.rfind("# clamped=", 0) == 0 && line != "# clamped=0") flags.clamped = true;
    }
    in.clear();
    in.seekg(0);
    OpinionPanel panel = read_panel_csv(in);
    panel.validate();
    return panel;
  }

  FitArtifact load_fit() const {
    const auto doc = load_json(require_input(cfg_.params, "--params"));
    FitArtifact artifact;
    artifact.result = fit_result_from_json(doc);
    try {
      const auto first = doc.at("fit_range").at("first").get<std::size_t>();
      const auto last = doc.at("fit_range").at("last").get<std::size_t>();
      if (first < 1 || last < first) throw InputError("fit_range must satisfy 1 <= first <= last");
      artifact.range = {first - 1, last - 1};
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("fit document lacks a valid fit_range: ") + e.what());
    }
    return artifact;
  }

  // --- steps -------------------------------------------------------------

  OpinionVectorPanel aggregate(const std::vector<EmbeddingRecord>& records) const {
    AggregateOptions opt;
    opt.strict = cfg_.strict;
    if (cfg_.impute == "carry-forward") {
      opt.impute = ImputeMode::CarryForward;
    } else if (cfg_.impute != "none") {
      throw ValidationError("--impute must be 'none' or 'carry-forward'");
    }
    const auto developers = developers_of(records);
    const auto periods = periods_of(records);
    if (developers.empty()) throw ValidationError("no embedding records in input");
    OpinionVectorPanel panel = build_vector_panel(records, developers, periods, opt);

    nlohmann::json doc = to_json(panel);
    auto meta = metadata();
    meta["q"] = panel.dim;
    meta["imputed"] = panel.any_imputed();
    doc["metadata"] = std::move(meta);
    write_json("vector_panel.json", doc);
    return panel;
  }

  OpinionPanel reduce(const OpinionVectorPanel& vectors, UpstreamFlags& flags) const {
    const Matrix stacked = vectors.stacked();
    const PcaModel model = pca_fit(stacked, cfg_.pca_dim);
    const NormalizedProjection projected = pca_transform_normalized(model, stacked);
    flags.clamped = projected.clamped > 0;
    flags.imputed = vectors.any_imputed();

    const std::size_t n = vectors.developers.size();
    const std::size_t T = vectors.periods.size();
    OpinionPanel panel;
    panel.developers = vectors.developers;
    panel.periods = vectors.periods;
    panel.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(T));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t t = 0; t < T; ++t) {
        panel.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) =
            projected.values(static_cast<Eigen::Index>(i * T + t), 0);
      }
    }

    auto comments = csv_metadata();
    comments.push_back("component=1");
    comments.push_back(std::string("imputed=") + (flags.imputed ? "true" : "false"));
    comments.push_back("clamped=" + std::to_string(projected.clamped));
    std::ostringstream csv;
    write_panel_csv(csv, panel, comments);
    write_text("panel.csv", csv.str());

    nlohmann::json doc = to_json(model);
    doc["clamped"] = projected.clamped;
    doc["metadata"] = metadata();
    write_json("pca.json", doc);

    const Vector spectrum = explained_variance_spectrum(stacked);
    std::ostringstream scree;
    for (const auto& c : csv_metadata()) scree << "# " << c << "\n";
    scree << "component,explained_variance_ratio\n";
    for (Eigen::Index c = 0; c < spectrum.size(); ++c) {
      scree << c + 1 << "," << format_double(spectrum(c)) << "\n";
    }
    write_text("scree.csv", scree.str());

    if (model.retained() > 1) {
      std::ostringstream reduced;
      for (const auto& c : csv_metadata()) reduced << "# " << c << "\n";
      reduced << "developer,period,component,value\n";
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t t = 0; t < T; ++t) {
          for (std::size_t c = 0; c < model.retained(); ++c) {
            reduced << panel.developers[i] << "," << panel.periods[t] << "," << c + 1 << ","
                    << format_double(projected.values(static_cast<Eigen::Index>(i * T + t),
                                                      static_cast<Eigen::Index>(c)))
                    << "\n";
          }
        }
      }
      write_text("reduced.csv", reduced.str());
    }
    return panel;
  }

  QualityReport quality(const OpinionVectorPanel& vectors) const {
    const Matrix high = vectors.stacked();
    const PcaModel model = pca_fit(high, cfg_.pca_dim);
    const Matrix low = pca_project(model, high);
    const auto m = static_cast<std::size_t>(high.rows());
    const std::size_t k = cfg_.k_explicit ? cfg_.k : clamp_neighborhood(cfg_.k, m);
    const QualityReport report = quality_report(high, low, k);

    nlohmann::json doc = to_json(report);
    doc["method"] = "PCA";
    doc["repository"] = cfg_.repo;
    doc["points"] = m;
    auto meta = metadata();
    meta["data"] = "stacked developer-period opinion vectors";
    doc["metadata"] = std::move(meta);
    write_json("quality.json", doc);

    std::ostringstream csv;
    for (const auto& c : csv_metadata()) csv << "# " << c << "\n";
    csv << "# data=stacked developer-period opinion vectors\n";
    csv << "method,repository,k,trustworthiness,continuity,mrre,spearman_global\n";
    csv << "PCA," << cfg_.repo << "," << report.k << "," << format_double(report.trustworthiness)
        << "," << format_double(report.continuity) << "," << format_double(report.mrre) << ","
        << format_double(report.spearman_global) << "\n";
    write_text("quality.csv", csv.str());
    return report;
  }

  FitArtifact fit_panel(const OpinionPanel& panel) const {
    FitArtifact artifact;
    artifact.range = fit_range(panel.num_periods());
    FitProblem problem{panel, artifact.range, fit_options(), std::nullopt};
    artifact.result = fit(problem);

    nlohmann::json doc = to_json(artifact.result);
    doc["fit_range"] = {{"first", artifact.range.first + 1}, {"last", artifact.range.last + 1}};
    doc["fit_periods"] = {panel.periods[artifact.range.first], panel.periods[artifact.range.last]};
    doc["metadata"] = metadata();
    write_json("fit.json", doc);
    return artifact;
  }

  void predict_panel(const OpinionPanel& panel, const FitArtifact& fit) const {
    require_alignment(panel, fit);
    const std::size_t horizon = cfg_.horizon;
    const TrajectoryPair traj = predict(fit.result.params, panel, fit.range, horizon);
    std::ostringstream csv;
    for (const auto& c : csv_metadata()) csv << "# " << c << "\n";
    csv << "trajectory,developer,step,period,value\n";
    const char* names[] = {"expressed", "private"};
    const Matrix* mats[] = {&traj.expressed, &traj.private_opinions};
    for (int which = 0; which < 2; ++which) {
      for (std::size_t i = 0; i < panel.num_developers(); ++i) {
        for (std::size_t s = 0; s <= horizon; ++s) {
          const std::size_t col = fit.range.last + s;
          const std::string label =
              col < panel.num_periods() ? panel.periods[col] : "+" + std::to_string(s);
          csv << names[which] << "," << panel.developers[i] << "," << s << "," << label << ","
              << format_double((*mats[which])(static_cast<Eigen::Index>(i),
                                              static_cast<Eigen::Index>(s)))
              << "\n";
        }
      }
    }
    write_text("predictions.csv", csv.str());
  }

  EvalReport evaluate_panel(const OpinionPanel& panel, const FitArtifact& fit,
                            const UpstreamFlags& flags) const {
    require_alignment(panel, fit);
    const std::size_t available = panel.num_periods() - 1 - fit.range.last;
    const std::size_t horizon = std::min(cfg_.horizon, available);
    EvalReport report = evaluate_fit(fit.result.params, panel, fit.range, horizon);
    report.clamped_upstream = flags.clamped;
    report.imputed_upstream = flags.imputed;

    auto group_or_blank = [&](const std::string& g) {
      for (const auto& [label, value] : report.rmse_by_group) {
        if (label == g) return format_double(value);
      }
      return std::string();
    };
    std::ostringstream csv;
    for (const auto& c : csv_metadata()) csv << "# " << c << "\n";
    csv << "repository,sum_residuals,mae,mape_percent,rmse_fit_window,rmse_h1,rmse_h2\n";
    csv << cfg_.repo << "," << format_double(report.sum_residuals) << ","
        << format_double(report.mae) << "," << format_double(report.mape_percent) << ","
        << group_or_blank("fit") << "," << group_or_blank("h1") << "," << group_or_blank("h2")
        << "\n";
    write_text("report.csv", csv.str());

    nlohmann::json doc = to_json(report);
    doc["repository"] = cfg_.repo;
    doc["fit_range"] = {{"first", fit.range.first + 1}, {"last", fit.range.last + 1}};
    doc["horizon"] = horizon;
    if (horizon >= 2) {
      doc["observation"] = {{"rmse_h2_below_h1", report.rmse("h2") < report.rmse("h1")}};
    }
    doc["metadata"] = metadata();
    write_json("report.json", doc);

    std::ostringstream periods;
    for (const auto& c : csv_metadata()) periods << "# " << c << "\n";
    periods << "group,period_index,period,rmse\n";
    const auto n = static_cast<Eigen::Index>(panel.num_developers());
    const TrajectoryPair window = reproduce_fit_window(fit.result.params, panel, fit.range);
    for (std::size_t s = 1; s <= fit.range.transitions(); ++s) {
      const std::size_t col = fit.range.first + s;
      const double sq = (window.expressed.col(static_cast<Eigen::Index>(s)) -
                         panel.values.col(static_cast<Eigen::Index>(col)))
                            .squaredNorm();
      periods << "fit," << col + 1 << "," << panel.periods[col] << ","
              << format_double(std::sqrt(sq / static_cast<double>(n))) << "\n";
    }
    for (std::size_t h = 1; h <= horizon; ++h) {
      const std::size_t col = fit.range.last + h;
      periods << "h" << h << "," << col + 1 << "," << panel.periods[col] << ","
              << format_double(report.rmse("h" + std::to_string(h))) << "\n";
    }
    write_text("rmse_by_period.csv", periods.str());
    return report;
  }

  void network(const FitArtifact& fit) const {
    const InfluenceGraph graph =
        build_graph(fit.result.params, cfg_.threshold, graph_source_from_string(cfg_.source));
    write_text("graph.dot", to_dot(graph, csv_metadata()));
    nlohmann::json doc = to_json(graph);
    doc["metadata"] = metadata();
    write_json("graph.json", doc);
  }

  void plot_data(const OpinionPanel& panel, const FitArtifact& fit) const {
    require_alignment(panel, fit);
    const std::size_t T = panel.num_periods();

    std::ostringstream opinions;
    for (const auto& c : csv_metadata()) opinions << "# " << c << "\n";
    opinions << "developer,period_index,period,opinion\n";
    for (std::size_t i = 0; i < panel.num_developers(); ++i) {
      for (std::size_t t = 0; t < T; ++t) {
        opinions << panel.developers[i] << "," << t + 1 << "," << panel.periods[t] << ","
                 << format_double(panel.values(static_cast<Eigen::Index>(i),
                                               static_cast<Eigen::Index>(t)))
                 << "\n";
      }
    }
    write_text("plot_opinions.csv", opinions.str());

    const TrajectoryPair window = reproduce_fit_window(fit.result.params, panel, fit.range);
    const std::size_t horizon = std::min(cfg_.horizon, T - 1 - fit.range.last);
    std::ostringstream traj;
    for (const auto& c : csv_metadata()) traj << "# " << c << "\n";
    traj << "segment,developer,period_index,period,observed,expressed,private\n";
    auto emit = [&](const char* segment, const TrajectoryPair& tp, std::size_t offset,
                    std::size_t from) {
      for (std::size_t i = 0; i < panel.num_developers(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        for (auto s = static_cast<Eigen::Index>(from); s < tp.expressed.cols(); ++s) {
          const auto col = offset + static_cast<std::size_t>(s);
          traj << segment << "," << panel.developers[i] << "," << col + 1 << ","
               << panel.periods[col] << ","
               << format_double(panel.values(r, static_cast<Eigen::Index>(col))) << ","
               << format_double(tp.expressed(r, s)) << ","
               << format_double(tp.private_opinions(r, s)) << "\n";
        }
      }
    };
    emit("fit", window, fit.range.first, 0);
    if (horizon > 0) {
      emit("forecast", predict(fit.result.params, panel, fit.range, horizon), fit.range.last, 1);
    }
    write_text("plot_trajectories.csv", traj.str());

    std::vector<std::size_t> lengths = cfg_.window_lengths;
    if (lengths.empty()) {
      for (std::size_t L = 3; L + 1 <= T; ++L) lengths.push_back(L);
    }
    const auto rows = window_experiment(panel, lengths, fit_options());
    std::ostringstream rmse;
    for (const auto& c : csv_metadata()) rmse << "# " << c << "\n";
    rmse << "fit_length,period_index,period,rmse\n";
    std::ostringstream summary;
    for (const auto& c : csv_metadata()) summary << "# " << c << "\n";
    summary << "fit_length,objective,sum_residuals,mae,mape_percent,rmse_fit_window,"
               "rmse_forecast_mean\n";
    for (const auto& row : rows) {
      double forecast_mean = 0.0;
      for (const auto& [col, value] : row.forecast_rmse) {
        rmse << row.fit_length << "," << col + 1 << "," << panel.periods[col] << ","
             << format_double(value) << "\n";
        forecast_mean += value;
      }
      forecast_mean /= static_cast<double>(row.forecast_rmse.size());
      summary << row.fit_length << "," << format_double(row.objective) << ","
              << format_double(row.report.sum_residuals) << "," << format_double(row.report.mae)
              << "," << format_double(row.report.mape_percent) << ","
              << format_double(row.report.rmse("fit")) << "," << format_double(forecast_mean)
              << "\n";
    }
    write_text("plot_window_rmse.csv", rmse.str());
    write_text("plot_window_summary.csv", summary.str());
  }

 private:
  FitOptions fit_options() const {
    FitOptions opt;
    opt.multistart_count = cfg_.multistarts;
    opt.max_iterations = cfg_.max_iterations;
    opt.step_tolerance = cfg_.step_tolerance;
    opt.seed = cfg_.seed;
    return opt;
  }

  PeriodRange fit_range(std::size_t periods) const {
    if (periods == 0) throw ValidationError("panel has no periods");
    PeriodRange r;
    if (cfg_.fit_first == 0 && cfg_.fit_last == 0) {
      const std::size_t last = periods >= cfg_.horizon + 3 ? periods - cfg_.horizon : periods;
      return {0, last - 1};
    }
    if (cfg_.fit_first < 1 || cfg_.fit_last < cfg_.fit_first || cfg_.fit_last > periods) {
      throw ValidationError("fit_range " + std::to_string(cfg_.fit_first) + ":" +
                            std::to_string(cfg_.fit_last) + " does not lie within 1:" +
                            std::to_string(periods));
    }
    r.first = cfg_.fit_first - 1;
    r.last = cfg_.fit_last - 1;
    return r;
  }

  static void require_alignment(const OpinionPanel& panel, const FitArtifact& fit) {
    if (fit.result.params.developers != panel.developers) {
      throw ValidationError("fitted parameters' developer list does not match the panel's");
    }
    if (fit.range.last >= panel.num_periods()) {
      throw ValidationError("fit_range of the parameters lies beyond the panel");
    }
  }

  static std::string require_input(const std::string& path, const char* flag) {
    if (path.empty()) throw InputError(std::string("missing required ") + flag);
    if (!fs::exists(path)) throw InputError(std::string(flag) + " path '" + path + "' does not exist");
    return path;
  }

  static nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    try {
      return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError("'" + path + "' is not valid JSON: " + e.what());
    }
  }

  nlohmann::json metadata() const {
    return {{"tool", kToolName},
            {"version", kToolVersion},
            {"seed", cfg_.seed},
            {"config_digest", cfg_.digest()},
            {"repository", cfg_.repo}};
  }

  std::vector<std::string> csv_metadata() const {
    return {std::string("tool=") + kToolName, std::string("version=") + kToolVersion,
            "seed=" + std::to_string(cfg_.seed), "config_digest=" + cfg_.digest(),
            "repository=" + cfg_.repo};
  }

  void write_text(const std::string& name, const std::string& body) const {
    fs::create_directories(out_dir_);
    std::ofstream out(out_dir_ / name, std::ios::binary);
    out << body;
    if (!out) throw Error("failed to write " + (out_dir_ / name).string());
  }

  void write_json(const std::string& name, const nlohmann::json& doc) const {
    write_text(name, doc.dump(2) + "\n");
  }

  RunConfig cfg_;
  fs::path out_dir_;
};

std::vector<std::size_t> parse_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(static_cast<std::size_t>(std::stoul(item)));
    } catch (const std::exception&) {
      throw ValidationError("'" + item + "' is not a non-negative integer");
    }
  }
  return out;
}

void parse_range(const std::string& text, RunConfig& cfg) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ValidationError("--fit-range must look like FIRST:LAST");
  try {
    cfg.fit_first = static_cast<std::size_t>(std::stoul(text.substr(0, colon)));
    cfg.fit_last = static_cast<std::size_t>(std::stoul(text.substr(colon + 1)));
  } catch (const std::exception&) {
    throw ValidationError("--fit-range must look like FIRST:LAST");
  }
}

int report_error(std::ostream& err, const char* kind, int code, const std::string& message,
                 std::size_t line = 0) {
  nlohmann::json doc = {{"status", "error"}, {"kind", kind}, {"exit_code", code},
                        {"message", message}};
  if (line) doc["line"] = line;
  err << doc.dump() << "\n";
  return code;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Opinion-dynamics toolkit for code-change embeddings", kToolName};
  app.require_subcommand(1, 1);

  RunConfig cfg;
  std::string config_path, fit_range_text, windows_text;
  app.add_option("--config", config_path, "JSON config file; flags override its keys");
  auto* o_input = app.add_option("--input", cfg.input, "Input artifact path");
  auto* o_params = app.add_option("--params", cfg.params, "Fitted parameters (fit.json)");
  auto* o_out = app.add_option("--out", cfg.out, "Output directory");
  auto* o_repo = app.add_option("--repo", cfg.repo, "Repository label");
  auto* o_pca = app.add_option("--pca-dim", cfg.pca_dim, "Retained PCA components");
  auto* o_k = app.add_option("--k", cfg.k, "Neighbourhood size for quality metrics");
  auto* o_multi = app.add_option("--multistarts", cfg.multistarts, "Fit multistart count");
  auto* o_iter = app.add_option("--max-iterations", cfg.max_iterations, "Iterations per start");
  auto* o_tol = app.add_option("--step-tolerance", cfg.step_tolerance, "Projected-gradient tolerance");
  auto* o_seed = app.add_option("--seed", cfg.seed, "Random seed");
  auto* o_thr = app.add_option("--threshold", cfg.threshold, "Edge threshold for network export");
  auto* o_source = app.add_option("--source", cfg.source, "Network source matrix (W or A)");
  auto* o_strict = app.add_flag("--strict", cfg.strict, "Reject records of unknown developers");
  auto* o_impute = app.add_option("--impute", cfg.impute, "Empty-cell policy: none|carry-forward");
  auto* o_range = app.add_option("--fit-range", fit_range_text, "1-based fit window FIRST:LAST");
  auto* o_horizon = app.add_option("--horizon", cfg.horizon, "Forecast steps after the fit window");
  auto* o_windows = app.add_option("--windows", windows_text, "Fit lengths for window experiments");

  const std::vector<std::pair<const char*, const char*>> commands = {
      {"aggregate", "Embedding JSONL -> opinion vector panel"},
      {"reduce", "Vector panel -> normalized 1-D opinion panel via PCA"},
      {"quality", "Neighbourhood-preservation scores of the PCA embedding"},
      {"fit", "Fit EPO parameters to an opinion panel"},
      {"predict", "Forecast trajectories from fitted parameters"},
      {"evaluate", "Error metrics of fitted parameters"},
      {"network", "Influence graph (DOT and JSON) from fitted parameters"},
      {"plot-data", "CSV series for plotting, including window experiments"},
      {"pipeline", "aggregate -> reduce -> quality -> fit -> predict -> evaluate -> network -> plot-data"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return report_error(err, "usage", kExitMalformedInput, e.what());
  }

  try {
    if (!o_range->empty()) parse_range(fit_range_text, cfg);
    if (!o_windows->empty()) cfg.window_lengths = parse_list(windows_text);
    cfg.k_explicit = !o_k->empty();

    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw InputError("config file '" + config_path + "' cannot be read");
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        throw InputError("config file is not valid JSON: " + std::string(e.what()));
      }
      try {
        auto apply = [&](const char* key, CLI::Option* opt, auto& field) {
          if (doc.contains(key) && opt->empty()) {
            doc[key].get_to(field);
          }
        };
        apply("input", o_input, cfg.input);
        apply("params", o_params, cfg.params);
        apply("out", o_out, cfg.out);
        apply("repo", o_repo, cfg.repo);
        apply("pca_dim", o_pca, cfg.pca_dim);
        apply("k", o_k, cfg.k);
        if (doc.contains("k") && o_k->empty()) cfg.k_explicit = true;
        apply("multistarts", o_multi, cfg.multistarts);
        apply("max_iterations", o_iter, cfg.max_iterations);
        apply("step_tolerance", o_tol, cfg.step_tolerance);
        apply("seed", o_seed, cfg.seed);
        apply("threshold", o_thr, cfg.threshold);
        apply("source", o_source, cfg.source);
        apply("strict", o_strict, cfg.strict);
        apply("impute", o_impute, cfg.impute);
        apply("horizon", o_horizon, cfg.horizon);
        apply("window_lengths", o_windows, cfg.window_lengths);
        if (doc.contains("fit_range") && o_range->empty()) {
          parse_range(doc["fit_range"].get<std::string>(), cfg);
        }
      } catch (const nlohmann::json::exception& e) {
        throw InputError("config file has a malformed value: " + std::string(e.what()));
      }
    }

    const std::string command = app.get_subcommands().front()->get_name();
    Runner runner(cfg);
    UpstreamFlags flags;
    if (command == "aggregate") {
      runner.aggregate(runner.load_records());
    } else if (command == "reduce") {
      runner.reduce(runner.load_vector_panel(), flags);
    } else if (command == "quality") {
      runner.quality(runner.load_vector_panel());
    } else if (command == "fit") {
      runner.fit_panel(runner.load_panel(flags));
    } else if (command == "predict") {
      runner.predict_panel(runner.load_panel(flags), runner.load_fit());
    } else if (command == "evaluate") {
      runner.evaluate_panel(runner.load_panel(flags), runner.load_fit(), flags);
    } else if (command == "network") {
      runner.network(runner.load_fit());
    } else if (command == "plot-data") {
      runner.plot_data(runner.load_panel(flags), runner.load_fit());
    } else if (command == "pipeline") {
      const auto vectors = runner.aggregate(runner.load_records());
      const OpinionPanel panel = runner.reduce(vectors, flags);
      runner.quality(vectors);
      const FitArtifact fitted = runner.fit_panel(panel);
      runner.predict_panel(panel, fitted);
      runner.evaluate_panel(panel, fitted, flags);
      runner.network(fitted);
      runner.plot_data(panel, fitted);
    }
    out << nlohmann::json{{"status", "ok"}, {"command", command}}.dump() << "\n";
    return kExitOk;
  } catch (const InputError& e) {
    return report_error(err, "malformed_input", kExitMalformedInput, e.what(), e.line());
  } catch (const ValidationError& e) {
    return report_error(err, "validation", kExitValidation, e.what());
  } catch (const NumericalError& e) {
    return report_error(err, "numerical", kExitNumerical, e.what());
  } catch (const std::exception& e) {
    return report_error(err, "io", kExitMalformedInput, e.what());
  }
}

}  // namespace epodyn
