// Writes a synthetic embedding JSONL whose first principal direction carries
// an EPO trajectory. Used to produce tests/fixtures/synthetic_embeddings.jsonl.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "epodyn/dynamics.hpp"
#include "epodyn/embed.hpp"
#include "epodyn/random.hpp"

using namespace epodyn;

namespace {

Vector gaussian(Rng& rng, std::size_t q) {
  Vector v(q);
  for (std::size_t k = 0; k < q; ++k) {
    const double u1 = 1.0 - rng.uniform();
    const double u2 = rng.uniform();
    v(k) = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  return v;
}

std::string month_label(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d", 2023 + index / 12, 1 + index % 12);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic embedding fixture generator"};
  std::string out_path, truth_path;
  std::uint64_t seed = 7;
  std::size_t developers = 7, periods = 12, q = 16;
  double noise = 0.05;
  app.add_option("--out", out_path, "Output JSONL")->required();
  app.add_option("--truth", truth_path, "Optional JSON with generating parameters and panel");
  app.add_option("--seed", seed);
  app.add_option("--developers", developers);
  app.add_option("--periods", periods);
  app.add_option("--q", q);
  app.add_option("--noise", noise, "Orthogonal noise relative to the signal scale");
  CLI11_PARSE(app, argc, argv);

  Rng rng(seed);
  const EpoParameters params = random_feasible_params(developers, rng);
  Vector x0(developers);
  for (std::size_t i = 0; i < developers; ++i) x0(i) = rng.uniform();
  const TrajectoryPair traj = epo_simulate(params, x0, x0, periods - 1);

  Vector axis = gaussian(rng, q).normalized();
  Eigen::Index arg = 0;
  axis.cwiseAbs().maxCoeff(&arg);
  if (axis(arg) < 0) axis = -axis;

  std::ofstream out(out_path);
  std::size_t pr_counter = 1000;
  for (std::size_t t = 0; t < periods; ++t) {
    for (std::size_t i = 0; i < developers; ++i) {
      Vector off = gaussian(rng, q);
      off -= off.dot(axis) * axis;
      const Vector cell = (traj.expressed(i, t) - 0.5) * axis + noise * off;

      const std::size_t prs = 1 + static_cast<std::size_t>(rng.uniform() * 3.0);
      for (std::size_t p = 0; p < prs; ++p) {
        const std::string pr_id = std::to_string(++pr_counter);
        const std::size_t files = 1 + static_cast<std::size_t>(rng.uniform() * 3.0);
        std::vector<Vector> jitter;
        Vector jitter_mean = Vector::Zero(q);
        for (std::size_t f = 0; f < files; ++f) {
          jitter.push_back(0.1 * gaussian(rng, q));
          jitter_mean += jitter.back();
        }
        jitter_mean /= static_cast<double>(files);
        for (std::size_t f = 0; f < files; ++f) {
          EmbeddingRecord rec;
          rec.developer = "dev" + std::to_string(i + 1);
          const std::string month = month_label(static_cast<int>(t));
          rec.period = f % 2 == 0 ? month : month + "-1" + std::to_string(f) + "T12:30:00Z";
          rec.pr_id = pr_id;
          rec.file_path = "src/module" + std::to_string(f) + ".cc";
          rec.sigma_old = gaussian(rng, q);
          rec.sigma_new = rec.sigma_old + cell + jitter[f] - jitter_mean;
          out << to_json(rec).dump() << "\n";
        }
      }
    }
  }

  if (!truth_path.empty()) {
    nlohmann::json doc;
    doc["params"] = to_json(params);
    std::vector<std::vector<double>> expressed;
    for (Eigen::Index i = 0; i < traj.expressed.rows(); ++i) {
      expressed.emplace_back();
      for (Eigen::Index t = 0; t < traj.expressed.cols(); ++t) {
        expressed.back().push_back(traj.expressed(i, t));
      }
    }
    doc["expressed"] = expressed;
    std::ofstream(truth_path) << doc.dump(2) << "\n";
  }
  return 0;
}
