#include <algorithm>
#include <tuple>

#include "doctest.h"
#include "epodyn/netview.hpp"
#include "epodyn/random.hpp"

using namespace epodyn;

namespace {

EpoParameters with_names(EpoParameters p) {
  p.developers.clear();
  for (std::size_t i = 0; i < p.size(); ++i) p.developers.push_back("dev" + std::to_string(i + 1));
  return p;
}

}  // namespace

TEST_CASE("W = I has no edges and full independence") {
  const auto p = with_names(
      EpoParameters::from_decomposition(Vector::Ones(3), Matrix::Constant(3, 3, 0.5), Vector::Ones(3)));
  const auto g = build_graph(p, 0.0);
  CHECK(g.edges.empty());
  CHECK(g.self_weights == Vector::Ones(3));
  CHECK(g.susceptibility().isZero(0.0));
}

TEST_CASE("two developers copying each other") {
  Matrix A(2, 2);
  A << 0, 1, 1, 0;
  const auto p = with_names(EpoParameters::from_decomposition(Vector::Zero(2), A, Vector::Zero(2)));
  const auto g = build_graph(p, kDefaultEdgeThreshold);
  REQUIRE(g.edges.size() == 2);
  for (const auto& e : g.edges) CHECK(e.weight == 1.0);
  CHECK(g.self_weights == Vector::Zero(2));
  CHECK(g.edges[0].source == 0);
  CHECK(g.edges[0].target == 1);
}

TEST_CASE("threshold zero enumerates every positive off-diagonal entry") {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = with_names(random_feasible_params(5, rng));
    const auto g = build_graph(p, 0.0);
    std::vector<std::tuple<std::size_t, std::size_t, double>> want, got;
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 5; ++j)
        if (i != j && p.W(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.0)
          want.emplace_back(j, i, p.W(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    for (const auto& e : g.edges) got.emplace_back(e.source, e.target, e.weight);
    std::sort(want.begin(), want.end());
    std::sort(got.begin(), got.end());
    CHECK(got == want);
    // The full matrix is kept: self weight plus all incoming weights sum to 1.
    for (Eigen::Index i = 0; i < 5; ++i) CHECK(std::abs(g.weights.row(i).sum() - 1.0) <= 1e-12);
  }
}

TEST_CASE("threshold filters and source selection") {
  Rng rng(9);
  const auto p = with_names(random_feasible_params(4, rng));
  const auto g = build_graph(p, 0.2);
  for (const auto& e : g.edges) CHECK(e.weight > 0.2);
  const auto a = build_graph(p, 0.0, GraphSource::A);
  CHECK(a.self_weights.isZero(0.0));
  CHECK(a.weights == p.A);
  CHECK(graph_source_from_string("A") == GraphSource::A);
  CHECK(to_string(GraphSource::W) == "W");
  CHECK_THROWS_AS(graph_source_from_string("X"), ValidationError);
  CHECK_THROWS_AS(build_graph(p, 1.0), ValidationError);
  CHECK_THROWS_AS(build_graph(p, -0.1), ValidationError);

  auto bad = p;
  bad.W(1, 1) = 1.5;
  CHECK_THROWS_AS(build_graph(bad, 0.0), ValidationError);
}

TEST_CASE("DOT output") {
  Matrix A(2, 2);
  A << 0, 1, 1, 0;
  Vector d(2);
  d << 0.25, 1.0;
  const auto p = with_names(EpoParameters::from_decomposition(d, A, Vector::Zero(2)));
  const std::string dot = to_dot(build_graph(p, 0.01), {"repository=demo"});
  CHECK(dot.rfind("// repository=demo\n", 0) == 0);
  CHECK(dot.find("digraph influence {") != std::string::npos);
  CHECK(dot.find("\"dev1\" [label=\"dev1\", self_weight=\"0.250\"];") != std::string::npos);
  CHECK(dot.find("\"dev2\" -> \"dev1\" [label=\"0.750\"];") != std::string::npos);
  CHECK(dot.find("\"dev1\" -> \"dev2\"") == std::string::npos);

  const auto doc = to_json(build_graph(p, 0.01));
  CHECK(doc["nodes"].size() == 2);
  CHECK(doc["edges"].size() == 1);
  CHECK(doc["source"] == "W");
}
