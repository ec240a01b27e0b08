#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "epodyn/dynamics.hpp"

namespace epodyn {

enum class GraphSource { W, A };

std::string to_string(GraphSource source);
GraphSource graph_source_from_string(const std::string& text);

struct InfluenceEdge {
  std::size_t source = 0;
  std::size_t target = 0;
  /// Entry (target, source) of the selected matrix: how much `target`
  /// listens to `source`.
  double weight = 0.0;
};

/// Directed influence network. Edges at or below the threshold are dropped
/// from `edges` but `weights` keeps the full matrix.
struct InfluenceGraph {
  std::vector<std::string> nodes;
  std::vector<InfluenceEdge> edges;
  /// Diagonal of the selected matrix; for W this is the independence measure.
  Vector self_weights;
  Matrix weights;
  GraphSource source = GraphSource::W;
  double threshold = 0.0;

  Vector susceptibility() const { return Vector::Ones(self_weights.size()) - self_weights; }
};

inline constexpr double kDefaultEdgeThreshold = 0.01;

InfluenceGraph build_graph(const EpoParameters& params, double threshold,
                           GraphSource source = GraphSource::W);

/// `comments` are emitted as leading `//` lines.
std::string to_dot(const InfluenceGraph& graph, const std::vector<std::string>& comments = {});
nlohmann::json to_json(const InfluenceGraph& graph);

}  // namespace epodyn
