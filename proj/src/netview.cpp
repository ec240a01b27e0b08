#include "epodyn/netview.hpp"

#include <cstdio>
#include <sstream>

namespace epodyn {

namespace {

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string node_name(const InfluenceGraph& g, std::size_t i) {
  return g.nodes.empty() ? std::to_string(i + 1) : g.nodes[i];
}

}  // namespace

std::string to_string(GraphSource source) { return source == GraphSource::W ? "W" : "A"; }

GraphSource graph_source_from_string(const std::string& text) {
  if (text == "W" || text == "w") return GraphSource::W;
  if (text == "A" || text == "a") return GraphSource::A;
  throw ValidationError("graph source must be 'W' or 'A', got '" + text + "'");
}

InfluenceGraph build_graph(const EpoParameters& params, double threshold, GraphSource source) {
  params.require_feasible();
  if (!(threshold >= 0.0 && threshold < 1.0)) {
    throw ValidationError("edge threshold must lie in [0, 1)");
  }
  InfluenceGraph g;
  g.source = source;
  g.threshold = threshold;
  g.weights = source == GraphSource::W ? params.W : params.A;
  g.self_weights = g.weights.diagonal();
  const std::size_t n = params.size();
  g.nodes = params.developers;
  if (g.nodes.empty()) {
    for (std::size_t i = 0; i < n; ++i) g.nodes.push_back(std::to_string(i + 1));
  }
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = 0; t < n; ++t) {
      if (s == t) continue;
      const double w = g.weights(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(s));
      if (w > threshold) g.edges.push_back({s, t, w});
    }
  }
  return g;
}

std::string to_dot(const InfluenceGraph& graph, const std::vector<std::string>& comments) {
  std::ostringstream os;
  for (const auto& line : comments) os << "// " << line << "\n";
  os << "digraph influence {\n";
  os << "  // source matrix " << to_string(graph.source) << ", threshold "
     << fixed3(graph.threshold) << "\n";
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    os << "  " << quoted(node_name(graph, i)) << " [label=" << quoted(node_name(graph, i))
       << ", self_weight=" << quoted(fixed3(graph.self_weights(static_cast<Eigen::Index>(i))))
       << "];\n";
  }
  for (const auto& e : graph.edges) {
    os << "  " << quoted(node_name(graph, e.source)) << " -> "
       << quoted(node_name(graph, e.target)) << " [label=" << quoted(fixed3(e.weight)) << "];\n";
  }
  os << "}\n";
  return os.str();
}

nlohmann::json to_json(const InfluenceGraph& graph) {
  auto nodes = nlohmann::json::array();
  const Vector susceptibility = graph.susceptibility();
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    nodes.push_back({{"id", node_name(graph, i)},
                     {"self_weight", graph.self_weights(static_cast<Eigen::Index>(i))},
                     {"susceptibility", susceptibility(static_cast<Eigen::Index>(i))}});
  }
  auto edges = nlohmann::json::array();
  for (const auto& e : graph.edges) {
    edges.push_back({{"source", node_name(graph, e.source)},
                     {"target", node_name(graph, e.target)},
                     {"weight", e.weight}});
  }
  auto adjacency = nlohmann::json::array();
  for (Eigen::Index i = 0; i < graph.weights.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < graph.weights.cols(); ++j) row.push_back(graph.weights(i, j));
    adjacency.push_back(std::move(row));
  }
  return {{"source", to_string(graph.source)},
          {"threshold", graph.threshold},
          {"nodes", std::move(nodes)},
          {"edges", std::move(edges)},
          {"adjacency", std::move(adjacency)}};
}

}  // namespace epodyn
