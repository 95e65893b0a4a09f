#pragma once

#include <vector>

#include <Eigen/Dense>

#include "dtse/sensing.hpp"

namespace dtse::comms {

enum class LinkType { P2P, V2V, V2I };

const char* to_string(LinkType t);

struct GraphNode {
  sensing::SensorId id;
  double position = 0.0;  // road coordinate [m]
};

struct Edge {
  int a = 0;  // node index, a < b
  int b = 0;
  LinkType type = LinkType::V2V;
};

/// Undirected V2X graph over the sensors active at one time step. Node
/// indices follow the order of `nodes`; adjacency lists are sorted.
struct CommGraph {
  std::vector<GraphNode> nodes;
  std::vector<Edge> edges;
  std::vector<std::vector<int>> adjacency;

  int size() const { return static_cast<int>(nodes.size()); }
  int degree(int i) const { return static_cast<int>(adjacency[i].size()); }
};

/// Edge iff |pos_a - pos_b| <= range (inclusive). Consecutive RSUs (by
/// position) are always linked over P2P.
CommGraph build_graph(std::vector<GraphNode> nodes, double range);

/// Per-node consensus weights aligned with CommGraph::adjacency.
struct ConsensusWeights {
  std::vector<double> self;
  std::vector<std::vector<double>> neighbor;

  Eigen::MatrixXd dense(const CommGraph& g) const;
};

/// Metropolis-Hastings weights: 1 / (1 + max(deg_l, deg_j)) per edge, the
/// remainder on the diagonal. Doubly stochastic on any undirected graph.
ConsensusWeights metropolis_weights(const CommGraph& g);

/// Connected components as sorted lists of node indices, ordered by their
/// smallest member.
std::vector<std::vector<int>> connected_components(const CommGraph& g);

}  // namespace dtse::comms
