#include "dtse/comms_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dtse::comms {

const char* to_string(LinkType t) {
  switch (t) {
    case LinkType::P2P: return "P2P";
    case LinkType::V2V: return "V2V";
    case LinkType::V2I: return "V2I";
  }
  return "?";
}

namespace {

LinkType link_between(const GraphNode& a, const GraphNode& b) {
  const bool rsu_a = a.id.kind == sensing::SensorKind::Rsu;
  const bool rsu_b = b.id.kind == sensing::SensorKind::Rsu;
  if (rsu_a && rsu_b) return LinkType::P2P;
  if (!rsu_a && !rsu_b) return LinkType::V2V;
  return LinkType::V2I;
}

}  // namespace

CommGraph build_graph(std::vector<GraphNode> nodes, double range) {
  CommGraph g;
  g.nodes = std::move(nodes);
  const int n = g.size();
  g.adjacency.assign(n, {});

  std::vector<int> rsus;
  for (int i = 0; i < n; ++i) {
    if (g.nodes[i].id.kind == sensing::SensorKind::Rsu) rsus.push_back(i);
  }
  std::stable_sort(rsus.begin(), rsus.end(), [&](int a, int b) { return g.nodes[a].position < g.nodes[b].position; });
  auto p2p_neighbors = [&](int a, int b) {
    for (std::size_t r = 1; r < rsus.size(); ++r) {
      if ((rsus[r - 1] == a && rsus[r] == b) || (rsus[r - 1] == b && rsus[r] == a)) return true;
    }
    return false;
  };

  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const bool in_range = std::abs(g.nodes[a].position - g.nodes[b].position) <= range;
      if (in_range || p2p_neighbors(a, b)) {
        g.edges.push_back({a, b, link_between(g.nodes[a], g.nodes[b])});
        g.adjacency[a].push_back(b);
        g.adjacency[b].push_back(a);
      }
    }
  }
  for (auto& adj : g.adjacency) std::sort(adj.begin(), adj.end());
  return g;
}

Eigen::MatrixXd ConsensusWeights::dense(const CommGraph& g) const {
  const int n = g.size();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    w(i, i) = self[i];
    for (std::size_t r = 0; r < g.adjacency[i].size(); ++r) w(i, g.adjacency[i][r]) = neighbor[i][r];
  }
  return w;
}

ConsensusWeights metropolis_weights(const CommGraph& g) {
  const int n = g.size();
  ConsensusWeights w;
  w.self.assign(n, 1.0);
  w.neighbor.assign(n, {});
  for (int l = 0; l < n; ++l) {
    double off = 0.0;
    for (int j : g.adjacency[l]) {
      const double pi = 1.0 / (1.0 + std::max(g.degree(l), g.degree(j)));
      w.neighbor[l].push_back(pi);
      off += pi;
    }
    w.self[l] = 1.0 - off;
  }
  return w;
}

std::vector<std::vector<int>> connected_components(const CommGraph& g) {
  const int n = g.size();
  std::vector<int> label(n, -1);
  std::vector<std::vector<int>> comps;
  for (int s = 0; s < n; ++s) {
    if (label[s] >= 0) continue;
    std::vector<int> comp{s};
    label[s] = static_cast<int>(comps.size());
    for (std::size_t head = 0; head < comp.size(); ++head) {
      for (int j : g.adjacency[comp[head]]) {
        if (label[j] < 0) {
          label[j] = label[s];
          comp.push_back(j);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  return comps;
}

}  // namespace dtse::comms
