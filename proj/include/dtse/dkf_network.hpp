#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dtse/comms_graph.hpp"
#include "dtse/dkf.hpp"

namespace dtse::dkf {

/// Serial is the reference; Parallel runs the per-node phases and each
/// consensus iteration as OpenMP loops. Both produce bit-identical results.
enum class Execution { Serial, Parallel };

struct NodeInput {
  std::optional<sensing::Measurement> measurement;
  Eigen::Matrix2d noise_cov = Eigen::Matrix2d::Identity();  // R of this node's sensor
};

struct StepContext {
  int k = 0;
  arz::BoundaryInput u;
  const comms::CommGraph* graph = nullptr;  // node i of the graph is nodes[i]
  const comms::ConsensusWeights* weights = nullptr;
  int consensus_rounds = 0;
};

/// One consensus iteration: next[l] = sum_j pi_lj current[j] over l and its
/// neighbors. `current` and `next` must not alias.
void consensus_round(std::span<const InfoPair> current, std::span<InfoPair> next, const comms::CommGraph& g,
                     const comms::ConsensusWeights& w, Execution exec = Execution::Serial);

/// `rounds` double-buffered iterations applied in place.
void consensus(std::vector<InfoPair>& pairs, const comms::CommGraph& g, const comms::ConsensusWeights& w, int rounds,
               Execution exec = Execution::Serial);

/// One full filter step for every node: linearize at x_hat, assimilate the
/// local measurement, fuse over the graph, predict, and project. Nodes must
/// be index-aligned with ctx.graph->nodes and with `inputs`.
void network_step(std::vector<NodeFilter>& nodes, std::span<const NodeInput> inputs, const StepContext& ctx,
                  const arz::ModelParams& p, const ProcessNoise& q, Execution exec = Execution::Serial);

/// A lone node with no neighbors.
void node_step(NodeFilter& node, const arz::BoundaryInput& u, const NodeInput& input, const arz::ModelParams& p,
               const ProcessNoise& q, int k = 0);

}  // namespace dtse::dkf
