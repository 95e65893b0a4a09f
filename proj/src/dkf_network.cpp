#include "dtse/dkf_network.hpp"

#include <exception>
#include <stdexcept>

#include <omp.h>

namespace dtse::dkf {

namespace {

void fuse_node(int l, std::span<const InfoPair> cur, std::span<InfoPair> nxt, const comms::CommGraph& g,
               const comms::ConsensusWeights& w) {
  InfoPair& out = nxt[l];
  out.xi = w.self[l] * cur[l].xi;
  out.Xi = w.self[l] * cur[l].Xi;
  const auto& adj = g.adjacency[l];
  for (std::size_t r = 0; r < adj.size(); ++r) {
    const double pi = w.neighbor[l][r];
    out.xi += pi * cur[adj[r]].xi;
    out.Xi += pi * cur[adj[r]].Xi;
  }
}

// Runs body(i) for i in [0, n). Exceptions are captured per index and the
// one with the lowest index is rethrown, so failures report identically in
// both modes.
template <typename Body>
void for_each_node(int n, Execution exec, Body&& body) {
  if (exec == Execution::Serial) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

void consensus_round(std::span<const InfoPair> current, std::span<InfoPair> next, const comms::CommGraph& g,
                     const comms::ConsensusWeights& w, Execution exec) {
  const int n = g.size();
  if (static_cast<int>(current.size()) != n || static_cast<int>(next.size()) != n) {
    throw std::invalid_argument("consensus_round: buffer size does not match graph");
  }
  for_each_node(n, exec, [&](int l) { fuse_node(l, current, next, g, w); });
}

void consensus(std::vector<InfoPair>& pairs, const comms::CommGraph& g, const comms::ConsensusWeights& w, int rounds,
               Execution exec) {
  std::vector<InfoPair> scratch(pairs.size());
  for (int a = 0; a < rounds; ++a) {
    consensus_round(pairs, scratch, g, w, exec);
    pairs.swap(scratch);
  }
}

void network_step(std::vector<NodeFilter>& nodes, std::span<const NodeInput> inputs, const StepContext& ctx,
                  const arz::ModelParams& p, const ProcessNoise& q, Execution exec) {
  const int n = static_cast<int>(nodes.size());
  if (static_cast<int>(inputs.size()) != n || ctx.graph == nullptr || ctx.weights == nullptr ||
      ctx.graph->size() != n) {
    throw std::invalid_argument("network_step: nodes, inputs and graph must be index-aligned");
  }

  std::vector<arz::Linearization> lins(static_cast<std::size_t>(n));
  std::vector<InfoPair> pairs(static_cast<std::size_t>(n));

  auto tagged = [&](int i, auto&& fn) {
    try {
      fn();
    } catch (const NumericalFailure& e) {
      throw NumericalFailure(e.reason(), nodes[i].id.str(), ctx.k);
    }
  };

  // Steps 1 and 2: linearization and local measurement update.
  for_each_node(n, exec, [&](int i) {
    lins[i] = arz::linearize(nodes[i].x_hat, ctx.u, p);
    pairs[i] = nodes[i].info;
    if (inputs[i].measurement) local_update(pairs[i], *inputs[i].measurement, inputs[i].noise_cov);
  });

  // Step 3: fusion. Each iteration reads only the previous buffer.
  consensus(pairs, *ctx.graph, *ctx.weights, ctx.consensus_rounds, exec);
  for_each_node(n, exec, [&](int i) { symmetrize(pairs[i].Xi); });

  // Steps 4 and 5: prediction and projection.
  for_each_node(n, exec, [&](int i) {
    tagged(i, [&] {
      nodes[i].info = predict(pairs[i], lins[i], q);
      finalize_constraint(nodes[i], p);
    });
  });
}

void node_step(NodeFilter& node, const arz::BoundaryInput& u, const NodeInput& input, const arz::ModelParams& p,
               const ProcessNoise& q, int k) {
  comms::CommGraph g = comms::build_graph({{node.id, 0.0}}, 0.0);
  const comms::ConsensusWeights w = comms::metropolis_weights(g);
  std::vector<NodeFilter> nodes{std::move(node)};
  StepContext ctx{k, u, &g, &w, 0};
  network_step(nodes, std::span<const NodeInput>(&input, 1), ctx, p, q);
  node = std::move(nodes.front());
}

}  // namespace dtse::dkf
