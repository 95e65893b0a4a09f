#include <random>

#include "doctest.h"
#include "dtse/dkf_network.hpp"
#include "dtse/experiment.hpp"
#include "support/fixtures.hpp"

using namespace dtse;

TEST_CASE("serial and parallel consensus are bit-identical") {
  std::mt19937_64 rng(21);
  const comms::CommGraph g = testing::random_geometric_graph(30, 2500.0, 400.0, rng);
  const comms::ConsensusWeights w = comms::metropolis_weights(g);
  std::vector<dkf::InfoPair> pairs;
  for (int i = 0; i < g.size(); ++i) pairs.push_back({testing::random_matrix(10, 1, rng), testing::random_spd(10, rng)});
  auto serial = pairs;
  auto parallel = pairs;
  dkf::consensus(serial, g, w, 5, dkf::Execution::Serial);
  dkf::consensus(parallel, g, w, 5, dkf::Execution::Parallel);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    CHECK(serial[i].xi == parallel[i].xi);
    CHECK(serial[i].Xi == parallel[i].Xi);
  }
}

TEST_CASE("serial and parallel scenario runs are bit-identical") {
  experiment::RunConfig cfg = experiment::RunConfig::defaults();
  cfg.filter_start = 650.0;
  const experiment::Scenario sc = experiment::prepare_scenario(cfg);
  std::vector<int> cvs = sc.flagged_cvs();
  cvs.push_back(sc.ego_id);
  const auto a = experiment::run_scenario(cfg, sc, cvs, 99, dkf::Execution::Serial, experiment::Record::Everything);
  const auto b = experiment::run_scenario(cfg, sc, cvs, 99, dkf::Execution::Parallel, experiment::Record::Everything);
  REQUIRE(a.steps.size() == b.steps.size());
  bool identical = true;
  for (std::size_t s = 0; s < a.steps.size(); ++s) {
    REQUIRE(a.steps[s].nodes.size() == b.steps[s].nodes.size());
    for (std::size_t i = 0; i < a.steps[s].nodes.size(); ++i) {
      identical = identical && a.steps[s].nodes[i].estimate.vector() == b.steps[s].nodes[i].estimate.vector();
    }
  }
  CHECK(identical);
  CHECK(a.box_violations == 0);
}

TEST_CASE("numerical failure carries node and step") {
  arz::ModelParams p = arz::ModelParams::defaults();
  p.n_cells = 2;
  dkf::NodeFilter node;
  node.id = {sensing::SensorKind::Cv, 42};
  node.x_hat = arz::TrafficState::uniform(2, {0.05, 1.0});
  node.info.Xi = -Eigen::MatrixXd::Identity(4, 4);
  node.info.xi = Eigen::VectorXd::Zero(4);
  std::vector<dkf::NodeFilter> nodes{node};
  const comms::CommGraph g = comms::build_graph({{node.id, 0.0}}, 400.0);
  const comms::ConsensusWeights w = comms::metropolis_weights(g);
  const std::vector<dkf::NodeInput> inputs(1);
  try {
    dkf::network_step(nodes, inputs, {17, {0.2, p.v_free, 0.05}, &g, &w, 0}, p,
                      dkf::ProcessNoise::cell_diagonal(2, 1e-6, 1e-4), dkf::Execution::Parallel);
    FAIL("expected a numerical failure");
  } catch (const dkf::NumericalFailure& e) {
    CHECK(e.node() == "cv42");
    CHECK(e.step() == 17);
  }
}
