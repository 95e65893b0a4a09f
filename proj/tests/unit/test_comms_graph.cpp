#include <random>

#include "doctest.h"
#include "dtse/comms_graph.hpp"
#include "support/fixtures.hpp"

using namespace dtse;
using sensing::SensorKind;

namespace {

comms::GraphNode rsu(int i, double x) { return {{SensorKind::Rsu, i}, x}; }
comms::GraphNode cv(int i, double x) { return {{SensorKind::Cv, i}, x}; }

}  // namespace

TEST_CASE("range is inclusive") {
  const auto g = comms::build_graph({cv(1, 0.0), cv(2, 400.0), cv(3, 800.0001)}, 400.0);
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges[0].a == 0);
  CHECK(g.edges[0].b == 1);
  CHECK(g.degree(2) == 0);
}

TEST_CASE("link types") {
  const auto g = comms::build_graph({rsu(1, 100.0), rsu(2, 900.0), cv(5, 200.0), cv(6, 300.0)}, 400.0);
  int p2p = 0, v2v = 0, v2i = 0;
  for (const auto& e : g.edges) {
    switch (e.type) {
      case comms::LinkType::P2P: ++p2p; break;
      case comms::LinkType::V2V: ++v2v; break;
      case comms::LinkType::V2I: ++v2i; break;
    }
  }
  CHECK(p2p == 1);  // RSUs 800 m apart are still linked
  CHECK(v2v == 1);
  CHECK(v2i == 2);
  CHECK(std::string(comms::to_string(comms::LinkType::V2I)) == "V2I");
}

TEST_CASE("only consecutive RSUs get a wired link") {
  const auto g = comms::build_graph({rsu(1, 0.0), rsu(2, 800.0), rsu(3, 1600.0)}, 10.0);
  CHECK(g.edges.size() == 2);
  CHECK(g.degree(1) == 2);
}

TEST_CASE("single node has no links") {
  const auto g = comms::build_graph({rsu(1, 0.0)}, 400.0);
  CHECK(g.edges.empty());
  const auto w = comms::metropolis_weights(g);
  CHECK(w.self[0] == 1.0);
}

TEST_CASE("Metropolis weights are symmetric and doubly stochastic") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = testing::random_geometric_graph(3 + trial % 25, 2500.0, 400.0, rng);
    const Eigen::MatrixXd w = comms::metropolis_weights(g).dense(g);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(w.rows());
    CHECK((w * ones - ones).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((w.transpose() * ones - ones).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((w - w.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(w.minCoeff() >= 0.0);
  }
}

TEST_CASE("connected components") {
  const auto g = comms::build_graph({cv(1, 0.0), cv(2, 300.0), cv(3, 1500.0), cv(4, 1700.0), cv(5, 2500.0)}, 400.0);
  const auto comps = comms::connected_components(g);
  REQUIRE(comps.size() == 3);
  CHECK(comps[0] == std::vector<int>{0, 1});
  CHECK(comps[1] == std::vector<int>{2, 3});
  CHECK(comps[2] == std::vector<int>{4});
}
