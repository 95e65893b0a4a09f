// Serial reference vs OpenMP kernels.

#include <random>

#include <benchmark/benchmark.h>

#include "dtse/dkf_network.hpp"
#include "dtse/experiment.hpp"
#include "dtse/units.hpp"

using namespace dtse;

namespace {

dkf::Execution exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? dkf::Execution::Serial : dkf::Execution::Parallel;
}

struct Network {
  arz::ModelParams p = arz::ModelParams::defaults();
  comms::CommGraph graph;
  comms::ConsensusWeights weights;
  std::vector<dkf::NodeFilter> nodes;
  std::vector<dkf::NodeInput> inputs;
  dkf::ProcessNoise q = dkf::ProcessNoise::cell_diagonal(25, units::var_vehkm_to_vehm(4.0), units::var_vehh_to_vehs(400.0));

  explicit Network(int n_cvs) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> pos(0.0, 2500.0);
    std::vector<comms::GraphNode> gn;
    for (int i = 0; i < 4; ++i) gn.push_back({{sensing::SensorKind::Rsu, i + 1}, 50.0 + 800.0 * i});
    for (int i = 0; i < n_cvs; ++i) gn.push_back({{sensing::SensorKind::Cv, i}, pos(rng)});
    graph = comms::build_graph(gn, 400.0);
    weights = comms::metropolis_weights(graph);

    const double rho0 = units::vehkm_to_vehm(50.0);
    const arz::TrafficState x0 = arz::TrafficState::uniform(p.n_cells, {rho0, p.v_free * rho0});
    Eigen::Matrix2d r = Eigen::Matrix2d::Zero();
    r(0, 0) = units::var_vehkm_to_vehm(4.0);
    r(1, 1) = units::var_vehh_to_vehs(400.0);
    for (const auto& g : graph.nodes) {
      nodes.push_back(dkf::init_node(g.id, x0, Eigen::MatrixXd::Identity(2 * p.n_cells, 2 * p.n_cells)));
      dkf::NodeInput in;
      in.noise_cov = r;
      sensing::Measurement m;
      m.cell = std::min(p.n_cells, static_cast<int>(g.position / p.dh) + 1);
      m.sensor = g.id;
      m.y << 0.06, 0.06 * p.v_free;
      in.measurement = m;
      inputs.push_back(in);
    }
  }
};

void BM_NetworkStep(benchmark::State& state) {
  const Network net(static_cast<int>(state.range(1)));
  const dkf::StepContext ctx{0, {0.5, net.p.v_free, 0.02}, &net.graph, &net.weights, 5};
  for (auto _ : state) {
    auto nodes = net.nodes;
    dkf::network_step(nodes, net.inputs, ctx, net.p, net.q, exec_of(state));
    benchmark::DoNotOptimize(nodes.front().x_hat.vector().data());
  }
  state.counters["nodes"] = static_cast<double>(net.nodes.size());
}

void BM_Consensus(benchmark::State& state) {
  const Network net(static_cast<int>(state.range(1)));
  std::vector<dkf::InfoPair> pairs;
  for (const auto& n : net.nodes) pairs.push_back(n.info);
  for (auto _ : state) {
    auto work = pairs;
    dkf::consensus(work, net.graph, net.weights, 5, exec_of(state));
    benchmark::DoNotOptimize(work.front().xi.data());
  }
}

void BM_MonteCarlo(benchmark::State& state) {
  static const experiment::RunConfig cfg = [] {
    auto c = experiment::RunConfig::defaults();
    c.rates_pct = {10.0};
    c.trials = 4;
    c.filter_start = 600.0;
    return c;
  }();
  static const experiment::Scenario sc = experiment::prepare_scenario(cfg);
  for (auto _ : state) {
    const auto report = experiment::monte_carlo(cfg, sc, exec_of(state));
    benchmark::DoNotOptimize(report.trials.data());
  }
}

}  // namespace

BENCHMARK(BM_NetworkStep)->ArgNames({"parallel", "cvs"})->ArgsProduct({{0, 1}, {8, 32}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Consensus)->ArgNames({"parallel", "cvs"})->ArgsProduct({{0, 1}, {8, 32}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarlo)->ArgNames({"parallel"})->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->Iterations(1);

BENCHMARK_MAIN();
