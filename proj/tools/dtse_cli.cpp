#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dtse/config.hpp"
#include "dtse/csv_export.hpp"
#include "dtse/experiment.hpp"

namespace fs = std::filesystem;
using namespace dtse;

namespace {

struct Options {
  std::string command = "estimate";
  std::optional<fs::path> config;
  fs::path out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::vector<double> rates;
};

experiment::RunConfig load(const Options& o) {
  experiment::RunConfig cfg = o.config ? parse_config(*o.config) : parse_config_text("");
  if (o.seed) cfg.seed = *o.seed;
  if (o.trials) cfg.trials = *o.trials;
  if (!o.rates.empty()) cfg.rates_pct = o.rates;
  cfg.scenario.seed = cfg.seed;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

void simulate(const experiment::RunConfig& cfg, const fs::path& out) {
  micro::ScenarioSpec spec = cfg.scenario;
  const micro::Trajectories traj = micro::run_microsim(spec);
  const truth::GroundTruthFields fields = truth::aggregate(traj, cfg.model, cfg.domain());
  io::write_trajectories(out / io::kTrajectoriesCsv, traj);
  io::write_fields(out / io::kFieldsCsv, fields);
  std::printf("simulate: %zu samples, %ld vehicles entered, %ld exited\n", traj.snapshots.size(),
              traj.snapshots.back().entered, traj.snapshots.back().exited);
}

// Single run with the CVs flagged by the microsimulation plus the ego.
experiment::ScenarioHistory estimate(const experiment::RunConfig& cfg, const experiment::Scenario& sc) {
  std::vector<int> cvs = sc.flagged_cvs();
  cvs.push_back(sc.ego_id);
  return experiment::run_scenario(cfg, sc, cvs, cfg.seed, dkf::Execution::Parallel, experiment::Record::Everything);
}

void print_ego(const experiment::Scenario& sc, const experiment::ScenarioHistory& h) {
  const auto m = experiment::ego_metrics(sc, h);
  std::printf("ego cv%d active k=[%d, %d], up to %d nodes\n", sc.ego_id, sc.k_begin, sc.k_end, h.max_nodes);
  std::printf("  RMSE rho %.3f veh/km  RMSE psi %.1f veh/h  SMAPE rho %.2f %%  SMAPE psi %.2f %%\n", m.rmse_rho,
              m.rmse_psi, m.smape_rho, m.smape_psi);
}

int run(const Options& o) {
  const experiment::RunConfig cfg = load(o);
  fs::create_directories(o.out);

  if (o.command == "simulate") {
    simulate(cfg, o.out);
    return 0;
  }
  const experiment::Scenario sc = experiment::prepare_scenario(cfg);
  if (o.command == "estimate") {
    const auto h = estimate(cfg, sc);
    io::write_fields(o.out / io::kFieldsCsv, sc.fields);
    io::write_measurements(o.out / io::kMeasurementsCsv, h);
    io::write_node_estimates(o.out, h);
    io::write_graph(o.out / io::kGraphNodesCsv, o.out / io::kGraphEdgesCsv, h, sc);
    io::write_heatmaps(o.out, sc, h);
    print_ego(sc, h);
  } else if (o.command == "export-snapshots") {
    const auto h = estimate(cfg, sc);
    io::write_graph(o.out / io::kGraphNodesCsv, o.out / io::kGraphEdgesCsv, h, sc);
    std::printf("export-snapshots: %zu steps\n", h.steps.size());
  } else {
    const auto report = experiment::monte_carlo(cfg, sc);
    io::write_study(o.out / io::kStudyCsv, report);
    io::write_study_summary(o.out / io::kStudySummaryJson, report, cfg);
    std::printf("%8s %12s %12s %12s %12s\n", "rate%", "med RMSE r", "med RMSE p", "med SMAPE r", "IQR SMAPE r");
    for (const auto& s : report.summary) {
      std::printf("%8.1f %12.3f %12.1f %12.2f %12.2f\n", s.rate_pct, s.rmse_rho.median, s.rmse_psi.median,
                  s.smape_rho.median, s.smape_rho.iqr());
    }
    if (report.box_violations != 0) std::printf("warning: %ld estimates outside the box\n", report.box_violations);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed traffic state estimation over V2X"};
  Options o;
  app.add_option("--command", o.command, "simulate | estimate | montecarlo | export-snapshots")
      ->check(CLI::IsMember({"simulate", "estimate", "montecarlo", "export-snapshots"}));
  app.add_option("--config", o.config, "key = value config file (defaults when omitted)")->check(CLI::ExistingFile);
  app.add_option("--out", o.out, "output directory");
  app.add_option("--seed", o.seed, "master seed override");
  app.add_option("--trials", o.trials, "Monte Carlo trials per rate")->check(CLI::PositiveNumber);
  app.add_option("--rates", o.rates, "penetration rates in percent, comma separated")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  try {
    return run(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const dkf::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
