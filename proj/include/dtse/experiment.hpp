#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dtse/arz.hpp"
#include "dtse/comms_graph.hpp"
#include "dtse/dkf.hpp"
#include "dtse/dkf_network.hpp"
#include "dtse/domain.hpp"
#include "dtse/ground_truth.hpp"
#include "dtse/metrics.hpp"
#include "dtse/microsim.hpp"
#include "dtse/sensing.hpp"

namespace dtse::experiment {

/// How a CV entering the domain starts its filter. `Prior` uses the global
/// prior as is. `OpenLoop` uses the prior propagated by the model alone since
/// the filter start, as if the CV had run its own filter without data.
enum class JoinMode { Prior, OpenLoop };

/// Everything a study needs. Filter tuning values are in reporting units:
/// (veh/km)^2 for density variances, (veh/h)^2 for relative-flow variances.
struct RunConfig {
  micro::ScenarioSpec scenario;
  arz::ModelParams model;
  std::vector<double> rsu_positions;  // from the domain start [m]
  double v2x_range = 400.0;           // [m]
  int consensus_rounds = 5;

  double rho_init_vehkm = 50.0;  // prior density; prior psi = v_f * rho
  double p0_rho = 1.0;
  double p0_psi = 1.0;
  double q_rho = 4.0;
  double q_psi = 400.0;
  double r_rho = 4.0;
  double r_psi = 400.0;

  std::vector<double> rates_pct;
  int trials = 20;
  std::uint64_t seed = 20250701;
  double window_start = 700.0;  // the ego is the first vehicle entering the domain from here on [s]
  std::optional<double> window_end;
  double filter_start = 0.0;  // the node network runs from here [s]
  JoinMode join_mode = JoinMode::OpenLoop;

  static RunConfig defaults();

  /// Throws std::invalid_argument naming the offending key.
  void validate() const;

  Domain domain() const { return Domain::from(model, scenario.domain_start()); }
  Eigen::Matrix2d measurement_cov() const;
  dkf::ProcessNoise process_noise() const;
  Eigen::MatrixXd initial_cov() const;
  arz::TrafficState initial_state() const;
};

/// Ground truth shared by every trial of a study.
struct Scenario {
  micro::Trajectories trajectories;
  truth::GroundTruthFields fields;
  Domain domain;
  std::vector<arz::BoundaryInput> inputs;  // u_k for every sample k
  int ego_id = -1;
  int k_begin = 0;  // first sample with the ego inside the domain
  int k_end = 0;    // last such sample (inclusive)
  std::vector<int> pool;  // vehicles inside the domain at some k in [k_begin, k_end]

  /// Road position of a vehicle at sample k, if it is on the road.
  std::optional<double> position_of(int vehicle_id, int k) const;
  /// Vehicles the microsimulation flagged as connected, restricted to the pool.
  std::vector<int> flagged_cvs() const;
};

/// Runs the microsimulation, aggregates it, and picks the ego and pool.
Scenario prepare_scenario(const RunConfig& cfg);

struct NodeRecord {
  sensing::SensorId id;
  double position = 0.0;     // road coordinate [m]
  arz::TrafficState estimate;  // x_hat held at the start of the step
};

struct StepRecord {
  int k = 0;
  std::vector<NodeRecord> nodes;
  comms::CommGraph graph;
  std::vector<sensing::Measurement> measurements;
};

struct ScenarioHistory {
  int k_first = 0;  // first filter step
  int k_begin = 0;  // ego window
  int k_end = 0;
  std::vector<StepRecord> steps;  // every filter step, when recording everything
  std::vector<int> ego_steps;     // k with an ego estimate
  std::vector<arz::TrafficState> ego_estimates;
  long box_violations = 0;        // estimates outside the box, any node any step
  int max_nodes = 0;
};

enum class Record { EgoOnly, Everything };

/// Steps ground truth, sensing, graph and all node filters from
/// `filter_start` to the end of the ego's window. RSUs are always active; CVs
/// from `cv_subset` are active while inside the domain, joining from the prior
/// and dropped on leaving.
ScenarioHistory run_scenario(const RunConfig& cfg, const Scenario& sc, const std::vector<int>& cv_subset,
                             std::uint64_t noise_seed, dkf::Execution exec = dkf::Execution::Serial,
                             Record record = Record::EgoOnly);

struct TrialMetrics {
  double rate_pct = 0.0;
  int trial = 0;
  int n_cvs = 0;
  double rmse_rho = 0.0;   // [veh/km]
  double rmse_psi = 0.0;   // [veh/h]
  double smape_rho = 0.0;  // [%]
  double smape_psi = 0.0;  // [%]
};

/// Ego-CV error over its active window, in reporting units.
TrialMetrics ego_metrics(const Scenario& sc, const ScenarioHistory& h);

/// Per-variable matrices (rows = ego steps) in reporting units.
struct EgoFields {
  Eigen::MatrixXd rho_true, rho_est;  // [veh/km]
  Eigen::MatrixXd psi_true, psi_est;  // [veh/h]
};
EgoFields ego_fields(const Scenario& sc, const ScenarioHistory& h);

struct RateSummary {
  double rate_pct = 0.0;
  metrics::BoxStats rmse_rho, rmse_psi, smape_rho, smape_psi;
};

struct ErrorReport {
  std::vector<TrialMetrics> trials;  // ordered by (rate, trial)
  std::vector<RateSummary> summary;
  long box_violations = 0;
};

/// The ego plus a uniform draw of round(rate * |pool|) - 1 other pool
/// vehicles.
std::vector<int> draw_cv_subset(const Scenario& sc, double rate_pct, Rng& rng);

/// Trials run as independent tasks; each derives its RNG streams from the
/// master seed and its (rate, trial) index, so the report does not depend on
/// `exec`.
ErrorReport monte_carlo(const RunConfig& cfg, const Scenario& sc, dkf::Execution exec = dkf::Execution::Parallel);

}  // namespace dtse::experiment
