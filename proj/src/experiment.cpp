#include "dtse/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iterator>
#include <map>
#include <stdexcept>

#include "dtse/units.hpp"

namespace dtse::experiment {

using sensing::SensorId;
using sensing::SensorKind;

RunConfig RunConfig::defaults() {
  RunConfig c;
  c.scenario = micro::ScenarioSpec::defaults();
  c.model = arz::ModelParams::defaults();
  c.rsu_positions = {50.0, 850.0, 1650.0, 2450.0};
  c.rates_pct = {2.0, 5.0, 10.0, 15.0, 20.0};
  c.scenario.seed = c.seed;
  return c;
}

void RunConfig::validate() const {
  model.validate();
  scenario.validate();
  const double span = scenario.domain_end() - scenario.domain_start();
  if (std::abs(span - model.n_cells * model.dh) > 1e-6) {
    throw std::invalid_argument("n_cells * dh_m must equal road_length_m - 2 * buffer_m");
  }
  for (double r : rsu_positions) {
    if (r < 0.0 || r >= span) throw std::invalid_argument("rsu_positions_m: position outside the domain");
  }
  if (std::abs(scenario.sample_dt - model.dt) > 1e-12) throw std::invalid_argument("dt_s: sample step must equal the filter step");
  if (!(v2x_range >= 0.0)) throw std::invalid_argument("v2x_range_m must be non-negative");
  if (consensus_rounds < 0) throw std::invalid_argument("consensus_rounds must be non-negative");
  for (double v : {p0_rho, p0_psi, q_rho, q_psi, r_rho, r_psi}) {
    if (!(v > 0.0)) throw std::invalid_argument("noise variances (p0_*, q_*, r_*) must be positive");
  }
  if (rho_init_vehkm < 0.0 || units::vehkm_to_vehm(rho_init_vehkm) > model.rho_max) {
    throw std::invalid_argument("rho_init_vehkm must lie in [0, rho_m]");
  }
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  for (double r : rates_pct) {
    if (r < 0.0 || r > 100.0) throw std::invalid_argument("rates_pct: rate outside [0, 100]");
  }
  if (window_start < 0.0 || window_start > scenario.duration) throw std::invalid_argument("window_start_s outside the run");
  if (window_end && *window_end < window_start) throw std::invalid_argument("window_end_s before window_start_s");
  if (filter_start < 0.0 || filter_start > window_start) throw std::invalid_argument("filter_start_s must lie in [0, window_start_s]");
}

Eigen::Matrix2d RunConfig::measurement_cov() const {
  Eigen::Matrix2d r = Eigen::Matrix2d::Zero();
  r(0, 0) = units::var_vehkm_to_vehm(r_rho);
  r(1, 1) = units::var_vehh_to_vehs(r_psi);
  return r;
}

dkf::ProcessNoise RunConfig::process_noise() const {
  return dkf::ProcessNoise::cell_diagonal(model.n_cells, units::var_vehkm_to_vehm(q_rho),
                                          units::var_vehh_to_vehs(q_psi));
}

Eigen::MatrixXd RunConfig::initial_cov() const {
  Eigen::VectorXd d(model.state_dim());
  for (int i = 0; i < model.n_cells; ++i) {
    d[2 * i] = units::var_vehkm_to_vehm(p0_rho);
    d[2 * i + 1] = units::var_vehh_to_vehs(p0_psi);
  }
  return d.asDiagonal().toDenseMatrix();
}

arz::TrafficState RunConfig::initial_state() const {
  const double rho = units::vehkm_to_vehm(rho_init_vehkm);
  return arz::TrafficState::uniform(model.n_cells, {rho, model.v_free * rho});
}

std::optional<double> Scenario::position_of(int vehicle_id, int k) const {
  const auto& vs = trajectories.snapshots[k].vehicles;
  auto it = std::lower_bound(vs.begin(), vs.end(), vehicle_id, [](const auto& v, int id) { return v.id < id; });
  if (it == vs.end() || it->id != vehicle_id) return std::nullopt;
  return it->position;
}

std::vector<int> Scenario::flagged_cvs() const {
  std::vector<int> flagged;
  for (int id : pool) {
    for (int k = k_begin; k <= k_end; ++k) {
      const auto& vs = trajectories.snapshots[k].vehicles;
      auto it = std::lower_bound(vs.begin(), vs.end(), id, [](const auto& v, int i) { return v.id < i; });
      if (it != vs.end() && it->id == id) {
        if (it->is_cv) flagged.push_back(id);
        break;
      }
    }
  }
  return flagged;
}

Scenario prepare_scenario(const RunConfig& cfg) {
  cfg.validate();
  Scenario sc;
  micro::ScenarioSpec spec = cfg.scenario;
  spec.seed = cfg.seed;
  sc.trajectories = micro::run_microsim(spec);
  sc.domain = cfg.domain();
  sc.fields = truth::aggregate(sc.trajectories, cfg.model, sc.domain);
  sc.inputs.reserve(sc.trajectories.n_samples());
  for (int k = 0; k < sc.trajectories.n_samples(); ++k) {
    sc.inputs.push_back(truth::extract_boundary_input(sc.trajectories, cfg.model, k));
  }

  const auto& entries = sc.trajectories.domain_entries;
  auto ego = std::find_if(entries.begin(), entries.end(), [&](const auto& c) { return c.t >= cfg.window_start; });
  if (ego == entries.end()) throw std::runtime_error("no vehicle enters the domain after window_start_s");
  sc.ego_id = ego->vehicle_id;

  const int last_k = sc.trajectories.n_samples() - 1;
  int k_cap = last_k;
  if (cfg.window_end) k_cap = std::min(k_cap, static_cast<int>(std::floor(*cfg.window_end / spec.sample_dt)));
  sc.k_begin = -1;
  for (int k = static_cast<int>(std::ceil(ego->t / spec.sample_dt)); k <= k_cap; ++k) {
    const auto pos = sc.position_of(sc.ego_id, k);
    const bool inside = pos && sc.domain.contains(*pos);
    if (inside) {
      if (sc.k_begin < 0) sc.k_begin = k;
      sc.k_end = k;
    } else if (sc.k_begin >= 0) {
      break;
    }
  }
  if (sc.k_begin < 0) throw std::runtime_error("ego vehicle is never sampled inside the domain");

  std::vector<int> pool;
  for (int k = sc.k_begin; k <= sc.k_end; ++k) {
    for (const auto& v : sc.trajectories.snapshots[k].vehicles) {
      if (sc.domain.contains(v.position)) pool.push_back(v.id);
    }
  }
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  sc.pool = std::move(pool);
  return sc;
}

namespace {

bool inside_box(const arz::TrafficState& x, const arz::ModelParams& p) {
  for (int i = 0; i < x.n_cells(); ++i) {
    if (x.rho(i) < 0.0 || x.rho(i) > p.rho_max || x.psi(i) < 0.0 || x.psi(i) > p.psi_max()) return false;
  }
  return true;
}

}  // namespace

ScenarioHistory run_scenario(const RunConfig& cfg, const Scenario& sc, const std::vector<int>& cv_subset,
                             std::uint64_t noise_seed, dkf::Execution exec, Record record) {
  const arz::ModelParams& p = cfg.model;
  const Eigen::Matrix2d r = cfg.measurement_cov();
  const dkf::ProcessNoise q = cfg.process_noise();
  const dkf::NodeFilter prior = dkf::init_node({}, cfg.initial_state(), cfg.initial_cov());

  std::vector<int> cvs = cv_subset;
  std::sort(cvs.begin(), cvs.end());
  cvs.erase(std::unique(cvs.begin(), cvs.end()), cvs.end());

  ScenarioHistory h;
  h.k_first = std::min(sc.k_begin, static_cast<int>(std::lround(cfg.filter_start / cfg.model.dt)));
  h.k_begin = sc.k_begin;
  h.k_end = sc.k_end;

  std::vector<dkf::NodeFilter> nodes;
  dkf::NodeFilter joiner = prior;
  std::map<SensorId, Rng> rngs;
  const SensorId ego_sensor{SensorKind::Cv, sc.ego_id};

  for (int k = h.k_first; k <= sc.k_end; ++k) {
    // Active sensors in id order: RSUs first, then CVs inside the domain.
    std::vector<comms::GraphNode> active;
    for (std::size_t i = 0; i < cfg.rsu_positions.size(); ++i) {
      active.push_back({{SensorKind::Rsu, static_cast<int>(i) + 1}, sc.domain.start + cfg.rsu_positions[i]});
    }
    for (int id : cvs) {
      const auto pos = sc.position_of(id, k);
      if (pos && sc.domain.contains(*pos)) active.push_back({{SensorKind::Cv, id}, *pos});
    }

    std::vector<dkf::NodeFilter> next;
    next.reserve(active.size());
    auto old = nodes.begin();
    for (const auto& a : active) {
      while (old != nodes.end() && old->id < a.id) ++old;
      if (old != nodes.end() && old->id == a.id) {
        next.push_back(std::move(*old));
      } else {
        next.push_back(a.id.kind == SensorKind::Cv ? joiner : prior);
        next.back().id = a.id;
      }
    }
    nodes = std::move(next);
    h.max_nodes = std::max(h.max_nodes, static_cast<int>(nodes.size()));

    for (const auto& n : nodes) {
      if (!inside_box(n.x_hat, p)) ++h.box_violations;
      if (n.id == ego_sensor) {
        h.ego_steps.push_back(k);
        h.ego_estimates.push_back(n.x_hat);
      }
    }

    comms::CommGraph g = comms::build_graph(active, cfg.v2x_range);
    const comms::ConsensusWeights w = comms::metropolis_weights(g);

    std::vector<dkf::NodeInput> inputs(nodes.size());
    std::vector<sensing::Measurement> taken;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const SensorId id = nodes[i].id;
      auto it = rngs.find(id);
      if (it == rngs.end()) {
        const auto kind = static_cast<std::uint64_t>(id.kind);
        it = rngs.emplace(id, make_rng(noise_seed, {stream::kMeasurement, kind, static_cast<std::uint64_t>(id.index)})).first;
      }
      sensing::SensorNode sensor{id, active[i].position, r};
      inputs[i].noise_cov = r;
      inputs[i].measurement = sensing::make_measurement(sc.fields, sensor, sensing::occupied_cell(active[i].position, sc.domain), k, p, it->second);
      if (record == Record::Everything && inputs[i].measurement) taken.push_back(*inputs[i].measurement);
    }

    if (record == Record::Everything) {
      StepRecord rec;
      rec.k = k;
      for (std::size_t i = 0; i < nodes.size(); ++i) rec.nodes.push_back({nodes[i].id, active[i].position, nodes[i].x_hat});
      rec.graph = g;
      rec.measurements = std::move(taken);
      h.steps.push_back(std::move(rec));
    }

    const dkf::StepContext ctx{k, sc.inputs[k], &g, &w, cfg.consensus_rounds};
    dkf::network_step(nodes, inputs, ctx, p, q, exec);
    if (cfg.join_mode == JoinMode::OpenLoop) dkf::node_step(joiner, sc.inputs[k], dkf::NodeInput{}, p, q, k);
  }
  return h;
}

EgoFields ego_fields(const Scenario& sc, const ScenarioHistory& h) {
  const auto steps = static_cast<Eigen::Index>(h.ego_steps.size());
  const int n = sc.fields.n_cells();
  EgoFields f;
  f.rho_true.resize(steps, n);
  f.rho_est.resize(steps, n);
  f.psi_true.resize(steps, n);
  f.psi_est.resize(steps, n);
  for (Eigen::Index r = 0; r < steps; ++r) {
    const int k = h.ego_steps[r];
    const auto& est = h.ego_estimates[r];
    for (int i = 0; i < n; ++i) {
      f.rho_true(r, i) = units::vehm_to_vehkm(sc.fields.rho(k, i));
      f.psi_true(r, i) = units::vehs_to_vehh(sc.fields.psi(k, i));
      f.rho_est(r, i) = units::vehm_to_vehkm(est.rho(i));
      f.psi_est(r, i) = units::vehs_to_vehh(est.psi(i));
    }
  }
  return f;
}

TrialMetrics ego_metrics(const Scenario& sc, const ScenarioHistory& h) {
  if (h.ego_steps.empty()) throw std::runtime_error("ego_metrics: the ego was never an active node");
  const EgoFields f = ego_fields(sc, h);
  TrialMetrics m;
  m.rmse_rho = metrics::rmse(f.rho_true, f.rho_est);
  m.rmse_psi = metrics::rmse(f.psi_true, f.psi_est);
  m.smape_rho = metrics::smape(f.rho_true, f.rho_est);
  m.smape_psi = metrics::smape(f.psi_true, f.psi_est);
  return m;
}

std::vector<int> draw_cv_subset(const Scenario& sc, double rate_pct, Rng& rng) {
  const auto target = std::max<long>(1, std::lround(rate_pct / 100.0 * static_cast<double>(sc.pool.size())));
  std::vector<int> others;
  others.reserve(sc.pool.size());
  for (int id : sc.pool) {
    if (id != sc.ego_id) others.push_back(id);
  }
  std::vector<int> subset;
  std::sample(others.begin(), others.end(), std::back_inserter(subset), static_cast<std::size_t>(target - 1), rng);
  subset.push_back(sc.ego_id);
  std::sort(subset.begin(), subset.end());
  return subset;
}

ErrorReport monte_carlo(const RunConfig& cfg, const Scenario& sc, dkf::Execution exec) {
  const int n_rates = static_cast<int>(cfg.rates_pct.size());
  const int n_tasks = n_rates * cfg.trials;
  std::vector<TrialMetrics> results(static_cast<std::size_t>(n_tasks));
  std::vector<long> violations(static_cast<std::size_t>(n_tasks), 0);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_tasks));

  auto run_task = [&](int task) {
    const int ri = task / cfg.trials;
    const int trial = task % cfg.trials;
    const auto rate_tag = static_cast<std::uint64_t>(ri);
    const auto trial_tag = static_cast<std::uint64_t>(trial);
    Rng subset_rng = make_rng(cfg.seed, {stream::kSubset, rate_tag, trial_tag});
    Rng seed_rng = make_rng(cfg.seed, {stream::kMeasurement, rate_tag, trial_tag});
    const std::vector<int> subset = draw_cv_subset(sc, cfg.rates_pct[ri], subset_rng);
    const ScenarioHistory h = run_scenario(cfg, sc, subset, seed_rng(), dkf::Execution::Serial, Record::EgoOnly);
    TrialMetrics m = ego_metrics(sc, h);
    m.rate_pct = cfg.rates_pct[ri];
    m.trial = trial;
    m.n_cvs = static_cast<int>(subset.size());
    results[task] = m;
    violations[task] = h.box_violations;
  };

  if (exec == dkf::Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int task = 0; task < n_tasks; ++task) {
      try {
        run_task(task);
      } catch (...) {
        errors[task] = std::current_exception();
      }
    }
  } else {
    for (int task = 0; task < n_tasks; ++task) run_task(task);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ErrorReport report;
  report.trials = std::move(results);
  for (long v : violations) report.box_violations += v;
  for (int ri = 0; ri < n_rates; ++ri) {
    std::vector<double> rr, rp, sr, sp;
    for (const auto& m : report.trials) {
      if (m.rate_pct != cfg.rates_pct[ri]) continue;
      rr.push_back(m.rmse_rho);
      rp.push_back(m.rmse_psi);
      sr.push_back(m.smape_rho);
      sp.push_back(m.smape_psi);
    }
    report.summary.push_back({cfg.rates_pct[ri], metrics::box_stats(rr), metrics::box_stats(rp), metrics::box_stats(sr),
                              metrics::box_stats(sp)});
  }
  return report;
}

}  // namespace dtse::experiment
