#include "dtse/csv_export.hpp"

#include <fstream>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "dtse/units.hpp"

namespace dtse::io {

namespace {

class CsvFile {
 public:
  CsvFile(const fs::path& path, const char* header) : path_(path), out_(path) {
    if (!out_) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out_.precision(10);
    out_ << header << '\n';
  }
  ~CsvFile() noexcept(false) {
    out_.flush();
    if (!out_ && std::uncaught_exceptions() == 0) throw std::runtime_error("write failed for '" + path_.string() + "'");
  }
  std::ofstream& row() { return out_; }

 private:
  fs::path path_;
  std::ofstream out_;
};

}  // namespace

std::string estimates_file(const sensing::SensorId& node) { return "estimates_" + node.str() + ".csv"; }

void write_trajectories(const fs::path& path, const micro::Trajectories& traj) {
  CsvFile f(path, "t,vehicle_id,lane,position_m,speed_mps,is_cv");
  for (const auto& s : traj.snapshots) {
    for (const auto& v : s.vehicles) {
      f.row() << s.t << ',' << v.id << ',' << v.lane << ',' << v.position << ',' << v.speed << ',' << (v.is_cv ? 1 : 0)
              << '\n';
    }
  }
}

void write_fields(const fs::path& path, const truth::GroundTruthFields& fields) {
  CsvFile f(path, "k,cell,rho_vehkm,v_kmh,psi_vehh");
  for (int k = 0; k < fields.n_steps(); ++k) {
    for (int i = 0; i < fields.n_cells(); ++i) {
      f.row() << k << ',' << i + 1 << ',' << units::vehm_to_vehkm(fields.rho(k, i)) << ','
              << units::mps_to_kmh(fields.v(k, i)) << ',' << units::vehs_to_vehh(fields.psi(k, i)) << '\n';
    }
  }
}

void write_measurements(const fs::path& path, const experiment::ScenarioHistory& h) {
  CsvFile f(path, "k,sensor_id,kind,cell,rho_meas,psi_meas");
  for (const auto& step : h.steps) {
    for (const auto& m : step.measurements) {
      f.row() << m.k << ',' << m.sensor.str() << ',' << sensing::to_string(m.sensor.kind) << ',' << m.cell << ','
              << units::vehm_to_vehkm(m.y[0]) << ',' << units::vehs_to_vehh(m.y[1]) << '\n';
    }
  }
}

void write_node_estimates(const fs::path& dir, const experiment::ScenarioHistory& h) {
  std::map<sensing::SensorId, std::unique_ptr<CsvFile>> files;
  for (const auto& step : h.steps) {
    for (const auto& n : step.nodes) {
      auto it = files.find(n.id);
      if (it == files.end()) {
        it = files.emplace(n.id, std::make_unique<CsvFile>(dir / estimates_file(n.id),
                                                           "k,node_id,cell,rho_est_vehkm,psi_est_vehh")).first;
      }
      auto& out = it->second->row();
      const std::string id = n.id.str();
      for (int i = 0; i < n.estimate.n_cells(); ++i) {
        out << step.k << ',' << id << ',' << i + 1 << ',' << units::vehm_to_vehkm(n.estimate.rho(i)) << ','
            << units::vehs_to_vehh(n.estimate.psi(i)) << '\n';
      }
    }
  }
}

void write_graph(const fs::path& nodes_path, const fs::path& edges_path, const experiment::ScenarioHistory& h,
                 const experiment::Scenario& sc) {
  const sensing::SensorId ego{sensing::SensorKind::Cv, sc.ego_id};
  CsvFile nodes(nodes_path, "k,node_id,kind,position_m");
  CsvFile edges(edges_path, "k,node_a,node_b,link_type");
  for (const auto& step : h.steps) {
    for (const auto& n : step.graph.nodes) {
      const char* kind = n.id == ego ? "EGO" : sensing::to_string(n.id.kind);
      nodes.row() << step.k << ',' << n.id.str() << ',' << kind << ',' << n.position - sc.domain.start << '\n';
    }
    for (const auto& e : step.graph.edges) {
      edges.row() << step.k << ',' << step.graph.nodes[e.a].id.str() << ',' << step.graph.nodes[e.b].id.str() << ','
                  << comms::to_string(e.type) << '\n';
    }
  }
}

namespace {

void write_grid(const fs::path& path, const std::vector<int>& ks, const Eigen::MatrixXd& grid) {
  std::string header = "k";
  for (Eigen::Index i = 0; i < grid.cols(); ++i) header += ",cell_" + std::to_string(i + 1);
  CsvFile f(path, header.c_str());
  for (Eigen::Index r = 0; r < grid.rows(); ++r) {
    f.row() << ks[r];
    for (Eigen::Index i = 0; i < grid.cols(); ++i) f.row() << ',' << grid(r, i);
    f.row() << '\n';
  }
}

}  // namespace

void write_heatmaps(const fs::path& dir, const experiment::Scenario& sc, const experiment::ScenarioHistory& h) {
  const experiment::EgoFields ef = experiment::ego_fields(sc, h);
  write_grid(dir / kTruthDensityCsv, h.ego_steps, ef.rho_true);
  write_grid(dir / kEgoDensityCsv, h.ego_steps, ef.rho_est);
  CsvFile f(dir / kEgoTrajectoryCsv, "k,t,position_m,cell");
  const double dt = sc.trajectories.spec.sample_dt;
  for (int k : h.ego_steps) {
    const auto pos = sc.position_of(sc.ego_id, k);
    if (!pos) continue;
    const auto cell = sc.domain.cell_of(*pos);
    f.row() << k << ',' << k * dt << ',' << *pos - sc.domain.start << ',' << (cell ? *cell : 0) << '\n';
  }
}

void write_study(const fs::path& path, const experiment::ErrorReport& report) {
  CsvFile f(path, "rate,trial,rmse_rho,rmse_psi,smape_rho,smape_psi");
  for (const auto& t : report.trials) {
    f.row() << t.rate_pct << ',' << t.trial << ',' << t.rmse_rho << ',' << t.rmse_psi << ',' << t.smape_rho << ','
            << t.smape_psi << '\n';
  }
}

void write_study_summary(const fs::path& path, const experiment::ErrorReport& report,
                         const experiment::RunConfig& cfg) {
  using nlohmann::json;
  auto box = [](const metrics::BoxStats& b) {
    return json{{"whisker_low", b.whisker_low}, {"q1", b.q1},           {"median", b.median},
                {"q3", b.q3},                   {"whisker_high", b.whisker_high}, {"iqr", b.iqr()}};
  };
  json rates = json::array();
  for (const auto& s : report.summary) {
    rates.push_back({{"rate_pct", s.rate_pct},
                     {"rmse_rho_vehkm", box(s.rmse_rho)},
                     {"rmse_psi_vehh", box(s.rmse_psi)},
                     {"smape_rho_pct", box(s.smape_rho)},
                     {"smape_psi_pct", box(s.smape_psi)}});
  }
  const json doc = {{"seed", cfg.seed},
                    {"trials_per_rate", cfg.trials},
                    {"consensus_rounds", cfg.consensus_rounds},
                    {"box_violations", report.box_violations},
                    {"rates", rates}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace dtse::io
