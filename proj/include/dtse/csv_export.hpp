#pragma once

#include <filesystem>
#include <string>

#include "dtse/experiment.hpp"

namespace dtse::io {

namespace fs = std::filesystem;

// Fixed artifact names inside an output directory.
inline constexpr const char* kTrajectoriesCsv = "trajectories.csv";
inline constexpr const char* kFieldsCsv = "fields.csv";
inline constexpr const char* kMeasurementsCsv = "measurements.csv";
inline constexpr const char* kGraphNodesCsv = "graph_nodes.csv";
inline constexpr const char* kGraphEdgesCsv = "graph_edges.csv";
inline constexpr const char* kTruthDensityCsv = "heatmap_truth_density.csv";
inline constexpr const char* kEgoDensityCsv = "heatmap_ego_density.csv";
inline constexpr const char* kEgoTrajectoryCsv = "ego_trajectory.csv";
inline constexpr const char* kStudyCsv = "study.csv";
inline constexpr const char* kStudySummaryJson = "study_summary.json";

std::string estimates_file(const sensing::SensorId& node);  // estimates_<node>.csv

// (t, vehicle_id, lane, position_m, speed_mps, is_cv)
void write_trajectories(const fs::path& path, const micro::Trajectories& traj);
// (k, cell, rho_vehkm, v_kmh, psi_vehh)
void write_fields(const fs::path& path, const truth::GroundTruthFields& fields);
// (k, sensor_id, kind, cell, rho_meas, psi_meas) in veh/km and veh/h
void write_measurements(const fs::path& path, const experiment::ScenarioHistory& h);
// One estimates_<node>.csv per node: (k, node_id, cell, rho_est_vehkm, psi_est_vehh)
void write_node_estimates(const fs::path& dir, const experiment::ScenarioHistory& h);
// (k, node_id, kind, position_m) with kind RSU, CV or EGO; (k, node_a, node_b, link_type).
// Positions are measured from the domain start.
void write_graph(const fs::path& nodes_path, const fs::path& edges_path, const experiment::ScenarioHistory& h,
                 const experiment::Scenario& sc);
// Grids with header `k,cell_1,...,cell_N` over the ego window, and the ego
// path (k, t, position_m, cell).
void write_heatmaps(const fs::path& dir, const experiment::Scenario& sc, const experiment::ScenarioHistory& h);
// (rate, trial, rmse_rho, rmse_psi, smape_rho, smape_psi)
void write_study(const fs::path& path, const experiment::ErrorReport& report);
void write_study_summary(const fs::path& path, const experiment::ErrorReport& report, const experiment::RunConfig& cfg);

}  // namespace dtse::io
