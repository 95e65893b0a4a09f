#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "dtse/arz.hpp"
#include "dtse/comms_graph.hpp"

namespace dtse::testing {

inline Eigen::MatrixXd random_spd(int dim, std::mt19937_64& rng, double floor = 0.5) {
  std::normal_distribution<double> n01;
  Eigen::MatrixXd a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = n01(rng);
  Eigen::MatrixXd s = a * a.transpose() / dim + floor * Eigen::MatrixXd::Identity(dim, dim);
  return 0.5 * (s + s.transpose());
}

inline Eigen::MatrixXd random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Eigen::MatrixXd a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = n01(rng);
  return a;
}

// True when no demand/supply/min decision at one interface is within
// `margin` (relative) of a switch. rho_up < 0 marks the boundary interface.
inline bool smooth_interface(double chi_up, double rho_up, double demand_up, double rho_down,
                             const arz::ModelParams& p, double margin) {
  auto far = [&](double a, double b) { return std::abs(a - b) > margin * std::max({std::abs(a), std::abs(b), 1e-3}); };
  const double sigma = arz::critical_density(chi_up, p);
  if (rho_up >= 0.0 && !far(rho_up, sigma)) return false;
  if (!far(rho_down, sigma)) return false;
  const double s = arz::supply({rho_down, 0.0}, chi_up, p);
  if (!far(demand_up, s)) return false;
  return demand_up > margin && s > margin;
}

inline bool smooth_cell(arz::CellState c, const arz::ModelParams& p, double margin) {
  return arz::driver_characteristic(c, p) < p.chi_max() * (1.0 - margin);
}

// True when flux_vector(x, u) is smooth in a `margin` neighbourhood of x, so
// central differences see a single branch.
inline bool away_from_kinks(const arz::TrafficState& x, const arz::BoundaryInput& u, const arz::ModelParams& p,
                            double margin) {
  const int n = x.n_cells();
  if (!smooth_interface(u.chi_up, -1.0, u.demand_up, x.rho(0), p, margin)) return false;
  for (int i = 0; i < n; ++i) {
    if (!smooth_cell(x.cell(i), p, margin)) return false;
    const double rho_next = i + 1 < n ? x.rho(i + 1) : u.rho_down;
    const double chi = arz::driver_characteristic(x.cell(i), p);
    if (!smooth_interface(chi, x.rho(i), arz::demand(x.cell(i), p), rho_next, p, margin)) return false;
  }
  return true;
}

// States with per-cell speeds in [0.1 v_f, v_f] and densities in
// [0.05, 0.9] rho_m and no branch switch within `margin`. Cells are drawn
// left to right, each redrawn until its upstream interface is smooth.
inline arz::TrafficState random_smooth_state(const arz::ModelParams& p, const arz::BoundaryInput& u,
                                             std::mt19937_64& rng, double margin = 1e-3) {
  std::uniform_real_distribution<double> frac_rho(0.05, 0.9);
  std::uniform_real_distribution<double> frac_v(0.1, 1.0);
  const int n = p.n_cells;
  arz::TrafficState x(n);
  for (int i = 0; i < n;) {
    bool placed = false;
    for (int tries = 0; tries < 1000 && !placed; ++tries) {
      const double rho = frac_rho(rng) * p.rho_max;
      const double v = frac_v(rng) * p.v_free;
      const arz::CellState c{rho, rho * (v + arz::pressure(rho, p))};
      if (!smooth_cell(c, p, margin)) continue;
      const bool upstream_ok =
          i == 0 ? smooth_interface(u.chi_up, -1.0, u.demand_up, c.rho, p, margin)
                 : smooth_interface(arz::driver_characteristic(x.cell(i - 1), p), x.rho(i - 1),
                                    arz::demand(x.cell(i - 1), p), c.rho, p, margin);
      const bool downstream_ok =
          i + 1 < n || smooth_interface(arz::driver_characteristic(c, p), c.rho, arz::demand(c, p), u.rho_down, p, margin);
      if (upstream_ok && downstream_ok) {
        x.set_cell(i, c);
        placed = true;
      }
    }
    // A dead end restarts from the first cell.
    i = placed ? i + 1 : 0;
  }
  return x;
}

inline arz::BoundaryInput random_boundary(const arz::ModelParams& p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  arz::BoundaryInput u;
  u.chi_up = (0.6 + 0.8 * unit(rng)) * p.v_free;
  u.demand_up = unit(rng) * 0.6;
  u.rho_down = (0.05 + 0.85 * unit(rng)) * p.rho_max;
  return u;
}

inline Eigen::MatrixXd fd_jacobian(const arz::TrafficState& x, const arz::BoundaryInput& u,
                                   const arz::ModelParams& p) {
  const auto dim = x.vector().size();
  Eigen::MatrixXd j(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    const double h = 1e-6 * std::max(std::abs(x.vector()[c]), 1e-3);
    arz::TrafficState plus = x, minus = x;
    plus.vector()[c] += h;
    minus.vector()[c] -= h;
    j.col(c) = (arz::flux_vector(plus, u, p) - arz::flux_vector(minus, u, p)) / (2.0 * h);
  }
  return j;
}

// Random geometric graph of CVs on a line segment.
inline comms::CommGraph random_geometric_graph(int n, double length, double range, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(0.0, length);
  std::vector<comms::GraphNode> nodes;
  for (int i = 0; i < n; ++i) nodes.push_back({{sensing::SensorKind::Cv, i}, pos(rng)});
  return comms::build_graph(nodes, range);
}

}  // namespace dtse::testing
