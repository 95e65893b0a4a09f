#include "dtse/ground_truth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dtse {

std::optional<int> Domain::cell_of(double pos) const {
  if (!contains(pos)) return std::nullopt;
  const int i = static_cast<int>(std::floor((pos - start) / dh)) + 1;
  return std::clamp(i, 1, n_cells);
}

}  // namespace dtse

namespace dtse::truth {

arz::TrafficState GroundTruthFields::state_at(int k) const {
  arz::TrafficState s(n_cells());
  for (int i = 0; i < n_cells(); ++i) s.set_cell(i, {rho(k, i), psi(k, i)});
  return s;
}

GroundTruthFields aggregate(const micro::Trajectories& traj, const arz::ModelParams& p, const Domain& domain) {
  const int n_steps = traj.n_samples();
  const int n = domain.n_cells;
  GroundTruthFields f;
  f.dt = traj.spec.sample_dt;
  f.rho = Eigen::MatrixXd::Zero(n_steps, n);
  f.v = Eigen::MatrixXd::Constant(n_steps, n, p.v_free);
  f.psi = Eigen::MatrixXd::Zero(n_steps, n);
  f.count = Eigen::MatrixXi::Zero(n_steps, n);

  Eigen::VectorXd speed_sum(n);
  for (int k = 0; k < n_steps; ++k) {
    speed_sum.setZero();
    for (const auto& veh : traj.snapshots[k].vehicles) {
      if (auto cell = domain.cell_of(veh.position)) {
        f.count(k, *cell - 1) += 1;
        speed_sum[*cell - 1] += veh.speed;
      }
    }
    for (int i = 0; i < n; ++i) {
      const int c = f.count(k, i);
      if (c == 0) continue;
      const double rho = c / domain.dh;
      const double v = speed_sum[i] / c;
      f.rho(k, i) = rho;
      f.v(k, i) = v;
      f.psi(k, i) = rho * (v + arz::pressure(rho, p));
    }
  }
  return f;
}

arz::BoundaryInput extract_boundary_input(const micro::Trajectories& traj, const arz::ModelParams& p, int k) {
  if (k < 0 || k >= traj.n_samples()) throw std::out_of_range("extract_boundary_input: step outside trajectories");
  const auto& spec = traj.spec;
  const double t = traj.snapshots[k].t;
  const double window = std::min(kDemandWindow, t);

  int crossings = 0;
  double speed_sum = 0.0;
  for (const auto& c : traj.domain_entries) {
    if (c.t > t) break;
    if (c.t > t - window) {
      ++crossings;
      speed_sum += c.speed;
    }
  }

  int n_up = 0;
  int n_down = 0;
  double up_speed_sum = 0.0;
  for (const auto& v : traj.snapshots[k].vehicles) {
    if (v.position < spec.domain_start()) {
      ++n_up;
      up_speed_sum += v.speed;
    } else if (v.position >= spec.domain_end()) {
      ++n_down;
    }
  }
  const double rho_up = spec.buffer_length > 0.0 ? n_up / spec.buffer_length : 0.0;

  arz::BoundaryInput u;
  u.demand_up = window > 0.0 ? crossings / window : 0.0;
  double entering_speed = p.v_free;
  if (crossings > 0) {
    entering_speed = speed_sum / crossings;
  } else if (n_up > 0) {
    entering_speed = up_speed_sum / n_up;
  }
  u.chi_up = entering_speed + arz::pressure(rho_up, p);
  const double rho_down = spec.buffer_length > 0.0 ? n_down / spec.buffer_length : 0.0;
  u.rho_down = std::clamp(rho_down, 0.0, p.rho_max);
  return u;
}

}  // namespace dtse::truth
