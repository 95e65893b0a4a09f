#pragma once

#include <Eigen/Dense>

#include "dtse/arz.hpp"
#include "dtse/domain.hpp"
#include "dtse/microsim.hpp"

namespace dtse::truth {

/// Macroscopic fields sampled once per time step. Row k is time k * dt,
/// column i is domain cell i + 1. SI units.
struct GroundTruthFields {
  double dt = 1.0;
  Eigen::MatrixXd rho;  // both lanes combined [veh/m]
  Eigen::MatrixXd v;    // mean occupant speed, v_f when empty [m/s]
  Eigen::MatrixXd psi;  // rho (v + p(rho)) [veh/s]
  Eigen::MatrixXi count;

  int n_steps() const { return static_cast<int>(rho.rows()); }
  int n_cells() const { return static_cast<int>(rho.cols()); }
  arz::TrafficState state_at(int k) const;
};

GroundTruthFields aggregate(const micro::Trajectories& traj, const arz::ModelParams& p, const Domain& domain);

/// Trailing window used to turn upstream crossings into a demand rate.
inline constexpr double kDemandWindow = 10.0;  // [s]

/// u_k from the buffers: demand from crossings of the domain's upstream edge
/// over the trailing window, chi from the mean entering speed plus the
/// pressure of the upstream buffer, rho_down from the downstream buffer.
arz::BoundaryInput extract_boundary_input(const micro::Trajectories& traj, const arz::ModelParams& p, int k);

}  // namespace dtse::truth
