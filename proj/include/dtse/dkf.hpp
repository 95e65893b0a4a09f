#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "dtse/arz.hpp"
#include "dtse/sensing.hpp"

namespace dtse::dkf {

/// Information vector xi = Xi x and information matrix Xi = P^{-1}.
struct InfoPair {
  Eigen::VectorXd xi;
  Eigen::MatrixXd Xi;
};

/// A factorization or solve failed. Carries the node and time step when the
/// failure happened inside a network step.
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& what, std::string node = {}, int step = -1);

  const std::string& reason() const { return reason_; }
  const std::string& node() const { return node_; }
  int step() const { return step_; }

 private:
  std::string reason_;
  std::string node_;
  int step_;
};

/// Process noise Q with its inverse cached; diagonal Q is inverted
/// elementwise.
class ProcessNoise {
 public:
  explicit ProcessNoise(Eigen::MatrixXd q);

  /// I_N (x) diag(var_rho, var_psi).
  static ProcessNoise cell_diagonal(int n_cells, double var_rho, double var_psi);

  const Eigen::MatrixXd& covariance() const { return q_; }
  const Eigen::MatrixXd& inverse() const { return q_inv_; }
  bool is_diagonal() const { return diagonal_; }

 private:
  Eigen::MatrixXd q_;
  Eigen::MatrixXd q_inv_;
  bool diagonal_ = false;
};

struct NodeFilter {
  sensing::SensorId id;
  InfoPair info;           // prior for the coming step
  arz::TrafficState x_hat;  // projected estimate; always inside the box
};

void symmetrize(Eigen::MatrixXd& m);

/// x_hat = x0, Xi = P0^{-1}, xi = Xi x0. Throws NumericalFailure when P0 is
/// not symmetric positive definite.
NodeFilter init_node(sensing::SensorId id, const arz::TrafficState& x0, const Eigen::MatrixXd& p0);

/// xi += C^T R^{-1} y, Xi += C^T R^{-1} C.
void local_update(InfoPair& info, const Eigen::Vector2d& y, const Eigen::MatrixXd& c, const Eigen::Matrix2d& r);

/// Same update exploiting that C selects a single cell block.
void local_update(InfoPair& info, const sensing::Measurement& m, const Eigen::Matrix2d& r);

/// Xi^{-1} xi via Cholesky.
Eigen::VectorXd recover_state(const InfoPair& info);

/// Information-form prediction through the linearized model using the
/// matrix inversion lemma:
///   M = (Xi_bar + L^T Q^-1 L)^-1
///   Xi' = Q^-1 - Q^-1 L M L^T Q^-1
///   xi' = Xi' (L Xi_bar^-1 xi_bar + eta)
InfoPair predict(const InfoPair& fused, const arz::Linearization& lin, const ProcessNoise& q);

/// Per-cell clamp of rho to [0, rho_m] and psi to [0, v_f rho_m].
arz::TrafficState project(const arz::TrafficState& x, const arz::ModelParams& p);

/// x_hat = project(Xi^{-1} xi) and xi = Xi x_hat. Xi is left untouched.
void finalize_constraint(NodeFilter& node, const arz::ModelParams& p);

}  // namespace dtse::dkf
