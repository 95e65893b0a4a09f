#pragma once

#include <Eigen/Dense>

namespace dtse::arz {

/// Guard for the relative-flux division psi / rho at empty cells [veh/m].
inline constexpr double kRhoEpsilon = 1e-9;

/// Calibrated ARZ constants plus the space-time grid. All SI.
struct ModelParams {
  double v_free = 0.0;   // free-flow speed [m/s]
  double rho_max = 0.0;  // jam density [veh/m]
  double gamma = 0.0;    // fundamental-diagram exponent
  double tau = 0.0;      // relaxation time [s]
  int n_cells = 0;
  double dt = 0.0;  // [s]
  double dh = 0.0;  // [m]

  /// v_f = 100 km/h, rho_m = 250 veh/km, gamma = 1.25, tau = 1 s,
  /// 25 cells of 100 m, dt = 1 s.
  static ModelParams defaults();

  double cfl_ratio() const { return v_free * dt / dh; }
  double psi_max() const { return v_free * rho_max; }
  // Upper clamp on psi / rho; critical_density(chi_max()) == rho_max.
  double chi_max() const { return v_free * (1.0 + gamma); }
  int state_dim() const { return 2 * n_cells; }

  /// Throws std::invalid_argument naming the offending field, or reporting
  /// the CFL ratio when v_f*dt/dh >= 1.
  void validate() const;
};

struct CellState {
  double rho = 0.0;  // [veh/m]
  double psi = 0.0;  // relative flow [veh/s]
};

/// Flat 2N state; cell i (0-based) occupies components 2i (rho) and 2i+1 (psi).
class TrafficState {
 public:
  TrafficState() = default;
  explicit TrafficState(int n_cells);
  explicit TrafficState(Eigen::VectorXd flat);

  static TrafficState uniform(int n_cells, CellState cell);

  int n_cells() const { return static_cast<int>(x_.size() / 2); }
  CellState cell(int i) const { return {x_[2 * i], x_[2 * i + 1]}; }
  void set_cell(int i, CellState c) {
    x_[2 * i] = c.rho;
    x_[2 * i + 1] = c.psi;
  }
  double rho(int i) const { return x_[2 * i]; }
  double psi(int i) const { return x_[2 * i + 1]; }

  const Eigen::VectorXd& vector() const { return x_; }
  Eigen::VectorXd& vector() { return x_; }

  bool all_finite() const { return x_.allFinite(); }

 private:
  Eigen::VectorXd x_;
};

/// Boundary conditions u_k.
struct BoundaryInput {
  double demand_up = 0.0;  // upstream demand [veh/s]
  double chi_up = 0.0;     // upstream driver characteristic [m/s]
  double rho_down = 0.0;   // downstream density [veh/m]
};

struct Linearization {
  Eigen::MatrixXd lambda;  // A + G J
  Eigen::VectorXd eta;     // G (f(x) - J x)
};

struct InterfaceFlux {
  double q = 0.0;    // vehicle flux [veh/s]
  double phi = 0.0;  // relative-flow flux
};

// Constitutive functions. Throw std::domain_error outside their domain.
double pressure(double rho, const ModelParams& p);
double equilibrium_velocity(double rho, const ModelParams& p);
double critical_density(double chi, const ModelParams& p);

/// chi = psi / max(rho, eps), with negative psi treated as zero, capped at
/// chi_max().
double driver_characteristic(CellState cell, const ModelParams& p);

double demand(CellState cell, const ModelParams& p);
double supply(CellState cell, double chi_upstream, const ModelParams& p);
InterfaceFlux interface_flux(CellState up, CellState down, const ModelParams& p);

/// Net flows f(x, u): pair i is (q_{i-1} - q_i, phi_{i-1} - phi_i).
Eigen::VectorXd flux_vector(const TrafficState& x, const BoundaryInput& u, const ModelParams& p);

/// Block-diagonal A with blocks [[1, 0], [v_f/tau, 1 - 1/tau]].
Eigen::MatrixXd transition_matrix(const ModelParams& p);

/// x_{k+1} = A x + (dt/dh) f(x, u) [+ noise]. No projection is applied.
TrafficState step(const TrafficState& x, const BoundaryInput& u, const ModelParams& p);
TrafficState step(const TrafficState& x, const BoundaryInput& u, const ModelParams& p,
                  const Eigen::VectorXd& noise);

/// Analytic df/dx. Block-tridiagonal; at branch thresholds the derivative of
/// the branch that evaluation selects is used.
Eigen::MatrixXd jacobian_flux(const TrafficState& x, const BoundaryInput& u, const ModelParams& p);

/// Lambda = A + G J, eta = G (f - J x_hat); Lambda x_hat + eta reproduces step().
Linearization linearize(const TrafficState& x_hat, const BoundaryInput& u, const ModelParams& p);

}  // namespace dtse::arz
