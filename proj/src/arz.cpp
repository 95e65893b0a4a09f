#include "dtse/arz.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dtse/units.hpp"

namespace dtse::arz {

ModelParams ModelParams::defaults() {
  ModelParams p;
  p.v_free = units::kmh_to_mps(100.0);
  p.rho_max = units::vehkm_to_vehm(250.0);
  p.gamma = 1.25;
  p.tau = 1.0;
  p.n_cells = 25;
  p.dt = 1.0;
  p.dh = 100.0;
  return p;
}

void ModelParams::validate() const {
  auto require_positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string(name) + " must be strictly positive");
    }
  };
  require_positive(v_free, "v_f");
  require_positive(rho_max, "rho_m");
  require_positive(gamma, "gamma");
  require_positive(tau, "tau");
  require_positive(dt, "dt");
  require_positive(dh, "dh");
  if (n_cells < 1) throw std::invalid_argument("n_cells must be at least 1");
  if (cfl_ratio() >= 1.0) {
    std::ostringstream msg;
    msg << "CFL condition violated: v_f*dt/dh = " << cfl_ratio() << " >= 1";
    throw std::invalid_argument(msg.str());
  }
}

TrafficState::TrafficState(int n_cells) : x_(Eigen::VectorXd::Zero(2 * n_cells)) {}

TrafficState::TrafficState(Eigen::VectorXd flat) : x_(std::move(flat)) {
  if (x_.size() % 2 != 0) throw std::invalid_argument("TrafficState needs an even-length vector");
}

TrafficState TrafficState::uniform(int n_cells, CellState cell) {
  TrafficState s(n_cells);
  for (int i = 0; i < n_cells; ++i) s.set_cell(i, cell);
  return s;
}

double pressure(double rho, const ModelParams& p) {
  if (rho < 0.0) throw std::domain_error("pressure: negative density");
  return p.v_free * std::pow(rho / p.rho_max, p.gamma);
}

double equilibrium_velocity(double rho, const ModelParams& p) {
  if (rho < 0.0 || rho > p.rho_max) throw std::domain_error("equilibrium_velocity: density outside [0, rho_m]");
  return p.v_free * (1.0 - std::pow(rho / p.rho_max, p.gamma));
}

double critical_density(double chi, const ModelParams& p) {
  if (chi < 0.0) throw std::domain_error("critical_density: negative driver characteristic");
  return p.rho_max * std::pow(chi / (p.v_free * (1.0 + p.gamma)), 1.0 / p.gamma);
}

namespace {

// Value plus first derivatives with respect to a density and a driver
// characteristic.
struct Branch {
  double value = 0.0;
  double d_rho = 0.0;
  double d_chi = 0.0;
};

// chi and its partials with respect to (rho, psi) of the same cell.
struct Characteristic {
  double chi = 0.0;
  double d_rho = 0.0;
  double d_psi = 0.0;
};

// Near-empty cells with leftover psi would otherwise produce an unbounded chi.
Characteristic characteristic_of(CellState c, const ModelParams& p) {
  const double rho_c = std::max(c.rho, kRhoEpsilon);
  const double psi_c = std::max(c.psi, 0.0);
  Characteristic out;
  out.chi = psi_c / rho_c;
  if (out.chi > p.chi_max()) {
    out.chi = p.chi_max();
    return out;
  }
  out.d_psi = c.psi >= 0.0 ? 1.0 / rho_c : 0.0;
  out.d_rho = c.rho > kRhoEpsilon ? -psi_c / (c.rho * c.rho) : 0.0;
  return out;
}

Branch clamp_nonnegative(Branch b) {
  if (b.value < 0.0) return {};
  return b;
}

// Flow at the critical density, sigma(chi) (chi - p(sigma(chi))).
// d/dchi of this expression simplifies to sigma(chi).
Branch capacity_branch(double chi, const ModelParams& p) {
  const double s = critical_density(chi, p);
  return {s * (chi - pressure(s, p)), 0.0, s};
}

// rho (chi - p(rho)); since rho p'(rho) = gamma p(rho) the density
// derivative is chi - (1 + gamma) p(rho).
Branch density_branch(double rho, double chi, const ModelParams& p) {
  const double pr = pressure(rho, p);
  return {rho * (chi - pr), chi - (1.0 + p.gamma) * pr, rho};
}

Branch demand_branch(double rho, double chi, const ModelParams& p) {
  const double r = std::max(rho, 0.0);
  Branch b = r <= critical_density(chi, p) ? density_branch(r, chi, p) : capacity_branch(chi, p);
  if (rho < 0.0) b.d_rho = 0.0;
  return clamp_nonnegative(b);
}

Branch supply_branch(double rho, double chi_up, const ModelParams& p) {
  const double r = std::max(rho, 0.0);
  Branch b = r <= critical_density(chi_up, p) ? capacity_branch(chi_up, p) : density_branch(r, chi_up, p);
  if (rho < 0.0) b.d_rho = 0.0;
  return clamp_nonnegative(b);
}

// Flux across one interface together with its partials. "up" derivatives
// are with respect to the upstream cell's (rho, psi), "down" with respect to
// the downstream cell's rho.
struct FluxWithPartials {
  double q = 0.0, phi = 0.0;
  double dq_rho_up = 0.0, dq_psi_up = 0.0, dq_rho_down = 0.0;
  double dphi_rho_up = 0.0, dphi_psi_up = 0.0, dphi_rho_down = 0.0;
};

FluxWithPartials cell_interface(CellState up, double rho_down, const ModelParams& p) {
  const Characteristic c = characteristic_of(up, p);
  const Branch d = demand_branch(up.rho, c.chi, p);
  const Branch s = supply_branch(rho_down, c.chi, p);

  FluxWithPartials f;
  if (d.value <= s.value) {
    f.q = d.value;
    f.dq_rho_up = d.d_rho + d.d_chi * c.d_rho;
    f.dq_psi_up = d.d_chi * c.d_psi;
  } else {
    f.q = s.value;
    f.dq_rho_up = s.d_chi * c.d_rho;
    f.dq_psi_up = s.d_chi * c.d_psi;
    f.dq_rho_down = s.d_rho;
  }
  f.phi = f.q * c.chi;
  f.dphi_rho_up = c.chi * f.dq_rho_up + f.q * c.d_rho;
  f.dphi_psi_up = c.chi * f.dq_psi_up + f.q * c.d_psi;
  f.dphi_rho_down = c.chi * f.dq_rho_down;
  return f;
}

FluxWithPartials upstream_boundary(const BoundaryInput& u, CellState first, const ModelParams& p) {
  const double chi_in = std::clamp(u.chi_up, 0.0, p.chi_max());
  const double d = std::max(u.demand_up, 0.0);
  const Branch s = supply_branch(first.rho, chi_in, p);
  FluxWithPartials f;
  if (d <= s.value) {
    f.q = d;
  } else {
    f.q = s.value;
    f.dq_rho_down = s.d_rho;
  }
  f.phi = f.q * chi_in;
  f.dphi_rho_down = chi_in * f.dq_rho_down;
  return f;
}

// All N+1 interface fluxes: index 0 is the upstream boundary, N the
// downstream boundary.
std::vector<FluxWithPartials> all_interfaces(const TrafficState& x, const BoundaryInput& u, const ModelParams& p) {
  const int n = x.n_cells();
  std::vector<FluxWithPartials> fl(static_cast<std::size_t>(n) + 1);
  fl[0] = upstream_boundary(u, x.cell(0), p);
  for (int m = 1; m < n; ++m) fl[m] = cell_interface(x.cell(m - 1), x.rho(m), p);
  FluxWithPartials last = cell_interface(x.cell(n - 1), u.rho_down, p);
  last.dq_rho_down = 0.0;
  last.dphi_rho_down = 0.0;
  fl[n] = last;
  return fl;
}

}  // namespace

double driver_characteristic(CellState cell, const ModelParams& p) { return characteristic_of(cell, p).chi; }

double demand(CellState cell, const ModelParams& p) {
  return demand_branch(cell.rho, driver_characteristic(cell, p), p).value;
}

double supply(CellState cell, double chi_upstream, const ModelParams& p) {
  if (chi_upstream < 0.0) throw std::domain_error("supply: negative upstream driver characteristic");
  return supply_branch(cell.rho, chi_upstream, p).value;
}

InterfaceFlux interface_flux(CellState up, CellState down, const ModelParams& p) {
  const FluxWithPartials f = cell_interface(up, down.rho, p);
  return {f.q, f.phi};
}

Eigen::VectorXd flux_vector(const TrafficState& x, const BoundaryInput& u, const ModelParams& p) {
  const int n = x.n_cells();
  const auto fl = all_interfaces(x, u, p);
  Eigen::VectorXd f(2 * n);
  for (int i = 0; i < n; ++i) {
    f[2 * i] = fl[i].q - fl[i + 1].q;
    f[2 * i + 1] = fl[i].phi - fl[i + 1].phi;
  }
  return f;
}

Eigen::MatrixXd transition_matrix(const ModelParams& p) {
  const int dim = p.state_dim();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < p.n_cells; ++i) {
    a(2 * i, 2 * i) = 1.0;
    a(2 * i + 1, 2 * i) = p.v_free / p.tau;
    a(2 * i + 1, 2 * i + 1) = 1.0 - 1.0 / p.tau;
  }
  return a;
}

namespace {

// A x without forming A.
Eigen::VectorXd apply_transition(const Eigen::VectorXd& x, const ModelParams& p) {
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size() / 2; ++i) {
    out[2 * i] = x[2 * i];
    out[2 * i + 1] = (p.v_free / p.tau) * x[2 * i] + (1.0 - 1.0 / p.tau) * x[2 * i + 1];
  }
  return out;
}

}  // namespace

TrafficState step(const TrafficState& x, const BoundaryInput& u, const ModelParams& p) {
  const double g = p.dt / p.dh;
  return TrafficState(apply_transition(x.vector(), p) + g * flux_vector(x, u, p));
}

TrafficState step(const TrafficState& x, const BoundaryInput& u, const ModelParams& p, const Eigen::VectorXd& noise) {
  if (noise.size() != x.vector().size()) throw std::invalid_argument("step: noise dimension mismatch");
  TrafficState next = step(x, u, p);
  next.vector() += noise;
  return next;
}

Eigen::MatrixXd jacobian_flux(const TrafficState& x, const BoundaryInput& u, const ModelParams& p) {
  const int n = x.n_cells();
  const auto fl = all_interfaces(x, u, p);
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * n, 2 * n);

  // Interface m carries flux from cell m-1 into cell m: it enters the rows of
  // cell m with a plus sign and the rows of cell m-1 with a minus sign.
  auto scatter = [&](int m, int row_cell, double sign) {
    if (row_cell < 0 || row_cell >= n) return;
    const FluxWithPartials& f = fl[m];
    const int rq = 2 * row_cell;
    const int rp = rq + 1;
    if (m >= 1) {
      const int up = m - 1;
      j(rq, 2 * up) += sign * f.dq_rho_up;
      j(rq, 2 * up + 1) += sign * f.dq_psi_up;
      j(rp, 2 * up) += sign * f.dphi_rho_up;
      j(rp, 2 * up + 1) += sign * f.dphi_psi_up;
    }
    if (m < n) {
      j(rq, 2 * m) += sign * f.dq_rho_down;
      j(rp, 2 * m) += sign * f.dphi_rho_down;
    }
  };
  for (int m = 0; m <= n; ++m) {
    scatter(m, m, +1.0);
    scatter(m, m - 1, -1.0);
  }
  return j;
}

Linearization linearize(const TrafficState& x_hat, const BoundaryInput& u, const ModelParams& p) {
  const double g = p.dt / p.dh;
  const Eigen::MatrixXd jac = jacobian_flux(x_hat, u, p);
  const Eigen::VectorXd f = flux_vector(x_hat, u, p);
  Linearization lin;
  lin.lambda = transition_matrix(p) + g * jac;
  lin.eta = g * (f - jac * x_hat.vector());
  return lin;
}

}  // namespace dtse::arz
