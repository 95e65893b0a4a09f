#include "dtse/sensing.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace dtse::sensing {

const char* to_string(SensorKind k) { return k == SensorKind::Rsu ? "RSU" : "CV"; }

std::string SensorId::str() const {
  return (kind == SensorKind::Rsu ? "rsu" : "cv") + std::to_string(index);
}

Eigen::MatrixXd measurement_matrix(int cell, int n_cells) {
  if (cell < 1 || cell > n_cells) throw std::out_of_range("measurement_matrix: cell " + std::to_string(cell) + " outside 1.." + std::to_string(n_cells));
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2, 2 * n_cells);
  c(0, 2 * (cell - 1)) = 1.0;
  c(1, 2 * (cell - 1) + 1) = 1.0;
  return c;
}

std::optional<int> occupied_cell(double position, const Domain& domain) { return domain.cell_of(position); }

std::optional<Measurement> make_measurement(const truth::GroundTruthFields& fields, const SensorNode& sensor,
                                            std::optional<int> cell, int k, const arz::ModelParams& p, Rng& rng) {
  if (!cell) return std::nullopt;
  if (*cell < 1 || *cell > fields.n_cells()) throw std::out_of_range("make_measurement: cell outside domain");

  Measurement m;
  m.cell = *cell;
  m.sensor = sensor.id;
  m.k = k;
  m.y << fields.rho(k, *cell - 1), fields.psi(k, *cell - 1);

  if (!sensor.noise_cov.isZero(0.0)) {
    Eigen::LLT<Eigen::Matrix2d> llt(sensor.noise_cov);
    if (llt.info() != Eigen::Success) throw std::invalid_argument("make_measurement: R is not positive definite");
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::Vector2d z;
    z[0] = normal(rng);
    z[1] = normal(rng);
    m.y += llt.matrixL() * z;
  }
  m.y[0] = std::clamp(m.y[0], 0.0, p.rho_max);
  m.y[1] = std::clamp(m.y[1], 0.0, p.psi_max());
  return m;
}

}  // namespace dtse::sensing
