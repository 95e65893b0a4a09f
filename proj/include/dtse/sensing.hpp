#pragma once

#include <compare>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "dtse/arz.hpp"
#include "dtse/domain.hpp"
#include "dtse/ground_truth.hpp"
#include "dtse/rng.hpp"

namespace dtse::sensing {

enum class SensorKind { Rsu, Cv };

const char* to_string(SensorKind k);

/// RSUs are numbered 1..n along the road; a CV carries its vehicle id.
/// RSUs order before CVs.
struct SensorId {
  SensorKind kind = SensorKind::Rsu;
  int index = 0;

  auto operator<=>(const SensorId&) const = default;
  std::string str() const;
};

struct SensorNode {
  SensorId id;
  /// Road coordinate for RSUs; unused for CVs, whose position comes from
  /// their trajectory.
  double fixed_position = 0.0;
  Eigen::Matrix2d noise_cov = Eigen::Matrix2d::Zero();  // R [SI]
};

struct Measurement {
  Eigen::Vector2d y = Eigen::Vector2d::Zero();  // (rho, psi) [SI]
  int cell = 1;                                 // 1-based
  SensorId sensor;
  int k = 0;
};

/// e_cell^T (x) I_2: a 2 x 2N selector for the (rho, psi) pair of `cell`
/// (1-based). Throws std::out_of_range for cells outside 1..n_cells.
Eigen::MatrixXd measurement_matrix(int cell, int n_cells);

/// 1-based cell holding `position`, or nullopt outside the domain.
std::optional<int> occupied_cell(double position, const Domain& domain);

/// Ground truth of `cell` at step k plus N(0, R) noise, clamped to
/// [0, rho_m] x [0, v_f rho_m]. Returns nullopt when the sensor has no cell.
std::optional<Measurement> make_measurement(const truth::GroundTruthFields& fields, const SensorNode& sensor,
                                            std::optional<int> cell, int k, const arz::ModelParams& p, Rng& rng);

}  // namespace dtse::sensing
