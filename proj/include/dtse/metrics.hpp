#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace dtse::metrics {

// One matrix per trial: row k is the per-cell vector z_k of one state
// variable, so the norm in both metrics is taken over a row.

/// sqrt( 1/(trials*steps) * sum_j sum_k ||z_kj - zhat_kj||^2 ).
/// Throws std::invalid_argument on any shape mismatch.
double rmse(std::span<const Eigen::MatrixXd> truth, std::span<const Eigen::MatrixXd> estimate);
double rmse(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate);

/// 100/(trials*steps) * sum 2||z - zhat|| / (||z|| + ||zhat||), with 0/0 := 0.
/// Bounded in [0, 200].
double smape(std::span<const Eigen::MatrixXd> truth, std::span<const Eigen::MatrixXd> estimate);
double smape(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate);

/// Box-plot summary with Tukey whiskers (most extreme samples within 1.5 IQR
/// of the quartiles). Quantiles interpolate linearly between order
/// statistics.
struct BoxStats {
  double whisker_low = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double whisker_high = 0.0;

  double iqr() const { return q3 - q1; }
};

double quantile(std::vector<double> samples, double q);
BoxStats box_stats(const std::vector<double>& samples);

}  // namespace dtse::metrics
