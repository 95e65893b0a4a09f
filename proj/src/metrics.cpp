#include "dtse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dtse::metrics {

namespace {

void check_shapes(std::span<const Eigen::MatrixXd> truth, std::span<const Eigen::MatrixXd> estimate) {
  if (truth.size() != estimate.size()) throw std::invalid_argument("metric: trial count mismatch");
  if (truth.empty()) throw std::invalid_argument("metric: no trials");
  for (std::size_t j = 0; j < truth.size(); ++j) {
    if (truth[j].rows() != estimate[j].rows() || truth[j].cols() != estimate[j].cols()) {
      throw std::invalid_argument("metric: shape mismatch in trial " + std::to_string(j));
    }
    if (truth[j].rows() != truth[0].rows()) throw std::invalid_argument("metric: trials cover different step counts");
  }
  if (truth[0].rows() == 0) throw std::invalid_argument("metric: no time steps");
}

}  // namespace

double rmse(std::span<const Eigen::MatrixXd> truth, std::span<const Eigen::MatrixXd> estimate) {
  check_shapes(truth, estimate);
  double sum = 0.0;
  for (std::size_t j = 0; j < truth.size(); ++j) sum += (truth[j] - estimate[j]).squaredNorm();
  return std::sqrt(sum / static_cast<double>(truth.size() * truth[0].rows()));
}

double rmse(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate) {
  return rmse(std::span<const Eigen::MatrixXd>(&truth, 1), std::span<const Eigen::MatrixXd>(&estimate, 1));
}

double smape(std::span<const Eigen::MatrixXd> truth, std::span<const Eigen::MatrixXd> estimate) {
  check_shapes(truth, estimate);
  double sum = 0.0;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    for (Eigen::Index k = 0; k < truth[j].rows(); ++k) {
      const double num = 2.0 * (truth[j].row(k) - estimate[j].row(k)).norm();
      const double den = truth[j].row(k).norm() + estimate[j].row(k).norm();
      if (den > 0.0) sum += num / den;
    }
  }
  return 100.0 * sum / static_cast<double>(truth.size() * truth[0].rows());
}

double smape(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate) {
  return smape(std::span<const Eigen::MatrixXd>(&truth, 1), std::span<const Eigen::MatrixXd>(&estimate, 1));
}

double quantile(std::vector<double> samples, double q) {
  if (samples.empty()) throw std::invalid_argument("quantile of empty sample");
  std::sort(samples.begin(), samples.end());
  const double pos = q * static_cast<double>(samples.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, samples.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return samples[lo] + frac * (samples[hi] - samples[lo]);
}

BoxStats box_stats(const std::vector<double>& samples) {
  BoxStats b;
  b.q1 = quantile(samples, 0.25);
  b.median = quantile(samples, 0.5);
  b.q3 = quantile(samples, 0.75);
  const double lo_fence = b.q1 - 1.5 * b.iqr();
  const double hi_fence = b.q3 + 1.5 * b.iqr();
  b.whisker_low = b.q1;
  b.whisker_high = b.q3;
  for (double s : samples) {
    if (s >= lo_fence) b.whisker_low = std::min(b.whisker_low, s);
    if (s <= hi_fence) b.whisker_high = std::max(b.whisker_high, s);
  }
  return b;
}

}  // namespace dtse::metrics
