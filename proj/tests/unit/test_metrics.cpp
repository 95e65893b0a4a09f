#include <cmath>
#include <random>

#include "doctest.h"
#include "dtse/metrics.hpp"

using namespace dtse;

TEST_CASE("rmse") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 200.0);
  Eigen::MatrixXd truth(30, 25);
  for (Eigen::Index i = 0; i < truth.size(); ++i) truth.data()[i] = u(rng);

  SUBCASE("exact estimate") { CHECK(metrics::rmse(truth, truth) == 0.0); }
  SUBCASE("constant offset gives c sqrt(N) per variable") {
    const double c = 3.5;
    const Eigen::MatrixXd est = truth.array() + c;
    CHECK(metrics::rmse(truth, est) == doctest::Approx(c * std::sqrt(25.0)).epsilon(1e-12));
  }
  SUBCASE("single step reduces to the vector norm") {
    const Eigen::MatrixXd a = truth.topRows(1);
    const Eigen::MatrixXd b = a.array() * 0.9;
    CHECK(metrics::rmse(a, b) == doctest::Approx((a - b).norm()).epsilon(1e-12));
  }
  SUBCASE("brute force over trials") {
    std::vector<Eigen::MatrixXd> ts, es;
    for (int j = 0; j < 3; ++j) {
      ts.push_back(truth.array() * (1.0 + j));
      es.push_back(truth.array() * (1.1 + j) - 2.0);
    }
    double sum = 0.0;
    for (int j = 0; j < 3; ++j)
      for (Eigen::Index k = 0; k < truth.rows(); ++k) {
        double sq = 0.0;
        for (Eigen::Index i = 0; i < truth.cols(); ++i) sq += std::pow(ts[j](k, i) - es[j](k, i), 2);
        sum += sq;
      }
    CHECK(metrics::rmse(ts, es) == doctest::Approx(std::sqrt(sum / (3.0 * truth.rows()))).epsilon(1e-12));
  }
  SUBCASE("shape mismatch") { CHECK_THROWS_AS(metrics::rmse(truth, truth.leftCols(3)), std::invalid_argument); }
}

TEST_CASE("smape") {
  Eigen::MatrixXd truth = Eigen::MatrixXd::Constant(4, 5, 50.0);
  CHECK(metrics::smape(truth, truth) == 0.0);
  CHECK(metrics::smape(truth, Eigen::MatrixXd::Zero(4, 5)) == doctest::Approx(200.0));
  CHECK(metrics::smape(Eigen::MatrixXd::Zero(4, 5), Eigen::MatrixXd::Zero(4, 5)) == 0.0);
  CHECK_THROWS_AS(metrics::smape(truth, Eigen::MatrixXd::Zero(5, 4)), std::invalid_argument);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  std::vector<Eigen::MatrixXd> ts(2, Eigen::MatrixXd(6, 7)), es(2, Eigen::MatrixXd(6, 7));
  for (int j = 0; j < 2; ++j)
    for (Eigen::Index i = 0; i < ts[j].size(); ++i) {
      ts[j].data()[i] = u(rng);
      es[j].data()[i] = u(rng);
    }
  double sum = 0.0;
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 6; ++k) {
      double d = 0.0, a = 0.0, b = 0.0;
      for (int i = 0; i < 7; ++i) {
        d += std::pow(ts[j](k, i) - es[j](k, i), 2);
        a += ts[j](k, i) * ts[j](k, i);
        b += es[j](k, i) * es[j](k, i);
      }
      sum += 2.0 * std::sqrt(d) / (std::sqrt(a) + std::sqrt(b));
    }
  const double s = metrics::smape(ts, es);
  CHECK(s == doctest::Approx(100.0 * sum / 12.0).epsilon(1e-12));
  CHECK(s >= 0.0);
  CHECK(s <= 200.0);
}

TEST_CASE("quantiles and box statistics") {
  const std::vector<double> xs{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK(metrics::quantile(xs, 0.5) == doctest::Approx(5.5));
  CHECK(metrics::quantile(xs, 0.25) == doctest::Approx(3.25));
  CHECK(metrics::quantile(xs, 0.0) == 1.0);
  CHECK(metrics::quantile(xs, 1.0) == 10.0);

  std::vector<double> with_outlier = xs;
  with_outlier.push_back(100.0);
  const metrics::BoxStats b = metrics::box_stats(with_outlier);
  CHECK(b.median == 6.0);
  CHECK(b.q1 == doctest::Approx(3.5));
  CHECK(b.q3 == doctest::Approx(8.5));
  CHECK(b.whisker_low == 1.0);
  CHECK(b.whisker_high == 10.0);
  CHECK(b.iqr() == doctest::Approx(5.0));

  const metrics::BoxStats one = metrics::box_stats({4.0});
  CHECK(one.median == 4.0);
  CHECK(one.iqr() == 0.0);
}
