#include <algorithm>
#include <cmath>
#include <map>

#include "doctest.h"
#include "dtse/ground_truth.hpp"
#include "dtse/microsim.hpp"
#include "dtse/units.hpp"

using namespace dtse;

namespace {

micro::Vehicle car(int id, double pos, double speed) {
  micro::Vehicle v;
  v.id = id;
  v.position = pos;
  v.speed = speed;
  return v;
}

const micro::Trajectories& default_run() {
  static const micro::Trajectories t = [] {
    micro::ScenarioSpec s = micro::ScenarioSpec::defaults();
    s.seed = 20250701;
    return micro::run_microsim(s);
  }();
  return t;
}

}  // namespace

TEST_CASE("Poisson arrivals") {
  Rng rng = make_rng(8, {stream::kArrivals});
  const auto times = micro::spawn_arrivals(1.0, 1200.0, rng);
  CHECK(std::is_sorted(times.begin(), times.end()));
  CHECK(times.back() < 1200.0);
  CHECK(std::abs(static_cast<double>(times.size()) - 1200.0) < 3.0 * std::sqrt(1200.0));
  CHECK(micro::spawn_arrivals(1.0, 0.0, rng).empty());
  CHECK_THROWS_AS(micro::spawn_arrivals(0.0, 10.0, rng), std::invalid_argument);
}

TEST_CASE("lone vehicle accelerates to the limit and never exceeds it") {
  const micro::SpeedLimitProfile limits(27.0);
  micro::KraussParams kp;
  kp.sigma = 0.0;
  Rng rng(1);
  std::vector<micro::Vehicle> vs{car(0, 0.0, 0.0)};
  for (int s = 0; s < 100; ++s) {
    vs = micro::krauss_step(vs, limits, 0.5 * s, 0.5, kp, rng);
    CHECK(vs[0].speed <= 27.0);
  }
  CHECK(vs[0].speed == doctest::Approx(27.0));
}

TEST_CASE("follower stops behind a stopped leader") {
  const micro::SpeedLimitProfile limits(30.0);
  micro::KraussParams kp;
  Rng rng(2);
  std::vector<micro::Vehicle> vs{car(0, 200.0, 0.0), car(1, 0.0, 25.0)};
  for (int s = 0; s < 200; ++s) {
    vs = micro::krauss_step(vs, limits, 0.5 * s, 0.5, kp, rng);
    vs[0] = car(0, 200.0, 0.0);  // pinned obstacle
    const double gap = vs[0].position - vs[0].length - vs[1].position;
    REQUIRE(gap >= kp.min_gap - 1e-9);
  }
  CHECK(vs[1].position > 150.0);
  CHECK(vs[1].speed == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("drivers brake ahead of a lower limit") {
  micro::SpeedLimitProfile limits(30.0);
  limits.add_zone({500.0, 600.0, 3.0, 0.0, 100.0});
  CHECK(limits.limit_at(550.0, 10.0) == 3.0);
  CHECK(limits.limit_at(550.0, 100.0) == 30.0);
  CHECK(limits.limit_at(450.0, 10.0) == 30.0);
  CHECK(limits.approach_limit(450.0, 10.0, 4.5) == doctest::Approx(std::sqrt(9.0 + 2.0 * 4.5 * 50.0)));
  CHECK(limits.approach_limit(650.0, 10.0, 4.5) == 30.0);
}

TEST_CASE("same seed, same trajectories") {
  micro::ScenarioSpec s = micro::ScenarioSpec::defaults();
  s.duration = 200.0;
  s.bottleneck.reset();
  s.seed = 5;
  const auto a = micro::run_microsim(s);
  const auto b = micro::run_microsim(s);
  REQUIRE(a.n_samples() == b.n_samples());
  for (int k = 0; k < a.n_samples(); ++k) {
    REQUIRE(a.snapshots[k].vehicles.size() == b.snapshots[k].vehicles.size());
    for (std::size_t i = 0; i < a.snapshots[k].vehicles.size(); ++i) {
      CHECK(a.snapshots[k].vehicles[i].position == b.snapshots[k].vehicles[i].position);
      CHECK(a.snapshots[k].vehicles[i].is_cv == b.snapshots[k].vehicles[i].is_cv);
    }
  }
  s.seed = 6;
  CHECK(micro::run_microsim(s).snapshots.back().vehicles.size() != a.snapshots.back().vehicles.size());
}

TEST_CASE("vehicle bookkeeping and spacing") {
  const auto& traj = default_run();
  const auto& spec = traj.spec;
  CHECK(traj.n_samples() == 1201);
  for (const auto& snap : traj.snapshots) {
    REQUIRE(snap.entered - snap.exited == static_cast<long>(snap.vehicles.size()));
    std::map<int, std::vector<double>> lanes;
    for (const auto& v : snap.vehicles) {
      REQUIRE(v.position >= 0.0);
      REQUIRE(v.position < spec.total_length);
      REQUIRE(v.speed >= 0.0);
      REQUIRE(v.speed <= spec.speed_limit + 1e-12);
      lanes[v.lane].push_back(v.position);
    }
    for (auto& [lane, pos] : lanes) {
      std::sort(pos.begin(), pos.end());
      for (std::size_t i = 1; i < pos.size(); ++i) {
        REQUIRE(pos[i] - spec.krauss.length - pos[i - 1] >= spec.krauss.min_gap - 1e-9);
      }
    }
  }
  CHECK(std::is_sorted(traj.domain_entries.begin(), traj.domain_entries.end(),
                       [](const auto& a, const auto& b) { return a.t < b.t; }));
}

TEST_CASE("bottleneck limit is obeyed inside the zone") {
  const auto& traj = default_run();
  const auto& b = *traj.spec.bottleneck;
  const double begin = traj.spec.domain_start() + b.position;
  int inside = 0;
  for (const auto& snap : traj.snapshots) {
    if (snap.t < b.start + 1.0 || snap.t >= b.end) continue;
    for (const auto& v : snap.vehicles) {
      if (v.position >= begin + 5.0 && v.position < begin + b.length) {
        ++inside;
        CHECK(v.speed <= b.limit + 1e-9);
      }
    }
  }
  CHECK(inside > 0);
}

TEST_CASE("the bottleneck builds a queue; free flow does not") {
  const arz::ModelParams p = arz::ModelParams::defaults();
  const auto& traj = default_run();
  const Domain d = Domain::from(p, traj.spec.domain_start());
  const auto jam = truth::aggregate(traj, p, d);
  const double critical = arz::critical_density(p.v_free, p);
  CHECK(units::vehm_to_vehkm(jam.rho.block(700, 18, 143, 7).maxCoeff()) > 150.0);
  CHECK(jam.rho.topRows(690).maxCoeff() < critical);

  micro::ScenarioSpec free = traj.spec;
  free.bottleneck.reset();
  const auto flow = truth::aggregate(micro::run_microsim(free), p, d);
  CHECK(flow.rho.maxCoeff() < critical);
}

TEST_CASE("no demand, empty road") {
  micro::ScenarioSpec s = micro::ScenarioSpec::defaults();
  s.mean_headway = 0.0;
  s.duration = 50.0;
  s.bottleneck.reset();
  const auto traj = micro::run_microsim(s);
  CHECK(traj.n_samples() == 51);
  for (const auto& snap : traj.snapshots) CHECK(snap.vehicles.empty());
  CHECK(traj.domain_entries.empty());
}

TEST_CASE("scenario validation") {
  micro::ScenarioSpec s = micro::ScenarioSpec::defaults();
  s.dt_micro = 0.3;
  CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("dt_micro_s"), std::invalid_argument);
  s = micro::ScenarioSpec::defaults();
  s.cv_penetration = 1.5;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}
