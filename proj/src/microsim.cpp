#include "dtse/microsim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "dtse/units.hpp"

namespace dtse::micro {

ScenarioSpec ScenarioSpec::defaults() {
  ScenarioSpec s;
  s.speed_limit = units::kmh_to_mps(100.0);
  Bottleneck b;
  b.limit = units::kmh_to_mps(10.0);
  s.bottleneck = b;
  return s;
}

void ScenarioSpec::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  if (!(total_length > 2.0 * buffer_length) || buffer_length < 0.0) fail("road_length_m must exceed twice buffer_m");
  if (!(duration >= 0.0)) fail("duration_s must be non-negative");
  if (!(speed_limit > 0.0)) fail("speed_limit_kmh must be positive");
  if (cv_penetration < 0.0 || cv_penetration > 1.0) fail("cv_penetration must lie in [0, 1]");
  if (lanes < 1) fail("lanes must be at least 1");
  if (!(dt_micro > 0.0)) fail("dt_micro_s must be positive");
  if (!(sample_dt > 0.0)) fail("sample dt must be positive");
  const double ratio = sample_dt / dt_micro;
  if (std::abs(ratio - std::round(ratio)) > 1e-9) fail("dt_micro_s must divide the macroscopic time step");
  if (bottleneck) {
    const auto& b = *bottleneck;
    if (b.start < 0.0 || b.end < b.start || b.end > duration) fail("bottleneck interval must lie within [0, duration_s]");
    if (!(b.length > 0.0)) fail("bottleneck_length_m must be positive");
    if (b.limit < 0.0) fail("bottleneck_limit_kmh must be non-negative");
  }
  if (krauss.accel <= 0.0 || krauss.decel <= 0.0) fail("krauss accel/decel must be positive");
  if (krauss.sigma < 0.0 || krauss.sigma > 1.0) fail("krauss_sigma must lie in [0, 1]");
  if (krauss.length <= 0.0 || krauss.min_gap < 0.0) fail("vehicle length / min gap invalid");
}

SpeedLimitProfile SpeedLimitProfile::from(const ScenarioSpec& spec) {
  SpeedLimitProfile profile(spec.speed_limit);
  if (spec.bottleneck) {
    const auto& b = *spec.bottleneck;
    const double begin = spec.domain_start() + b.position;
    profile.add_zone({begin, begin + b.length, b.limit, b.start, b.end});
  }
  return profile;
}

double SpeedLimitProfile::limit_at(double pos, double t) const {
  double v = base_;
  for (const auto& z : zones_) {
    if (t >= z.t_on && t < z.t_off && pos >= z.begin && pos < z.end) v = std::min(v, z.limit);
  }
  return v;
}

double SpeedLimitProfile::approach_limit(double pos, double t, double decel) const {
  double v = limit_at(pos, t);
  for (const auto& z : zones_) {
    if (t >= z.t_on && t < z.t_off && pos < z.begin) {
      v = std::min(v, std::sqrt(z.limit * z.limit + 2.0 * decel * (z.begin - pos)));
    }
  }
  return v;
}

std::vector<double> spawn_arrivals(double mean_headway, double duration, Rng& rng) {
  if (!(mean_headway > 0.0)) throw std::invalid_argument("spawn_arrivals: mean headway must be positive");
  std::vector<double> times;
  std::exponential_distribution<double> gap(1.0 / mean_headway);
  double t = 0.0;
  while (true) {
    t += gap(rng);
    if (t >= duration) break;
    times.push_back(t);
  }
  return times;
}

namespace {

// Krauss safe speed behind a leader driving at v_leader with net gap `gap`.
double safe_speed(double gap, double v, double v_leader, const KraussParams& kp) {
  const double v_bar = 0.5 * (v + v_leader);
  return v_leader + (gap - v_leader * kp.reaction) / (v_bar / kp.decel + kp.reaction);
}

// Indices of vehicles in `lane`, front-most first. Ties broken by id so the
// order is deterministic.
std::vector<std::size_t> lane_order(const std::vector<Vehicle>& vs, int lane) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (vs[i].lane == lane) idx.push_back(i);
  }
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (vs[a].position != vs[b].position) return vs[a].position > vs[b].position;
    return vs[a].id < vs[b].id;
  });
  return idx;
}

}  // namespace

std::vector<Vehicle> krauss_step(std::vector<Vehicle> vehicles, const SpeedLimitProfile& limits, double t,
                                 double dt, const KraussParams& kp, Rng& rng) {
  if (vehicles.empty()) return vehicles;
  int max_lane = 0;
  for (const auto& v : vehicles) max_lane = std::max(max_lane, v.lane);

  // Dawdle draws are taken in id order so the stream does not depend on the
  // spatial arrangement.
  std::vector<std::size_t> by_id(vehicles.size());
  std::iota(by_id.begin(), by_id.end(), std::size_t{0});
  std::sort(by_id.begin(), by_id.end(), [&](std::size_t a, std::size_t b) { return vehicles[a].id < vehicles[b].id; });
  std::vector<double> dawdle(vehicles.size());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i : by_id) dawdle[i] = unit(rng);

  const std::vector<Vehicle> old = vehicles;
  for (int lane = 0; lane <= max_lane; ++lane) {
    const auto order = lane_order(old, lane);
    for (std::size_t r = 0; r < order.size(); ++r) {
      const std::size_t i = order[r];
      const Vehicle& me = old[i];
      double v_des = std::min(me.speed + kp.accel * dt, limits.approach_limit(me.position, t, kp.decel));
      if (r > 0) {
        const Vehicle& leader = old[order[r - 1]];
        const double gap = leader.position - leader.length - me.position - kp.min_gap;
        v_des = std::min(v_des, safe_speed(gap, me.speed, leader.speed, kp));
      }
      v_des = std::max(v_des, 0.0);
      double v_new = std::max(0.0, v_des - kp.sigma * kp.accel * dt * dawdle[i]);

      // Hard constraint against the leader's already-updated position.
      if (r > 0) {
        const Vehicle& leader_new = vehicles[order[r - 1]];
        const double room = leader_new.position - leader_new.length - kp.min_gap - me.position;
        v_new = std::min(v_new, std::max(0.0, room / dt));
      }
      vehicles[i].speed = v_new;
      vehicles[i].position = me.position + v_new * dt;
    }
  }
  return vehicles;
}

Trajectories run_microsim(const ScenarioSpec& spec) {
  spec.validate();
  Trajectories out;
  out.spec = spec;

  Rng arrival_rng = make_rng(spec.seed, {stream::kArrivals});
  Rng cv_rng = make_rng(spec.seed, {stream::kCvFlags});
  Rng dawdle_rng = make_rng(spec.seed, {stream::kDawdle});

  const std::vector<double> arrivals =
      spec.mean_headway > 0.0 ? spawn_arrivals(spec.mean_headway, spec.duration, arrival_rng) : std::vector<double>{};
  std::bernoulli_distribution cv_flag(spec.cv_penetration);

  const SpeedLimitProfile limits = SpeedLimitProfile::from(spec);
  const KraussParams& kp = spec.krauss;
  const long n_micro = std::lround(spec.duration / spec.dt_micro);
  const long per_sample = std::lround(spec.sample_dt / spec.dt_micro);
  constexpr double kEntryZone = 200.0;

  std::vector<Vehicle> vehicles;
  std::deque<double> pending;
  std::size_t next_arrival = 0;
  int next_id = 0;
  long entered = 0;
  long exited = 0;

  auto snapshot = [&](double t) {
    Snapshot s;
    s.t = t;
    s.entered = entered;
    s.exited = exited;
    s.vehicles.reserve(vehicles.size());
    for (const auto& v : vehicles) s.vehicles.push_back({v.id, v.lane, v.position, v.speed, v.is_cv});
    std::sort(s.vehicles.begin(), s.vehicles.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    out.snapshots.push_back(std::move(s));
  };

  // Last (upstream-most) vehicle of a lane, if any.
  auto last_in_lane = [&](int lane) -> const Vehicle* {
    const Vehicle* last = nullptr;
    for (const auto& v : vehicles) {
      if (v.lane == lane && (last == nullptr || v.position < last->position)) last = &v;
    }
    return last;
  };

  auto try_insert = [&](double t) -> bool {
    std::vector<int> count(spec.lanes, 0);
    for (const auto& v : vehicles) {
      if (v.position < kEntryZone) ++count[v.lane];
    }
    std::vector<int> lanes(spec.lanes);
    std::iota(lanes.begin(), lanes.end(), 0);
    std::stable_sort(lanes.begin(), lanes.end(), [&](int a, int b) { return count[a] < count[b]; });
    for (int lane : lanes) {
      double speed = limits.limit_at(0.0, t);
      if (const Vehicle* last = last_in_lane(lane)) {
        const double gap = last->position - last->length - kp.min_gap;
        if (gap < 0.0) continue;
        speed = std::min(speed, std::max(0.0, safe_speed(gap, last->speed, last->speed, kp)));
      }
      Vehicle v;
      v.id = next_id++;
      v.lane = lane;
      v.position = 0.0;
      v.speed = speed;
      v.length = kp.length;
      v.is_cv = cv_flag(cv_rng);
      vehicles.push_back(v);
      ++entered;
      return true;
    }
    return false;
  };

  snapshot(0.0);
  for (long step = 0; step < n_micro; ++step) {
    const double t = static_cast<double>(step) * spec.dt_micro;
    while (next_arrival < arrivals.size() && arrivals[next_arrival] <= t) pending.push_back(arrivals[next_arrival++]);
    while (!pending.empty() && try_insert(t)) pending.pop_front();

    std::vector<double> before(vehicles.size());
    for (std::size_t i = 0; i < vehicles.size(); ++i) before[i] = vehicles[i].position;
    vehicles = krauss_step(std::move(vehicles), limits, t, spec.dt_micro, kp, dawdle_rng);

    const double t_next = static_cast<double>(step + 1) * spec.dt_micro;
    const double edge = spec.domain_start();
    for (std::size_t i = 0; i < vehicles.size(); ++i) {
      if (before[i] < edge && vehicles[i].position >= edge) {
        out.domain_entries.push_back({vehicles[i].id, t_next, vehicles[i].speed});
      }
    }
    const auto gone = std::remove_if(vehicles.begin(), vehicles.end(),
                                     [&](const Vehicle& v) { return v.position >= spec.total_length; });
    exited += std::distance(gone, vehicles.end());
    vehicles.erase(gone, vehicles.end());

    if ((step + 1) % per_sample == 0) snapshot(t_next);
  }
  std::stable_sort(out.domain_entries.begin(), out.domain_entries.end(),
                   [](const Crossing& a, const Crossing& b) { return a.t < b.t; });
  return out;
}

}  // namespace dtse::micro
