#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dtse/rng.hpp"

namespace dtse::micro {

/// Krauss car-following constants. Only min_gap comes from the reference
/// scenario; the rest are common microsimulation defaults.
struct KraussParams {
  double accel = 2.6;      // [m/s^2]
  double decel = 4.5;      // [m/s^2]
  double sigma = 0.5;      // driver imperfection in [0, 1]
  double length = 5.0;     // [m]
  double min_gap = 1.5;    // [m]
  double reaction = 1.0;   // driver reaction time tau [s]
};

/// Temporary speed-limit drop. `position` is measured from the start of the
/// effective domain (not the road).
struct Bottleneck {
  double position = 2200.0;  // [m]
  double length = 100.0;     // [m]
  double limit = 0.0;        // [m/s]
  double start = 700.0;      // [s]
  double end = 760.0;        // [s]
};

struct ScenarioSpec {
  double total_length = 2700.0;  // [m]
  double buffer_length = 100.0;  // [m], at each end
  double duration = 1200.0;      // [s]
  double speed_limit = 0.0;      // [m/s]
  std::optional<Bottleneck> bottleneck;
  double mean_headway = 1.0;     // mean interarrival [s]; <= 0 means no demand
  double cv_penetration = 0.1;
  std::uint64_t seed = 1;
  int lanes = 2;
  double dt_micro = 0.5;   // [s]
  double sample_dt = 1.0;  // [s]
  KraussParams krauss;

  /// 2.7 km two-lane road, 100 km/h, bottleneck to 10 km/h on
  /// [2200, 2300) m of the domain during [700, 760] s, 1 veh/s demand.
  static ScenarioSpec defaults();

  double domain_start() const { return buffer_length; }
  double domain_end() const { return total_length - buffer_length; }

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct Vehicle {
  int id = 0;
  int lane = 0;
  double position = 0.0;  // front bumper, road coordinates [m]
  double speed = 0.0;     // [m/s]
  double length = 5.0;    // [m]
  bool is_cv = false;
};

/// Position- and time-dependent speed limit.
class SpeedLimitProfile {
 public:
  struct Zone {
    double begin = 0.0;  // road coordinates [m]
    double end = 0.0;
    double limit = 0.0;
    double t_on = 0.0;
    double t_off = 0.0;
  };

  explicit SpeedLimitProfile(double base) : base_(base) {}
  static SpeedLimitProfile from(const ScenarioSpec& spec);

  void add_zone(Zone z) { zones_.push_back(z); }

  double base() const { return base_; }
  double limit_at(double pos, double t) const;

  /// Highest speed at `pos` from which the vehicle can still brake (at
  /// `decel`) down to every active lower limit ahead of it.
  double approach_limit(double pos, double t, double decel) const;

 private:
  double base_;
  std::vector<Zone> zones_;
};

/// Sorted arrival times with i.i.d. exponential gaps of mean `mean_headway`
/// on [0, duration).
std::vector<double> spawn_arrivals(double mean_headway, double duration, Rng& rng);

/// One Krauss update of every vehicle. Vehicles follow the nearest vehicle
/// ahead in the same lane; gaps never drop below min_gap.
std::vector<Vehicle> krauss_step(std::vector<Vehicle> vehicles, const SpeedLimitProfile& limits, double t,
                                 double dt, const KraussParams& kp, Rng& rng);

struct VehicleSample {
  int id = 0;
  int lane = 0;
  double position = 0.0;
  double speed = 0.0;
  bool is_cv = false;
};

struct Snapshot {
  double t = 0.0;
  std::vector<VehicleSample> vehicles;  // ordered by id
  long entered = 0;  // cumulative vehicles inserted so far
  long exited = 0;   // cumulative vehicles that left the road
};

/// A vehicle passing the upstream edge of the domain.
struct Crossing {
  int vehicle_id = 0;
  double t = 0.0;
  double speed = 0.0;
};

struct Trajectories {
  ScenarioSpec spec;
  std::vector<Snapshot> snapshots;  // snapshots[k] is at t = k * sample_dt
  std::vector<Crossing> domain_entries;  // ordered by time

  int n_samples() const { return static_cast<int>(snapshots.size()); }
};

Trajectories run_microsim(const ScenarioSpec& spec);

}  // namespace dtse::micro
