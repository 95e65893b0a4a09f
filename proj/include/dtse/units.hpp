#pragma once

// Conversions between the SI units used internally and the reporting units
// (km/h, veh/km, veh/h) used in configs and exported CSVs.

namespace dtse::units {

inline constexpr double kSecondsPerHour = 3600.0;
inline constexpr double kMetersPerKm = 1000.0;

constexpr double kmh_to_mps(double v) { return v * kMetersPerKm / kSecondsPerHour; }
constexpr double mps_to_kmh(double v) { return v * kSecondsPerHour / kMetersPerKm; }

constexpr double vehkm_to_vehm(double rho) { return rho / kMetersPerKm; }
constexpr double vehm_to_vehkm(double rho) { return rho * kMetersPerKm; }

constexpr double vehh_to_vehs(double q) { return q / kSecondsPerHour; }
constexpr double vehs_to_vehh(double q) { return q * kSecondsPerHour; }

// Variances scale with the square of the unit factor.
constexpr double var_vehkm_to_vehm(double s2) { return s2 / (kMetersPerKm * kMetersPerKm); }
constexpr double var_vehh_to_vehs(double s2) { return s2 / (kSecondsPerHour * kSecondsPerHour); }

}  // namespace dtse::units
