#include "dtse/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "dtse/units.hpp"

namespace dtse {

namespace {

using experiment::RunConfig;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw ConfigError("key '" + key + "': invalid value '" + value + "' (expected " + expected + ")");
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) bad_value(key, v, "a number");
  return out;
}

long long to_integer(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  bad_value(key, v, "true/false");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  if (v.empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

template <class F>
Setter num(F f) {
  return [f](RunConfig& c, const std::string& k, const std::string& v) { f(c, to_double(k, v)); };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"v_free_kmh", num([](RunConfig& c, double x) { c.model.v_free = units::kmh_to_mps(x); })},
      {"rho_max_vehkm", num([](RunConfig& c, double x) { c.model.rho_max = units::vehkm_to_vehm(x); })},
      {"gamma", num([](RunConfig& c, double x) { c.model.gamma = x; })},
      {"tau_s", num([](RunConfig& c, double x) { c.model.tau = x; })},
      {"n_cells", [](RunConfig& c, const std::string& k, const std::string& v) { c.model.n_cells = static_cast<int>(to_integer(k, v)); }},
      {"dt_s", num([](RunConfig& c, double x) { c.model.dt = x; })},
      {"dh_m", num([](RunConfig& c, double x) { c.model.dh = x; })},
      {"road_length_m", num([](RunConfig& c, double x) { c.scenario.total_length = x; })},
      {"buffer_m", num([](RunConfig& c, double x) { c.scenario.buffer_length = x; })},
      {"duration_s", num([](RunConfig& c, double x) { c.scenario.duration = x; })},
      {"speed_limit_kmh", num([](RunConfig& c, double x) { c.scenario.speed_limit = units::kmh_to_mps(x); })},
      {"mean_headway_s", num([](RunConfig& c, double x) { c.scenario.mean_headway = x; })},
      {"cv_penetration", num([](RunConfig& c, double x) { c.scenario.cv_penetration = x; })},
      {"lanes", [](RunConfig& c, const std::string& k, const std::string& v) { c.scenario.lanes = static_cast<int>(to_integer(k, v)); }},
      {"dt_micro_s", num([](RunConfig& c, double x) { c.scenario.dt_micro = x; })},
      {"krauss_accel", num([](RunConfig& c, double x) { c.scenario.krauss.accel = x; })},
      {"krauss_decel", num([](RunConfig& c, double x) { c.scenario.krauss.decel = x; })},
      {"krauss_sigma", num([](RunConfig& c, double x) { c.scenario.krauss.sigma = x; })},
      {"krauss_reaction_s", num([](RunConfig& c, double x) { c.scenario.krauss.reaction = x; })},
      {"vehicle_length_m", num([](RunConfig& c, double x) { c.scenario.krauss.length = x; })},
      {"min_gap_m", num([](RunConfig& c, double x) { c.scenario.krauss.min_gap = x; })},
      {"bottleneck", [](RunConfig& c, const std::string& k, const std::string& v) {
         if (to_bool(k, v)) {
           if (!c.scenario.bottleneck) c.scenario.bottleneck = micro::ScenarioSpec::defaults().bottleneck;
         } else {
           c.scenario.bottleneck.reset();
         }
       }},
      {"bottleneck_position_m", num([](RunConfig& c, double x) { if (c.scenario.bottleneck) c.scenario.bottleneck->position = x; })},
      {"bottleneck_length_m", num([](RunConfig& c, double x) { if (c.scenario.bottleneck) c.scenario.bottleneck->length = x; })},
      {"bottleneck_limit_kmh", num([](RunConfig& c, double x) { if (c.scenario.bottleneck) c.scenario.bottleneck->limit = units::kmh_to_mps(x); })},
      {"bottleneck_start_s", num([](RunConfig& c, double x) { if (c.scenario.bottleneck) c.scenario.bottleneck->start = x; })},
      {"bottleneck_end_s", num([](RunConfig& c, double x) { if (c.scenario.bottleneck) c.scenario.bottleneck->end = x; })},
      {"rsu_positions_m", [](RunConfig& c, const std::string& k, const std::string& v) { c.rsu_positions = to_list(k, v); }},
      {"v2x_range_m", num([](RunConfig& c, double x) { c.v2x_range = x; })},
      {"consensus_rounds", [](RunConfig& c, const std::string& k, const std::string& v) { c.consensus_rounds = static_cast<int>(to_integer(k, v)); }},
      {"rho_init_vehkm", num([](RunConfig& c, double x) { c.rho_init_vehkm = x; })},
      {"p0_rho", num([](RunConfig& c, double x) { c.p0_rho = x; })},
      {"p0_psi", num([](RunConfig& c, double x) { c.p0_psi = x; })},
      {"q_rho", num([](RunConfig& c, double x) { c.q_rho = x; })},
      {"q_psi", num([](RunConfig& c, double x) { c.q_psi = x; })},
      {"r_rho", num([](RunConfig& c, double x) { c.r_rho = x; })},
      {"r_psi", num([](RunConfig& c, double x) { c.r_psi = x; })},
      {"rates_pct", [](RunConfig& c, const std::string& k, const std::string& v) { c.rates_pct = to_list(k, v); }},
      {"trials", [](RunConfig& c, const std::string& k, const std::string& v) { c.trials = static_cast<int>(to_integer(k, v)); }},
      {"seed", [](RunConfig& c, const std::string& k, const std::string& v) {
         const long long s = to_integer(k, v);
         if (s < 0) bad_value(k, v, "a non-negative integer");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"window_start_s", num([](RunConfig& c, double x) { c.window_start = x; })},
      {"filter_start_s", num([](RunConfig& c, double x) { c.filter_start = x; })},
      {"join_mode", [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "prior") c.join_mode = experiment::JoinMode::Prior;
         else if (v == "open_loop") c.join_mode = experiment::JoinMode::OpenLoop;
         else bad_value(k, v, "prior or open_loop");
       }},
      {"window_end_s", num([](RunConfig& c, double x) { c.window_end = x; })},
  };
  return table;
}

}  // namespace

experiment::RunConfig parse_config_text(std::string_view text) {
  RunConfig cfg = RunConfig::defaults();
  std::map<std::string, std::string> entries;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value', got '" + stripped + "'");
    }
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    const std::string value = trim(std::string_view(stripped).substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": missing key");
    if (!setters().contains(key)) throw ConfigError("unknown key '" + key + "' on line " + std::to_string(line_no));
    if (entries.contains(key)) throw ConfigError("key '" + key + "' given more than once");
    entries[key] = value;
  }
  // The bottleneck switch goes first so its sub-keys see the right state.
  if (auto it = entries.find("bottleneck"); it != entries.end()) setters().at(it->first)(cfg, it->first, it->second);
  for (const auto& [key, value] : entries) {
    if (key != "bottleneck") setters().at(key)(cfg, key, value);
  }
  cfg.scenario.sample_dt = cfg.model.dt;
  cfg.scenario.seed = cfg.seed;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

experiment::RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string to_config_text(const experiment::RunConfig& c) {
  std::ostringstream o;
  o << std::setprecision(17);
  auto list = [&](const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) o << (i ? ", " : "") << v[i];
    o << '\n';
  };
  o << "v_free_kmh = " << units::mps_to_kmh(c.model.v_free) << '\n';
  o << "rho_max_vehkm = " << units::vehm_to_vehkm(c.model.rho_max) << '\n';
  o << "gamma = " << c.model.gamma << '\n';
  o << "tau_s = " << c.model.tau << '\n';
  o << "n_cells = " << c.model.n_cells << '\n';
  o << "dt_s = " << c.model.dt << '\n';
  o << "dh_m = " << c.model.dh << '\n';
  o << "road_length_m = " << c.scenario.total_length << '\n';
  o << "buffer_m = " << c.scenario.buffer_length << '\n';
  o << "duration_s = " << c.scenario.duration << '\n';
  o << "speed_limit_kmh = " << units::mps_to_kmh(c.scenario.speed_limit) << '\n';
  o << "mean_headway_s = " << c.scenario.mean_headway << '\n';
  o << "cv_penetration = " << c.scenario.cv_penetration << '\n';
  o << "lanes = " << c.scenario.lanes << '\n';
  o << "dt_micro_s = " << c.scenario.dt_micro << '\n';
  o << "krauss_accel = " << c.scenario.krauss.accel << '\n';
  o << "krauss_decel = " << c.scenario.krauss.decel << '\n';
  o << "krauss_sigma = " << c.scenario.krauss.sigma << '\n';
  o << "krauss_reaction_s = " << c.scenario.krauss.reaction << '\n';
  o << "vehicle_length_m = " << c.scenario.krauss.length << '\n';
  o << "min_gap_m = " << c.scenario.krauss.min_gap << '\n';
  o << "bottleneck = " << (c.scenario.bottleneck ? "true" : "false") << '\n';
  if (const auto& b = c.scenario.bottleneck) {
    o << "bottleneck_position_m = " << b->position << '\n';
    o << "bottleneck_length_m = " << b->length << '\n';
    o << "bottleneck_limit_kmh = " << units::mps_to_kmh(b->limit) << '\n';
    o << "bottleneck_start_s = " << b->start << '\n';
    o << "bottleneck_end_s = " << b->end << '\n';
  }
  o << "rsu_positions_m = ";
  list(c.rsu_positions);
  o << "v2x_range_m = " << c.v2x_range << '\n';
  o << "consensus_rounds = " << c.consensus_rounds << '\n';
  o << "rho_init_vehkm = " << c.rho_init_vehkm << '\n';
  o << "p0_rho = " << c.p0_rho << '\n';
  o << "p0_psi = " << c.p0_psi << '\n';
  o << "q_rho = " << c.q_rho << '\n';
  o << "q_psi = " << c.q_psi << '\n';
  o << "r_rho = " << c.r_rho << '\n';
  o << "r_psi = " << c.r_psi << '\n';
  o << "rates_pct = ";
  list(c.rates_pct);
  o << "trials = " << c.trials << '\n';
  o << "seed = " << c.seed << '\n';
  o << "window_start_s = " << c.window_start << '\n';
  o << "filter_start_s = " << c.filter_start << '\n';
  o << "join_mode = " << (c.join_mode == experiment::JoinMode::Prior ? "prior" : "open_loop") << '\n';
  if (c.window_end) o << "window_end_s = " << *c.window_end << '\n';
  return o.str();
}

}  // namespace dtse
