#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>

#include "isotraj/chords.hpp"
#include "isotraj/errors.hpp"
#include "isotraj/ingest.hpp"
#include "isotraj/surface.hpp"
#include "isotraj/util.hpp"

namespace isotraj {

/// Runtime knobs, one field per `key = value` line of the plain-text config.
/// Unknown keys and malformed values are config errors.
struct Config {
  std::int64_t sample_period_ms = 20;

  std::string speed_model = "constant";  // constant | profile
  double speed_constant_mps = 10.0;
  std::string speed_profile_file;

  double sensor_sensitivity = 512.0;
  double sensor_range_gauss = 5.0;
  double sensor_noise_rms_gauss = 600e-6;
  double sensor_accuracy_deg = 5.0;
  double sensor_hard_iron_mx_gauss = 0.0;  // correction stage, off by default
  double sensor_hard_iron_my_gauss = 0.0;

  int grid_rows = 3;
  int grid_cols = 3;
  double grid_spacing_m = 0.5;

  double refine_rho_threshold = 0.5;
  double refine_likelihood_threshold = 0.5;
  double refine_stop_speed_mps = 0.5;

  std::int64_t segmentation_window_ticks = 25;
  int segmentation_max_surfaces = 4;
  double segmentation_flag_lo_deg = -0.5;
  double segmentation_flag_hi_deg = 0.5;
  double segmentation_threshold = 0.5;

  double chords_gamma = 0.8;
  double chords_rho_min = 0.7;
  int chords_max_edges = 4;
  std::int64_t chords_window_ticks = 25;
  int chords_profile_max_edges = 2;

  double delta_w_v = 1.0;
  double delta_w_a = 1.0;
  double delta_w_o = 1.0;
  double delta_v_ref_mps = 13.9;
  double delta_a_ref_mps2 = 3.0;

  double store_cell_m = 5.0;
  int store_heading_bins = 8;

  int predict_max_candidates = 8;
  std::int64_t predict_interval_ticks = 50;
  std::int64_t predict_horizon_ticks = 250;

  double obstacle_lookahead_m = 20.0;
  int obstacle_resolution = 16;

  std::int64_t maneuver_window_ticks = 25;
  double maneuver_turn_deg = 45.0;
  double maneuver_lane_net_deg = 15.0;
  double maneuver_excursion_deg = 6.0;
  double maneuver_accel_mps2 = 0.5;
  std::int64_t maneuver_smooth_ticks = 5;

  void set(const std::string& key, const std::string& value);
  void validate() const;

  static Config parse(std::istream& in);
  static Config load(const std::string& path);

  SensorSpec sensor_spec() const {
    return {sensor_sensitivity,       sensor_range_gauss,      sensor_accuracy_deg,
            sensor_noise_rms_gauss,   sensor_hard_iron_mx_gauss, sensor_hard_iron_my_gauss};
  }
  GridSpec grid_spec() const { return {grid_rows, grid_cols, grid_spacing_m}; }
  DeltaParams delta_params() const {
    return {delta_w_v, delta_w_a, delta_w_o, delta_v_ref_mps, delta_a_ref_mps2};
  }
  ManeuverParams maneuver_params() const {
    ManeuverParams p;
    p.min_window = static_cast<std::size_t>(maneuver_window_ticks);
    p.turn_deg = maneuver_turn_deg;
    p.lane_net_deg = maneuver_lane_net_deg;
    p.excursion_deg = maneuver_excursion_deg;
    p.accel_mps2 = maneuver_accel_mps2;
    p.smooth_ticks = static_cast<std::size_t>(maneuver_smooth_ticks);
    p.period_s = static_cast<double>(sample_period_ms) * 1e-3;
    return p;
  }
};

inline void Config::set(const std::string& key, const std::string& value) {
  auto num = [&](double lo, double hi) {
    double v;
    try {
      v = parse_double(value);
    } catch (const parse_error&) {
      throw config_error("config key '" + key + "': bad number '" + value + "'");
    }
    if (!(v >= lo && v <= hi))
      throw config_error("config key '" + key + "': value " + value + " out of range");
    return v;
  };
  auto integer = [&](double lo, double hi) { return static_cast<std::int64_t>(num(lo, hi)); };

  if (key == "sample.period_ms") sample_period_ms = integer(1, 10000);
  else if (key == "speed.model") {
    if (value != "constant" && value != "profile")
      throw config_error("speed.model must be 'constant' or 'profile'");
    speed_model = value;
  } else if (key == "speed.constant_mps") speed_constant_mps = num(0.0, max_model_speed_mps);
  else if (key == "speed.profile_file") speed_profile_file = value;
  else if (key == "sensor.sensitivity") sensor_sensitivity = num(461.0, 563.0);
  else if (key == "sensor.range_gauss") sensor_range_gauss = num(1e-9, 1e9);
  else if (key == "sensor.noise_rms_gauss") sensor_noise_rms_gauss = num(0.0, 1.0);
  else if (key == "sensor.accuracy_deg") sensor_accuracy_deg = num(0.0, 180.0);
  else if (key == "sensor.hard_iron_mx_gauss") sensor_hard_iron_mx_gauss = num(-5.0, 5.0);
  else if (key == "sensor.hard_iron_my_gauss") sensor_hard_iron_my_gauss = num(-5.0, 5.0);
  else if (key == "grid.rows") grid_rows = static_cast<int>(integer(1, 64));
  else if (key == "grid.cols") grid_cols = static_cast<int>(integer(1, 64));
  else if (key == "grid.spacing_m") grid_spacing_m = num(1e-6, 1e3);
  else if (key == "refine.rho_threshold") refine_rho_threshold = num(0.0, 1.0);
  else if (key == "refine.likelihood_threshold") refine_likelihood_threshold = num(0.0, 1.0);
  else if (key == "refine.stop_speed_mps") refine_stop_speed_mps = num(0.0, max_model_speed_mps);
  else if (key == "segmentation.window_ticks") segmentation_window_ticks = integer(2, 100000);
  else if (key == "segmentation.max_surfaces") segmentation_max_surfaces = static_cast<int>(integer(1, 64));
  else if (key == "segmentation.flag_lo_deg") segmentation_flag_lo_deg = num(-360.0, 360.0);
  else if (key == "segmentation.flag_hi_deg") segmentation_flag_hi_deg = num(-360.0, 360.0);
  else if (key == "segmentation.threshold") segmentation_threshold = num(0.0, 1.0);
  else if (key == "chords.gamma") chords_gamma = num(1e-9, 1.0);
  else if (key == "chords.rho_min") chords_rho_min = num(0.0, 1.0);
  else if (key == "chords.max_edges") chords_max_edges = static_cast<int>(integer(2, 8));
  else if (key == "chords.window_ticks") chords_window_ticks = integer(1, 100000);
  else if (key == "chords.profile_max_edges") chords_profile_max_edges = static_cast<int>(integer(2, 8));
  else if (key == "delta.w_v") delta_w_v = num(0.0, 1e6);
  else if (key == "delta.w_a") delta_w_a = num(0.0, 1e6);
  else if (key == "delta.w_o") delta_w_o = num(0.0, 1e6);
  else if (key == "delta.v_ref_mps") delta_v_ref_mps = num(1e-9, 1e6);
  else if (key == "delta.a_ref_mps2") delta_a_ref_mps2 = num(1e-9, 1e6);
  else if (key == "store.cell_m") store_cell_m = num(1e-3, 1e6);
  else if (key == "store.heading_bins") store_heading_bins = static_cast<int>(integer(2, 360));
  else if (key == "predict.max_candidates") predict_max_candidates = static_cast<int>(integer(1, 1024));
  else if (key == "predict.interval_ticks") predict_interval_ticks = integer(1, 1000000);
  else if (key == "predict.horizon_ticks") predict_horizon_ticks = integer(1, 1000000);
  else if (key == "obstacle.lookahead_m") obstacle_lookahead_m = num(0.0, 1e6);
  else if (key == "obstacle.resolution") obstacle_resolution = static_cast<int>(integer(2, 4096));
  else if (key == "maneuver.window_ticks") maneuver_window_ticks = integer(2, 100000);
  else if (key == "maneuver.turn_deg") maneuver_turn_deg = num(0.0, 360.0);
  else if (key == "maneuver.lane_net_deg") maneuver_lane_net_deg = num(0.0, 360.0);
  else if (key == "maneuver.excursion_deg") maneuver_excursion_deg = num(0.0, 360.0);
  else if (key == "maneuver.accel_mps2") maneuver_accel_mps2 = num(0.0, 1e3);
  else if (key == "maneuver.smooth_ticks") maneuver_smooth_ticks = integer(1, 1000);
  else throw config_error("unknown config key '" + key + "'");
}

inline void Config::validate() const {
  if (speed_model == "profile" && speed_profile_file.empty())
    throw config_error("speed.model = profile requires speed.profile_file");
  if (segmentation_flag_lo_deg > segmentation_flag_hi_deg)
    throw config_error("segmentation.flag_lo_deg must not exceed flag_hi_deg");
  validate_sensor_spec(sensor_spec());
}

inline Config Config::parse(std::istream& in) {
  Config cfg;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto line = raw.substr(0, raw.find('#'));
    auto t = trim(line);
    if (t.empty()) continue;
    auto eq = t.find('=');
    if (eq == std::string_view::npos)
      throw config_error("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key(trim(t.substr(0, eq)));
    std::string value(trim(t.substr(eq + 1)));
    cfg.set(key, value);
  }
  cfg.validate();
  return cfg;
}

inline Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file '" + path + "'");
  return parse(in);
}

}  // namespace isotraj
