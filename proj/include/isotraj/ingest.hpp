#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "isotraj/errors.hpp"
#include "isotraj/frames.hpp"
#include "isotraj/util.hpp"

namespace isotraj {

constexpr std::int64_t default_sample_period_ms = 20;
constexpr double max_model_speed_mps = 13.9;  // 50 km/h operating band

struct RawSample {
  std::int64_t timestamp_ms = 0;
  int mx_counts = 0;
  int my_counts = 0;
  std::optional<double> z_m;  // optional elevation column
};

/// Dual-axis magnetic sensor characteristics (datasheet defaults). The
/// hard-iron offsets feed an optional correction stage; both default to zero,
/// matching a rig that applies no signal correction.
struct SensorSpec {
  double sensitivity = 512.0;      // counts per gauss
  double range_gauss = 5.0;        // effective range is +/- this
  double accuracy_deg = 5.0;
  double noise_rms_gauss = 600e-6;
  double hard_iron_mx_gauss = 0.0;
  double hard_iron_my_gauss = 0.0;
};

inline void validate_sensor_spec(const SensorSpec& s) {
  if (!(s.sensitivity >= 461.0 && s.sensitivity <= 563.0))
    throw config_error("sensor sensitivity outside datasheet bounds [461, 563]");
  if (!(s.range_gauss > 0.0)) throw config_error("sensor range must be positive");
}

struct GapFlag {
  std::size_t line = 0;        // line of the sample after the gap
  std::int64_t prev_ms = 0;
  std::int64_t next_ms = 0;
  std::int64_t gap_ms() const { return next_ms - prev_ms; }
};

struct ParsedLog {
  std::vector<RawSample> samples;
  std::vector<GapFlag> gaps;
  bool has_z = false;
};

/// Parses the sensor log CSV: header `timestamp_ms,mx,my[,z_m]`, integer
/// fields, `#` comment lines, LF or CRLF. Timestamps must increase strictly;
/// gaps above 40 ms are reported, not rejected.
inline ParsedLog parse_log(std::istream& in) {
  ParsedLog out;
  std::string raw;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++lineno;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line == "timestamp_ms,mx,my")
        out.has_z = false;
      else if (line == "timestamp_ms,mx,my,z_m")
        out.has_z = true;
      else
        throw parse_error("expected header 'timestamp_ms,mx,my[,z_m]'", lineno);
      header_seen = true;
      continue;
    }
    auto fields = split(line, ',');
    std::size_t expect = out.has_z ? 4u : 3u;
    if (fields.size() != expect)
      throw parse_error("expected " + std::to_string(expect) + " fields", lineno);
    RawSample s;
    s.timestamp_ms = parse_int(trim(fields[0]), lineno);
    s.mx_counts = static_cast<int>(parse_int(trim(fields[1]), lineno));
    s.my_counts = static_cast<int>(parse_int(trim(fields[2]), lineno));
    if (out.has_z) s.z_m = parse_double(trim(fields[3]), lineno);
    if (!out.samples.empty()) {
      std::int64_t prev = out.samples.back().timestamp_ms;
      if (s.timestamp_ms <= prev) throw parse_error("non-monotonic timestamp", lineno);
      // a 40 ms spacing already means a missed 20 ms sample
      if (s.timestamp_ms - prev >= 40) out.gaps.push_back({lineno, prev, s.timestamp_ms});
    }
    out.samples.push_back(s);
  }
  if (!header_seen) throw empty_input_error("log has no header");
  if (out.samples.empty()) throw empty_input_error("log has no samples");
  return out;
}

/// Canonical serialization: LF line endings, no comments, bare integer fields.
/// parse_log(write_log(x)) reproduces x, and re-serializing a canonical log is
/// byte-identical.
inline std::string write_log(const ParsedLog& log) {
  std::string out = log.has_z ? "timestamp_ms,mx,my,z_m\n" : "timestamp_ms,mx,my\n";
  for (const auto& s : log.samples) {
    out += std::to_string(s.timestamp_ms);
    out += ',';
    out += std::to_string(s.mx_counts);
    out += ',';
    out += std::to_string(s.my_counts);
    if (log.has_z) {
      out += ',';
      out += format_double(s.z_m.value_or(0.0));
    }
    out += '\n';
  }
  return out;
}

/// counts / sensitivity. Values beyond the effective range clamp to the range
/// edge and raise the saturation flag; the edge itself is in range.
inline double counts_to_gauss(int counts, const SensorSpec& spec, bool* saturated = nullptr) {
  if (saturated) *saturated = false;
  double g = static_cast<double>(counts) / spec.sensitivity;
  if (g > spec.range_gauss) {
    if (saturated) *saturated = true;
    return spec.range_gauss;
  }
  if (g < -spec.range_gauss) {
    if (saturated) *saturated = true;
    return -spec.range_gauss;
  }
  return g;
}

/// atan2 heading of the field vector, degrees in [0, 360).
inline double heading_from_field(double mx_gauss, double my_gauss) {
  if (mx_gauss == 0.0 && my_gauss == 0.0)
    throw indeterminate_heading_error("zero field vector has no heading");
  double deg = std::atan2(my_gauss, mx_gauss) * 180.0 / std::numbers::pi;
  if (deg < 0.0) deg += 360.0;
  if (deg >= 360.0) deg = 0.0;
  return deg;
}

/// Speed source for dead reckoning: either one constant or a per-tick profile
/// (held at its last value past the end). The constant model is bounded by the
/// 0..50 km/h band.
struct SpeedModel {
  enum class Kind { constant, profile };
  Kind kind = Kind::constant;
  double constant_mps = 10.0;
  std::vector<double> profile_mps;

  static SpeedModel constant(double mps) {
    if (!(mps >= 0.0 && mps <= max_model_speed_mps))
      throw config_error("constant speed must be within [0, 13.9] m/s");
    SpeedModel m;
    m.constant_mps = mps;
    return m;
  }

  static SpeedModel profile(std::vector<double> mps) {
    if (mps.empty()) throw config_error("speed profile is empty");
    for (double v : mps)
      if (!(v >= 0.0)) throw config_error("speed profile values must be >= 0");
    SpeedModel m;
    m.kind = Kind::profile;
    m.profile_mps = std::move(mps);
    return m;
  }

  double at(std::size_t k) const {
    if (kind == Kind::constant) return constant_mps;
    return k < profile_mps.size() ? profile_mps[k] : profile_mps.back();
  }
};

struct PathPoint {
  std::int64_t tick = 0;
  Vec3 position;        // meters; z comes from the optional log column
  double heading_deg = 0.0;
  double speed_mps = 0.0;
};

/// Integrates heading and modelled speed over the sample timestamps:
/// p[k+1] = p[k] + speed[k] * dt[k] * (cos h[k], sin h[k], 0).
inline std::vector<PathPoint> dead_reckon(const ParsedLog& log, const SensorSpec& spec,
                                          const SpeedModel& speed,
                                          std::int64_t period_ms = default_sample_period_ms) {
  if (log.samples.size() < 2) throw insufficient_data_error("dead_reckon needs >= 2 samples");
  validate_sensor_spec(spec);
  std::vector<PathPoint> path;
  path.reserve(log.samples.size());
  Vec3 pos{0.0, 0.0, log.samples.front().z_m.value_or(0.0)};
  for (std::size_t k = 0; k < log.samples.size(); ++k) {
    const RawSample& s = log.samples[k];
    double mx = counts_to_gauss(s.mx_counts, spec) - spec.hard_iron_mx_gauss;
    double my = counts_to_gauss(s.my_counts, spec) - spec.hard_iron_my_gauss;
    PathPoint p;
    p.tick = s.timestamp_ms / period_ms;
    p.heading_deg = heading_from_field(mx, my);
    p.speed_mps = speed.at(k);
    pos.z = s.z_m.value_or(pos.z);
    p.position = pos;
    path.push_back(p);
    if (k + 1 < log.samples.size()) {
      double dt = static_cast<double>(log.samples[k + 1].timestamp_ms - s.timestamp_ms) * 1e-3;
      double h = p.heading_deg * std::numbers::pi / 180.0;
      pos.x += p.speed_mps * dt * std::cos(h);
      pos.y += p.speed_mps * dt * std::sin(h);
    }
  }
  return path;
}

enum class Maneuver {
  straight,
  left_lane_change,
  right_lane_change,
  left_turn,
  right_turn,
  accel,
  decel,
};

inline const char* to_string(Maneuver m) {
  switch (m) {
    case Maneuver::straight: return "straight";
    case Maneuver::left_lane_change: return "left_lane_change";
    case Maneuver::right_lane_change: return "right_lane_change";
    case Maneuver::left_turn: return "left_turn";
    case Maneuver::right_turn: return "right_turn";
    case Maneuver::accel: return "accel";
    case Maneuver::decel: return "decel";
  }
  return "straight";
}

struct ManeuverParams {
  std::size_t min_window = 25;   // ticks
  double turn_deg = 45.0;        // net heading change that makes a turn
  double lane_net_deg = 15.0;    // net change a lane change must stay under
  double excursion_deg = 6.0;    // smallest S-curve excursion that counts
  double accel_mps2 = 0.5;       // speed slope threshold
  std::size_t smooth_ticks = 5;  // moving-average width
  double period_s = 0.020;
};

namespace detail {

inline double wrap_deg(double d) {
  while (d > 180.0) d -= 360.0;
  while (d <= -180.0) d += 360.0;
  return d;
}

inline std::vector<double> unwrap_headings(std::span<const double> headings_deg) {
  std::vector<double> h;
  h.reserve(headings_deg.size());
  double acc = headings_deg.empty() ? 0.0 : headings_deg[0];
  h.push_back(acc);
  for (std::size_t k = 1; k < headings_deg.size(); ++k) {
    acc += wrap_deg(headings_deg[k] - headings_deg[k - 1]);
    h.push_back(acc);
  }
  return h;
}

inline std::vector<double> moving_average(const std::vector<double>& x, std::size_t w) {
  if (w <= 1) return x;
  std::vector<double> out(x.size());
  std::size_t half = w / 2;
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::size_t lo = i > half ? i - half : 0;
    std::size_t hi = std::min(x.size() - 1, i + half);
    double s = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) s += x[j];
    out[i] = s / static_cast<double>(hi - lo + 1);
  }
  return out;
}

}  // namespace detail

/// Window classifier with the precedence turn > lane change > accel/decel >
/// straight. Positive heading change is a left maneuver. A lane change is the
/// S-shaped excursion that returns near the starting heading (net under
/// lane_net_deg); its side is the dominant excursion's sign.
inline Maneuver detect_maneuver(std::span<const double> headings_deg,
                                std::span<const double> speeds_mps,
                                const ManeuverParams& p = {}) {
  if (headings_deg.size() < p.min_window || speeds_mps.size() != headings_deg.size())
    throw insufficient_data_error("detect_maneuver: window shorter than minimum");

  auto h = detail::moving_average(detail::unwrap_headings(headings_deg), p.smooth_ticks);
  double base = h.front();
  double net = h.back() - base;
  double max_exc = 0.0, min_exc = 0.0;
  for (double v : h) {
    max_exc = std::max(max_exc, v - base);
    min_exc = std::min(min_exc, v - base);
  }

  if (std::abs(net) > p.turn_deg) return net > 0.0 ? Maneuver::left_turn : Maneuver::right_turn;

  if (std::abs(net) < p.lane_net_deg && std::max(max_exc, -min_exc) > p.excursion_deg)
    return max_exc >= -min_exc ? Maneuver::left_lane_change : Maneuver::right_lane_change;

  // least-squares speed slope, m/s^2
  double n = static_cast<double>(speeds_mps.size());
  double st = 0.0, ss = 0.0, stt = 0.0, sts = 0.0;
  for (std::size_t k = 0; k < speeds_mps.size(); ++k) {
    double t = static_cast<double>(k) * p.period_s;
    st += t;
    ss += speeds_mps[k];
    stt += t * t;
    sts += t * speeds_mps[k];
  }
  double denom = n * stt - st * st;
  double slope = denom != 0.0 ? (n * sts - st * ss) / denom : 0.0;
  if (slope > p.accel_mps2) return Maneuver::accel;
  if (slope < -p.accel_mps2) return Maneuver::decel;

  return Maneuver::straight;
}

}  // namespace isotraj
