#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <istream>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "isotraj/chords.hpp"
#include "isotraj/config.hpp"
#include "isotraj/errors.hpp"
#include "isotraj/ingest.hpp"
#include "isotraj/obstacle.hpp"
#include "isotraj/segmentation.hpp"
#include "isotraj/store.hpp"
#include "isotraj/surface.hpp"
#include "isotraj/util.hpp"

namespace isotraj {

/// The assembled per-tick trajectory record: position plus every derived
/// constituent (correlation matrix, obstacle score, segmentation probability,
/// vibration amplitude and propagation probability).
struct TrajectoryState {
  std::int64_t tick = 0;
  Vec3 position;
  CorrelationMatrix correlation;
  double obstacle_score = 0.0;   // [0, 1]
  double seg_probability = 0.0;  // [0, 1]
  double delta = 0.0;
  double rho = 0.0;              // [0, 1]; exactly 1 on traveled ticks

  friend bool operator==(const TrajectoryState& a, const TrajectoryState& b) {
    return a.tick == b.tick && a.position == b.position && a.correlation == b.correlation &&
           a.obstacle_score == b.obstacle_score && a.seg_probability == b.seg_probability &&
           a.delta == b.delta && a.rho == b.rho;
  }
};

/// assemble_state inputs; every field must be supplied (rho may be omitted
/// only for traveled ticks, which are pinned to probability 1).
struct StateInputs {
  std::optional<std::int64_t> tick;
  std::optional<Vec3> position;
  std::optional<CorrelationMatrix> correlation;
  std::optional<double> obstacle_score;
  std::optional<double> seg_probability;
  std::optional<double> delta;
  std::optional<double> rho;
  bool traveled = false;
};

inline TrajectoryState assemble_state(const StateInputs& in) {
  auto require = [](bool present, const char* field) {
    if (!present) throw incomplete_state_error(field);
  };
  require(in.tick.has_value(), "tick");
  require(in.position.has_value(), "position");
  require(in.correlation.has_value(), "correlation");
  require(in.obstacle_score.has_value(), "obstacle_score");
  require(in.seg_probability.has_value(), "seg_probability");
  require(in.delta.has_value(), "delta");
  if (!in.traveled) require(in.rho.has_value(), "rho");

  TrajectoryState s;
  s.tick = *in.tick;
  s.position = *in.position;
  s.correlation = *in.correlation;
  s.obstacle_score = *in.obstacle_score;
  s.seg_probability = *in.seg_probability;
  s.delta = *in.delta;
  s.rho = in.traveled ? 1.0 : *in.rho;
  auto check01 = [](double v, const char* field) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(field) + " outside [0, 1]");
  };
  check01(s.obstacle_score, "obstacle_score");
  check01(s.seg_probability, "seg_probability");
  check01(s.rho, "rho");
  return s;
}

/// One CSV fragment: tick,x,y,z,obstacle_score,seg_probability,delta,rho,
/// seg_n,k_upper. The packed upper triangle is semicolon-joined inside the
/// last field so the column count stays fixed. Shortest round-trip float form
/// makes parse_state(serialize_state(s)) == s exact.
inline std::string serialize_state(const TrajectoryState& s) {
  std::string out;
  out += std::to_string(s.tick);
  out += ',';
  out += format_double(s.position.x);
  out += ',';
  out += format_double(s.position.y);
  out += ',';
  out += format_double(s.position.z);
  out += ',';
  out += format_double(s.obstacle_score);
  out += ',';
  out += format_double(s.seg_probability);
  out += ',';
  out += format_double(s.delta);
  out += ',';
  out += format_double(s.rho);
  out += ',';
  out += std::to_string(s.correlation.n);
  out += ',';
  for (std::size_t i = 0; i < s.correlation.upper.size(); ++i) {
    if (i) out += ';';
    out += format_double(s.correlation.upper[i]);
  }
  return out;
}

inline TrajectoryState parse_state(std::string_view row, std::size_t line = 0) {
  auto fields = split(row, ',');
  if (fields.size() != 10) throw parse_error("state row needs 10 fields", line);
  TrajectoryState s;
  s.tick = parse_int(trim(fields[0]), line);
  s.position = {parse_double(trim(fields[1]), line), parse_double(trim(fields[2]), line),
                parse_double(trim(fields[3]), line)};
  s.obstacle_score = parse_double(trim(fields[4]), line);
  s.seg_probability = parse_double(trim(fields[5]), line);
  s.delta = parse_double(trim(fields[6]), line);
  s.rho = parse_double(trim(fields[7]), line);
  s.correlation.n = static_cast<std::size_t>(parse_int(trim(fields[8]), line));
  auto packed = trim(fields[9]);
  if (!packed.empty())
    for (auto tok : split(packed, ';')) s.correlation.upper.push_back(parse_double(trim(tok), line));
  if (s.correlation.upper.size() != s.correlation.n * (s.correlation.n + 1) / 2)
    throw parse_error("packed correlation length does not match n", line);
  return s;
}

enum class PathClass { green, yellow, red };

inline const char* to_string(PathClass c) {
  switch (c) {
    case PathClass::green: return "green";
    case PathClass::yellow: return "yellow";
    case PathClass::red: return "red";
  }
  return "red";
}

struct CandidatePath {
  int id = 0;
  std::vector<Vec3> points;
  double likelihood = 0.0;
  PathClass cls = PathClass::yellow;
};

/// Axis-aligned forbidden region in the ground plane.
struct ForbiddenRect {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
  bool contains(Vec3 p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
};

struct Constraints {
  std::vector<ForbiddenRect> forbidden;

  bool violates(const CandidatePath& c) const {
    for (const auto& r : forbidden)
      for (const auto& p : c.points)
        if (r.contains(p)) return true;
    return false;
  }
};

/// Constraints file: `forbid <x0> <y0> <x1> <y1>` rows, `#` comments.
inline Constraints load_constraints(std::istream& in) {
  Constraints out;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto tok = split(line, ' ');
    std::vector<std::string_view> parts;
    for (auto t : tok)
      if (!trim(t).empty()) parts.push_back(trim(t));
    if (parts.size() != 5 || parts[0] != "forbid")
      throw parse_error("expected 'forbid x0 y0 x1 y1'", lineno);
    ForbiddenRect r{parse_double(parts[1], lineno), parse_double(parts[2], lineno),
                    parse_double(parts[3], lineno), parse_double(parts[4], lineno)};
    if (r.x0 > r.x1) std::swap(r.x0, r.x1);
    if (r.y0 > r.y1) std::swap(r.y0, r.y1);
    out.forbidden.push_back(r);
  }
  return out;
}

/// Classifies in place: constraint violators go red with likelihood 0; the
/// highest-likelihood permitted candidate goes green (ties to the lowest id);
/// the remaining permitted candidates go yellow. The rho series rides along
/// for callers that log it; the class rules do not depend on it.
inline void classify(std::vector<CandidatePath>& candidates, std::span<const double> /*rho_series*/,
                     const Constraints& constraints) {
  if (candidates.empty()) throw std::invalid_argument("classify needs at least one candidate");
  std::size_t best = candidates.size();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    auto& c = candidates[i];
    if (constraints.violates(c)) {
      c.cls = PathClass::red;
      c.likelihood = 0.0;
      continue;
    }
    c.cls = PathClass::yellow;
    if (best == candidates.size() || c.likelihood > candidates[best].likelihood ||
        (c.likelihood == candidates[best].likelihood && c.id < candidates[best].id))
      best = i;
  }
  if (best < candidates.size()) candidates[best].cls = PathClass::green;
}

/// Rolls candidate paths out of the store over the horizon. Entering a cell
/// with recorded history branches on its non-empty heading bins (the branch
/// weight is the bin's share of the cell's crossings); unseen cells continue
/// dead-reckoned. Likelihoods are the branch products normalized to sum 1
/// over the non-red candidates; red candidates carry 0. With an empty store
/// the single dead-reckoned extrapolation is returned. Deterministic.
inline std::vector<CandidatePath> predict_horizon(const PathStore& store,
                                                  std::span<const PathPoint> window,
                                                  std::int64_t horizon_ticks, const Config& cfg,
                                                  const Constraints& constraints = {}) {
  if (horizon_ticks < 1) throw std::invalid_argument("horizon_ticks must be >= 1");
  if (window.empty()) throw insufficient_data_error("predict_horizon needs a current window");

  const PathPoint& now = window.back();
  double dt = static_cast<double>(cfg.sample_period_ms) * 1e-3;
  double speed = now.speed_mps;

  struct Rollout {
    Vec3 pos;
    double heading_rad;
    double product;
    CellKey cell;
    std::vector<Vec3> points;
    int id;
  };

  std::vector<Rollout> active;
  int next_id = 0;
  active.push_back({now.position, now.heading_deg * std::numbers::pi / 180.0, 1.0,
                    store.cell_of(now.position.x, now.position.y),
                    {},
                    next_id++});
  active.front().points.reserve(static_cast<std::size_t>(horizon_ticks));

  for (std::int64_t step = 0; step < horizon_ticks; ++step) {
    std::vector<Rollout> generation;
    generation.reserve(active.size());
    for (auto& r : active) {
      Vec3 next = r.pos + speed * dt * Vec3{std::cos(r.heading_rad), std::sin(r.heading_rad), 0.0};
      CellKey cell = store.cell_of(next.x, next.y);
      if (cell == r.cell) {
        r.pos = next;
        r.points.push_back(next);
        generation.push_back(std::move(r));
        continue;
      }
      auto branches = store.branches(cell);
      if (branches.empty()) {
        r.pos = next;
        r.cell = cell;
        r.points.push_back(next);
        generation.push_back(std::move(r));
        continue;
      }
      for (std::size_t b = 0; b < branches.size(); ++b) {
        Rollout child = r;
        if (b > 0) child.id = next_id++;
        child.pos = next;
        child.cell = cell;
        child.heading_rad = branches[b].heading_rad;
        child.product *= branches[b].fraction;
        child.points.push_back(next);
        generation.push_back(std::move(child));
      }
    }
    if (generation.size() > static_cast<std::size_t>(cfg.predict_max_candidates)) {
      std::sort(generation.begin(), generation.end(), [](const Rollout& a, const Rollout& b) {
        if (a.product != b.product) return a.product > b.product;
        return a.id < b.id;
      });
      generation.resize(static_cast<std::size_t>(cfg.predict_max_candidates));
    }
    std::sort(generation.begin(), generation.end(),
              [](const Rollout& a, const Rollout& b) { return a.id < b.id; });
    active = std::move(generation);
  }

  std::vector<CandidatePath> candidates;
  candidates.reserve(active.size());
  for (auto& r : active)
    candidates.push_back({r.id, std::move(r.points), r.product, PathClass::yellow});

  classify(candidates, {}, constraints);

  double permitted_sum = 0.0;
  for (const auto& c : candidates)
    if (c.cls != PathClass::red) permitted_sum += c.likelihood;
  if (permitted_sum > 0.0)
    for (auto& c : candidates)
      if (c.cls != PathClass::red) c.likelihood /= permitted_sum;
  return candidates;
}

}  // namespace isotraj
