#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "isotraj/chords.hpp"
#include "isotraj/config.hpp"
#include "isotraj/ingest.hpp"
#include "isotraj/obstacle.hpp"
#include "isotraj/predict.hpp"
#include "isotraj/segmentation.hpp"
#include "isotraj/store.hpp"
#include "isotraj/surface.hpp"

namespace isotraj {

struct DayMetrics {
  int day = 0;
  std::size_t ticks = 0;
  std::size_t predictions = 0;
  double mean_rms_m = 0.0;  // mean over predictions of the horizon RMS error
  std::size_t flagged = 0;  // segmentation flags raised
};

struct PredictionRecord {
  int day = 0;
  std::int64_t tick = 0;
  std::vector<CandidatePath> candidates;
  std::optional<std::size_t> chord;  // min |delta| variation chord of the window
  double rms_m = 0.0;
  bool has_truth = false;
};

struct ReplayOutputs {
  std::string state_csv;
  nlohmann::ordered_json geojson;
  std::string report_text;
  std::string report_csv;
  std::vector<DayMetrics> days;
  std::vector<PredictionRecord> predictions;
};

namespace detail {

inline double rect_distance_2d(double x, double y, double x0, double x1, double y0, double y1) {
  double dx = std::max({x0 - x, 0.0, x - x1});
  double dy = std::max({y0 - y, 0.0, y - y1});
  return std::hypot(dx, dy);
}

/// Max fill fraction among obstacle sections within lookahead of the position.
struct ObstacleScorer {
  struct Entry {
    PathSection section;
    double fill = 0.0;
  };
  std::vector<Entry> entries;
  double lookahead_m = 20.0;

  ObstacleScorer(const std::vector<PathSection>& sections, const Config& cfg)
      : lookahead_m(cfg.obstacle_lookahead_m) {
    for (const auto& s : sections)
      entries.push_back({s, section_fill_fraction(s, cfg.obstacle_resolution)});
  }

  double score(Vec3 p) const {
    double best = 0.0;
    for (const auto& e : entries) {
      double d = rect_distance_2d(p.x, p.y, e.section.c3, e.section.d3, e.section.yz.y0,
                                  e.section.yz.y1);
      if (d <= lookahead_m) best = std::max(best, e.fill);
    }
    return best;
  }
};

inline GridSpec pick_grid(const Config& cfg, double speed_mps, double rho,
                          double green_likelihood) {
  GridSpec base = cfg.grid_spec();
  if (speed_mps < cfg.refine_stop_speed_mps) return scaled_grid(base, 2, 2);
  if (rho > cfg.refine_rho_threshold || green_likelihood < cfg.refine_likelihood_threshold)
    return scaled_grid(base, 4, 4);
  return base;
}

}  // namespace detail

/// Full pipeline over one or more day logs against a shared store: per-tick
/// state rows, periodic candidate predictions scored against the log's own
/// continuation, and per-day summary metrics. Each day's trajectory is folded
/// into the store after that day's predictions, so day 1 runs cold and later
/// days benefit from history. All emitted text is deterministic.
inline ReplayOutputs replay(const std::vector<ParsedLog>& day_logs, const Config& cfg,
                            const SpeedModel& speed, PathStore& store,
                            const Constraints& constraints = {},
                            const std::vector<PathSection>& obstacles = {}) {
  if (day_logs.empty()) throw insufficient_data_error("replay needs at least one day log");
  SensorSpec sensor = cfg.sensor_spec();
  DeltaParams delta_params = cfg.delta_params();
  ManeuverParams maneuver_params = cfg.maneuver_params();
  detail::ObstacleScorer scorer(obstacles, cfg);
  double period_s = static_cast<double>(cfg.sample_period_ms) * 1e-3;

  ReplayOutputs out;
  out.state_csv =
      "day,tick,x,y,z,heading_deg,speed_mps,maneuver,nodes,obstacle_score,"
      "seg_probability,delta,rho,flagged,seg_n,k_upper\n";
  out.geojson = nlohmann::ordered_json{{"type", "FeatureCollection"},
                                       {"features", nlohmann::ordered_json::array()}};

  for (std::size_t day_idx = 0; day_idx < day_logs.size(); ++day_idx) {
    int day = static_cast<int>(day_idx) + 1;
    auto path = dead_reckon(day_logs[day_idx], sensor, speed, cfg.sample_period_ms);

    DayMetrics metrics;
    metrics.day = day;
    metrics.ticks = path.size();
    double rms_sum = 0.0;
    std::size_t rms_count = 0;

    std::deque<double> heading_changes;  // trailing signed per-tick changes, deg
    std::deque<double> deltas;           // trailing vibration amplitudes
    std::deque<SegmentationSurface> tracked;
    std::vector<double> headings, speeds;
    headings.reserve(path.size());
    speeds.reserve(path.size());

    std::optional<IsochronousSurface> prev_surface;
    double last_rho = 0.0;
    double last_green_likelihood = 1.0;

    for (std::size_t k = 0; k < path.size(); ++k) {
      const PathPoint& pt = path[k];
      headings.push_back(pt.heading_deg);
      speeds.push_back(pt.speed_mps);

      double change =
          k == 0 ? 0.0 : detail::wrap_deg(pt.heading_deg - path[k - 1].heading_deg);
      heading_changes.push_back(change);
      if (heading_changes.size() > static_cast<std::size_t>(cfg.segmentation_window_ticks))
        heading_changes.pop_front();

      GridSpec grid = detail::pick_grid(cfg, pt.speed_mps, last_rho, last_green_likelihood);
      if (prev_surface && !(prev_surface->grid == grid)) {
        prev_surface = grid.count() >= prev_surface->grid.count()
                           ? refine_grid(*prev_surface, grid)
                           : coarsen_grid(*prev_surface, grid);
      }
      FramePose pose{pt.position, rotation_from_yaw(pt.heading_deg * std::numbers::pi / 180.0),
                     pt.tick * cfg.sample_period_ms};
      IsochronousSurface surface = build_surface(pose, grid, pt.tick);

      double v_norm = pt.speed_mps;
      double a_norm = 0.0;
      if (prev_surface && surface.tick == prev_surface->tick + 1) {
        surface = with_node_velocities(*prev_surface, surface, period_s);
        auto vm = velocity_iso_matrix(*prev_surface, surface, period_s);
        const Mat3& center = vm.at((vm.rows - 1) / 2, (vm.cols - 1) / 2);
        v_norm = block_velocity(center).norm();
        a_norm = block_acceleration(center).norm();
      }

      double omega_score = scorer.score(pt.position);
      double delta = vibration_delta(v_norm, a_norm, omega_score, delta_params);
      deltas.push_back(delta);
      if (deltas.size() > static_cast<std::size_t>(cfg.chords_window_ticks)) deltas.pop_front();

      std::vector<double> delta_window(deltas.begin(), deltas.end());
      double rho = propagation_probability(delta_window);

      auto window_samples = std::vector<double>(heading_changes.begin(), heading_changes.end());
      SegmentationSurface seg = make_segmentation_surface(pt.tick, window_samples);
      double seg_probability = 0.0;
      try {
        seg_probability = segmentation_probability(seg, cfg.segmentation_flag_lo_deg,
                                                   cfg.segmentation_flag_hi_deg);
      } catch (const degenerate_distribution_error&) {
        seg_probability = 0.0;  // point mass outside the straight band
      }

      bool flagged = flag_if_segmentation(rho, cfg.chords_rho_min);
      if (flagged &&
          window_samples.size() == static_cast<std::size_t>(cfg.segmentation_window_ticks)) {
        tracked.push_back(seg);
        if (tracked.size() > static_cast<std::size_t>(cfg.segmentation_max_surfaces))
          tracked.pop_front();
      }
      if (flagged) ++metrics.flagged;

      CorrelationMatrix correlation;
      if (!tracked.empty())
        correlation = correlation_matrix({tracked.begin(), tracked.end()});

      StateInputs inputs;
      inputs.tick = pt.tick;
      inputs.position = pt.position;
      inputs.correlation = correlation;
      inputs.obstacle_score = omega_score;
      inputs.seg_probability = seg_probability;
      inputs.delta = delta;
      inputs.rho = rho;
      TrajectoryState state = assemble_state(inputs);

      std::string maneuver = "na";
      if (headings.size() >= maneuver_params.min_window) {
        std::size_t w = maneuver_params.min_window;
        std::span<const double> hw(headings.data() + headings.size() - w, w);
        std::span<const double> sw(speeds.data() + speeds.size() - w, w);
        maneuver = to_string(detect_maneuver(hw, sw, maneuver_params));
      }

      auto serialized = serialize_state(state);
      auto fields = split(serialized, ',');
      // day,tick,x,y,z,heading,speed,maneuver,nodes,obstacle,segp,delta,rho,flagged,seg_n,k
      out.state_csv += std::to_string(day);
      for (int f = 0; f < 4; ++f) {
        out.state_csv += ',';
        out.state_csv += std::string(fields[static_cast<std::size_t>(f)]);
      }
      out.state_csv += ',';
      out.state_csv += format_double(pt.heading_deg);
      out.state_csv += ',';
      out.state_csv += format_double(pt.speed_mps);
      out.state_csv += ',';
      out.state_csv += maneuver;
      out.state_csv += ',';
      out.state_csv += std::to_string(grid.count());
      for (std::size_t f = 4; f < fields.size(); ++f) {
        out.state_csv += ',';
        if (f == 8) {
          out.state_csv += flagged ? "1" : "0";
          out.state_csv += ',';
        }
        out.state_csv += std::string(fields[f]);
      }
      out.state_csv += '\n';

      if (k % static_cast<std::size_t>(cfg.predict_interval_ticks) == 0) {
        std::span<const PathPoint> win(path.data(), k + 1);
        auto candidates =
            predict_horizon(store, win, cfg.predict_horizon_ticks, cfg, constraints);

        PredictionRecord rec;
        rec.day = day;
        rec.tick = pt.tick;

        if (prev_surface) {
          std::vector<IsochronousSurface> pair{*prev_surface, surface};
          auto graph = build_chord_graph(pair, {cfg.chords_profile_max_edges});
          if (!graph.chords.empty()) {
            std::vector<double> wdeltas{deltas.size() > 1 ? deltas[deltas.size() - 2] : delta,
                                        delta};
            rec.chord = min_variation_chord(graph, wdeltas);
          }
        }

        const CandidatePath* green = nullptr;
        for (const auto& c : candidates)
          if (c.cls == PathClass::green) green = &c;
        if (green) last_green_likelihood = green->likelihood;

        if (green && k + 1 < path.size()) {
          double sq = 0.0;
          std::size_t n = 0;
          for (std::size_t i = 0; i < green->points.size() && k + 1 + i < path.size(); ++i) {
            Vec3 diff = green->points[i] - path[k + 1 + i].position;
            sq += diff.x * diff.x + diff.y * diff.y + diff.z * diff.z;
            ++n;
          }
          if (n > 0) {
            rec.rms_m = std::sqrt(sq / static_cast<double>(n));
            rec.has_truth = true;
            rms_sum += rec.rms_m;
            ++rms_count;
          }
        }

        for (const auto& c : candidates) {
          nlohmann::ordered_json coords = nlohmann::ordered_json::array();
          for (const auto& p : c.points) coords.push_back({p.x, p.y});
          nlohmann::ordered_json props{{"day", day},         {"tick", pt.tick},
                                       {"id", c.id},         {"class", to_string(c.cls)},
                                       {"likelihood", c.likelihood}};
          if (rec.chord) props["chord"] = *rec.chord;
          out.geojson["features"].push_back(
              {{"type", "Feature"},
               {"geometry",
                {{"type", "LineString"}, {"coordinates", std::move(coords)}}},
               {"properties", std::move(props)}});
        }
        rec.candidates = std::move(candidates);
        ++metrics.predictions;
        out.predictions.push_back(std::move(rec));
      }

      prev_surface = std::move(surface);
      last_rho = rho;
    }

    metrics.mean_rms_m = rms_count ? rms_sum / static_cast<double>(rms_count) : 0.0;
    out.days.push_back(metrics);
    store.update(path, day);
  }

  out.report_text = "replay report\n";
  out.report_csv = "day,ticks,predictions,mean_rms_m,flagged\n";
  for (const auto& d : out.days) {
    out.report_text += "day " + std::to_string(d.day) + ": ticks=" + std::to_string(d.ticks) +
                       " predictions=" + std::to_string(d.predictions) +
                       " mean_rms_m=" + format_double(d.mean_rms_m) +
                       " flagged=" + std::to_string(d.flagged) + "\n";
    out.report_csv += std::to_string(d.day) + "," + std::to_string(d.ticks) + "," +
                      std::to_string(d.predictions) + "," + format_double(d.mean_rms_m) + "," +
                      std::to_string(d.flagged) + "\n";
  }
  return out;
}

}  // namespace isotraj
