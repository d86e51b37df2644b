#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "isotraj/errors.hpp"
#include "isotraj/surface.hpp"

namespace isotraj {

/// Chord graph over the mini-nodes of a window of consecutive surfaces.
///
/// Node ids are linear: surface_index * nodes_per_surface + row * cols + col.
/// Edges are the lattice adjacencies: row/col neighbours within a surface and
/// the same (row, col) node on consecutive surfaces. A chord is a sequence of
/// edges where consecutive edges share no endpoint ("not adjacent"); chords
/// may revisit nodes and may close on themselves.
struct ChordGraph {
  int surfaces = 0;
  int rows = 0;
  int cols = 0;
  std::vector<std::pair<int, int>> edges;        // endpoint ids, first < second
  std::vector<std::vector<int>> chords;          // flattened node pairs per edge: u0,v0,u1,v1,...

  int nodes_per_surface() const { return rows * cols; }
  int node_count() const { return surfaces * rows * cols; }

  /// Surface indices (within the window) a chord touches.
  std::vector<int> chord_surfaces(std::size_t chord_id) const {
    if (chord_id >= chords.size()) throw not_found_error("unknown chord");
    std::vector<int> out;
    for (int node : chords[chord_id]) {
      int s = node / nodes_per_surface();
      if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    }
    std::sort(out.begin(), out.end());
    return out;
  }
};

struct ChordOptions {
  int max_edges = 4;  // chord length cap, in edges
};

/// Deterministic chord enumeration: edges sorted lexicographically, DFS in
/// increasing edge order, each chord kept in its canonical direction (the
/// sequence not greater than its reverse). Equal inputs yield equal lists.
inline ChordGraph build_chord_graph(std::span<const IsochronousSurface> window,
                                    ChordOptions opt = {}) {
  if (window.size() < 2) throw insufficient_data_error("chord graph needs >= 2 surfaces");
  const GridSpec grid = window[0].grid;
  for (const auto& s : window)
    if (!(s.grid == grid)) throw shape_error("chord graph: grid mismatch across window");
  if (opt.max_edges < 2) throw std::invalid_argument("chords need at least 2 edges");

  ChordGraph g;
  g.surfaces = static_cast<int>(window.size());
  g.rows = grid.rows;
  g.cols = grid.cols;
  const int nps = g.nodes_per_surface();
  auto id = [&](int s, int r, int c) { return s * nps + r * grid.cols + c; };

  for (int s = 0; s < g.surfaces; ++s)
    for (int r = 0; r < grid.rows; ++r)
      for (int c = 0; c < grid.cols; ++c) {
        if (c + 1 < grid.cols) g.edges.emplace_back(id(s, r, c), id(s, r, c + 1));
        if (r + 1 < grid.rows) g.edges.emplace_back(id(s, r, c), id(s, r + 1, c));
        if (s + 1 < g.surfaces) g.edges.emplace_back(id(s, r, c), id(s + 1, r, c));
      }
  std::sort(g.edges.begin(), g.edges.end());

  const std::size_t ne = g.edges.size();
  auto share_endpoint = [&](std::size_t a, std::size_t b) {
    const auto& [a1, a2] = g.edges[a];
    const auto& [b1, b2] = g.edges[b];
    return a1 == b1 || a1 == b2 || a2 == b1 || a2 == b2;
  };

  std::vector<std::size_t> seq;
  auto emit = [&]() {
    // canonical direction only: drop sequences greater than their reverse
    std::vector<std::size_t> rev(seq.rbegin(), seq.rend());
    if (rev < seq) return;
    std::vector<int> nodes;
    nodes.reserve(seq.size() * 2);
    for (std::size_t e : seq) {
      nodes.push_back(g.edges[e].first);
      nodes.push_back(g.edges[e].second);
    }
    g.chords.push_back(std::move(nodes));
  };

  auto extend = [&](auto&& self) -> void {
    if (seq.size() >= 2) emit();
    if (seq.size() >= static_cast<std::size_t>(opt.max_edges)) return;
    for (std::size_t e = 0; e < ne; ++e) {
      if (share_endpoint(seq.back(), e)) continue;
      seq.push_back(e);
      self(self);
      seq.pop_back();
    }
  };
  for (std::size_t e = 0; e < ne; ++e) {
    seq.assign(1, e);
    extend(extend);
  }
  return g;
}

/// One tick's disturbance state for a surface.
struct VibrationSample {
  std::int64_t tick = 0;
  double delta = 0.0;  // dimensionless vibration amplitude, >= 0
  double rho = 0.0;    // propagation probability in [0, 1]
};

struct DeltaParams {
  double w_v = 1.0;
  double w_a = 1.0;
  double w_o = 1.0;
  double v_ref = 13.9;  // m/s, top of the 0..50 km/h operating band
  double a_ref = 3.0;   // m/s^2
};

/// Vibration amplitude: weighted sum of the velocity and acceleration norms
/// (normalized by the reference scales) and the obstacle fill score. Linear in
/// each term, non-negative for non-negative inputs.
inline double vibration_delta(double v_norm, double a_norm, double omega_score,
                              const DeltaParams& p = {}) {
  if (v_norm < 0.0 || a_norm < 0.0 || omega_score < 0.0)
    throw std::invalid_argument("vibration_delta: norms must be non-negative");
  if (p.w_v < 0.0 || p.w_a < 0.0 || p.w_o < 0.0)
    throw std::invalid_argument("vibration_delta: weights must be non-negative");
  if (!(p.v_ref > 0.0) || !(p.a_ref > 0.0))
    throw std::invalid_argument("vibration_delta: reference scales must be positive");
  return p.w_v * (v_norm / p.v_ref) + p.w_a * (a_norm / p.a_ref) + p.w_o * omega_score;
}

/// Applies a chord disturbance to every surface of the trajectory within one
/// processing step: surface i gains amount * gamma^d where d is its tick
/// distance to the nearest surface the chord touches. With amount > 0 and
/// gamma > 0 no surface is left unchanged. `window_offset` places the chord
/// graph's window inside the trajectory.
inline void propagate_disturbance(std::vector<VibrationSample>& trajectory,
                                  const ChordGraph& graph, std::size_t chord_id, double amount,
                                  double gamma = 0.8, std::size_t window_offset = 0) {
  if (chord_id >= graph.chords.size()) throw not_found_error("unknown chord");
  if (!std::isfinite(amount)) throw std::invalid_argument("disturbance amount not finite");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  auto touched = graph.chord_surfaces(chord_id);
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    std::size_t dist = SIZE_MAX;
    for (int s : touched) {
      std::size_t t = window_offset + static_cast<std::size_t>(s);
      std::size_t d = (i > t) ? i - t : t - i;
      dist = std::min(dist, d);
    }
    trajectory[i].delta += amount * std::pow(gamma, static_cast<double>(dist));
  }
}

/// rho = 1 - exp(-mean(deltas)) over the recent window; monotone in the mean
/// and bounded in [0, 1). A traveled tick reports exactly 1.
inline double propagation_probability(std::span<const double> deltas, bool traveled = false) {
  if (traveled) return 1.0;
  if (deltas.empty()) throw insufficient_data_error("propagation_probability: empty window");
  double mean = 0.0;
  for (double d : deltas) mean += d;
  mean /= static_cast<double>(deltas.size());
  return 1.0 - std::exp(-mean);
}

/// Strict threshold test ("higher than"): equality does not flag.
inline bool flag_if_segmentation(double rho, double rho_min) { return rho > rho_min; }

/// Chord whose endpoints' surfaces show the smallest |delta| variation across
/// the window; ties resolve to the lowest chord id. `window_deltas` holds one
/// delta per window surface.
inline std::size_t min_variation_chord(const ChordGraph& graph,
                                       std::span<const double> window_deltas) {
  if (graph.chords.empty()) throw not_found_error("chord graph has no chords");
  if (window_deltas.size() != static_cast<std::size_t>(graph.surfaces))
    throw shape_error("min_variation_chord: one delta per window surface expected");
  std::size_t best = 0;
  double best_var = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < graph.chords.size(); ++i) {
    auto touched = graph.chord_surfaces(i);
    double var = std::abs(window_deltas[static_cast<std::size_t>(touched.back())] -
                          window_deltas[static_cast<std::size_t>(touched.front())]);
    if (var < best_var) {
      best_var = var;
      best = i;
    }
  }
  return best;
}

}  // namespace isotraj
