#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "isotraj/errors.hpp"
#include "isotraj/frames.hpp"

namespace isotraj {

/// Nominal spacing between consecutive surfaces, seconds.
constexpr double default_sample_period_s = 0.020;

struct GridSpec {
  int rows = 3;
  int cols = 3;
  double spacing = 0.5;  // meters between neighbouring mini-nodes

  int count() const { return rows * cols; }
  /// Standard configurations carry 4, 9 or 16 mini-nodes; anything else is
  /// accepted but reported as non-standard.
  bool is_standard() const {
    int n = count();
    return n == 4 || n == 9 || n == 16;
  }
  friend bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.rows == b.rows && a.cols == b.cols && a.spacing == b.spacing;
  }
};

inline void validate_grid(const GridSpec& g) {
  if (g.rows < 1 || g.cols < 1) throw std::invalid_argument("grid needs rows, cols >= 1");
  if (!(g.spacing > 0.0) || !std::isfinite(g.spacing))
    throw std::invalid_argument("grid spacing must be positive");
}

/// Target spec for switching a surface between node counts while keeping the
/// lattice extent; spacing scales by (rows-1)/(new_rows-1).
inline GridSpec scaled_grid(const GridSpec& g, int rows, int cols) {
  GridSpec out{rows, cols, g.spacing};
  if (rows > 1 && g.rows > 1) out.spacing = g.spacing * double(g.rows - 1) / double(rows - 1);
  validate_grid(out);
  return out;
}

struct MiniNode {
  int row = 0;
  int col = 0;
  Vec3 position;  // world frame, meters
  Vec3 velocity;  // world frame, m/s
};

/// One 20 ms trajectory slice: the pose plus a planar lattice of mini-nodes in
/// the pose's local YZ plane (transverse to travel), row-major.
struct IsochronousSurface {
  std::int64_t tick = 0;
  FramePose pose;
  GridSpec grid;
  std::vector<MiniNode> nodes;

  const MiniNode& at(int r, int c) const { return nodes[static_cast<std::size_t>(r) * grid.cols + c]; }
  MiniNode& at(int r, int c) { return nodes[static_cast<std::size_t>(r) * grid.cols + c]; }
};

using Mat3 = std::array<std::array<double, 3>, 3>;

/// Grid-of-blocks velocity matrix: one 3x3 block per mini-node, row-major.
/// Block row 0 holds the node velocity, row 1 the finite-difference
/// acceleration, row 2 is reserved (zero).
struct VelocityIsoMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<Mat3> blocks;

  const Mat3& at(int r, int c) const { return blocks[static_cast<std::size_t>(r) * cols + c]; }
};

inline Vec3 block_velocity(const Mat3& b) { return {b[0][0], b[0][1], b[0][2]}; }
inline Vec3 block_acceleration(const Mat3& b) { return {b[1][0], b[1][1], b[1][2]}; }

/// Builds the lattice: node (r, c) sits at local
/// (0, (c - (cols-1)/2) * spacing, (r - (rows-1)/2) * spacing), so the grid is
/// centered on pose.origin and spans (cols-1)*spacing x (rows-1)*spacing in
/// the local YZ plane. Velocities start at zero.
inline IsochronousSurface build_surface(const FramePose& pose, const GridSpec& grid,
                                        std::int64_t tick = 0) {
  validate_grid(grid);
  IsochronousSurface s;
  s.tick = tick;
  s.pose = pose;
  s.grid = grid;
  s.nodes.reserve(static_cast<std::size_t>(grid.count()));
  double cy = 0.5 * (grid.cols - 1);
  double cz = 0.5 * (grid.rows - 1);
  for (int r = 0; r < grid.rows; ++r)
    for (int c = 0; c < grid.cols; ++c) {
      Vec3 local{0.0, (c - cy) * grid.spacing, (r - cz) * grid.spacing};
      s.nodes.push_back({r, c, transform_point(pose, local), Vec3{}});
    }
  return s;
}

/// Per-node kinematics between two consecutive surfaces. Velocities are the
/// position finite differences over one sample period; accelerations difference
/// the velocities already stored on the nodes.
inline VelocityIsoMatrix velocity_iso_matrix(const IsochronousSurface& prev,
                                             const IsochronousSurface& next,
                                             double period_s = default_sample_period_s) {
  if (!(prev.grid == next.grid)) throw shape_error("velocity_iso_matrix: grid mismatch");
  if (next.tick != prev.tick + 1)
    throw sequence_error("velocity_iso_matrix: surfaces must be consecutive ticks");
  if (!(period_s > 0.0)) throw std::invalid_argument("sample period must be positive");

  VelocityIsoMatrix m;
  m.rows = prev.grid.rows;
  m.cols = prev.grid.cols;
  m.blocks.resize(prev.nodes.size());
  for (std::size_t i = 0; i < prev.nodes.size(); ++i) {
    Vec3 v = (next.nodes[i].position - prev.nodes[i].position) / period_s;
    Vec3 a = (next.nodes[i].velocity - prev.nodes[i].velocity) / period_s;
    m.blocks[i] = Mat3{{{v.x, v.y, v.z}, {a.x, a.y, a.z}, {0.0, 0.0, 0.0}}};
  }
  return m;
}

/// Copy of `next` with node velocities set from the position differences
/// against `prev`; feeds the acceleration row of the next tick's matrix.
inline IsochronousSurface with_node_velocities(const IsochronousSurface& prev,
                                               const IsochronousSurface& next,
                                               double period_s = default_sample_period_s) {
  if (!(prev.grid == next.grid)) throw shape_error("with_node_velocities: grid mismatch");
  IsochronousSurface out = next;
  for (std::size_t i = 0; i < out.nodes.size(); ++i)
    out.nodes[i].velocity = (next.nodes[i].position - prev.nodes[i].position) / period_s;
  return out;
}

namespace detail {

// Samples the source lattice at target index R of T points along an axis of S
// points. Integral parametric coordinates resolve to exact source nodes.
struct AxisSample {
  int i0;
  int i1;
  double frac;  // 0 when the sample hits a source node exactly
};

inline AxisSample axis_sample(int target_index, int target_count, int source_count) {
  if (source_count == 1) return {0, 0, 0.0};
  double u;
  if (target_count == 1)
    u = 0.5 * (source_count - 1);
  else
    u = double(target_index) * double(source_count - 1) / double(target_count - 1);
  int i0 = static_cast<int>(std::floor(u));
  if (i0 >= source_count - 1) i0 = source_count - 2;
  double frac = u - i0;
  if (frac == 0.0) return {i0, i0, 0.0};
  if (frac == 1.0) return {i0 + 1, i0 + 1, 0.0};
  return {i0, i0 + 1, frac};
}

inline IsochronousSurface resample_lattice(const IsochronousSurface& s, const GridSpec& target) {
  IsochronousSurface out;
  out.tick = s.tick;
  out.pose = s.pose;
  out.grid = target;
  out.nodes.reserve(static_cast<std::size_t>(target.count()));
  for (int r = 0; r < target.rows; ++r) {
    AxisSample ar = axis_sample(r, target.rows, s.grid.rows);
    for (int c = 0; c < target.cols; ++c) {
      AxisSample ac = axis_sample(c, target.cols, s.grid.cols);
      MiniNode n;
      n.row = r;
      n.col = c;
      if (ar.frac == 0.0 && ac.frac == 0.0) {
        n.position = s.at(ar.i0, ac.i0).position;
        n.velocity = s.at(ar.i0, ac.i0).velocity;
      } else {
        auto lerp = [](Vec3 a, Vec3 b, double t) { return (1.0 - t) * a + t * b; };
        Vec3 p0 = lerp(s.at(ar.i0, ac.i0).position, s.at(ar.i0, ac.i1).position, ac.frac);
        Vec3 p1 = lerp(s.at(ar.i1, ac.i0).position, s.at(ar.i1, ac.i1).position, ac.frac);
        n.position = lerp(p0, p1, ar.frac);
        Vec3 v0 = lerp(s.at(ar.i0, ac.i0).velocity, s.at(ar.i0, ac.i1).velocity, ac.frac);
        Vec3 v1 = lerp(s.at(ar.i1, ac.i0).velocity, s.at(ar.i1, ac.i1).velocity, ac.frac);
        n.velocity = lerp(v0, v1, ar.frac);
      }
      out.nodes.push_back(n);
    }
  }
  return out;
}

}  // namespace detail

/// Bilinear interpolation of node positions onto a finer lattice. Corner
/// nodes (and any node the target lattice shares with the source) are copied
/// exactly.
inline IsochronousSurface refine_grid(const IsochronousSurface& s, const GridSpec& target) {
  validate_grid(target);
  if (target.count() < s.grid.count())
    throw std::invalid_argument("refine_grid: target is smaller, use coarsen_grid");
  return detail::resample_lattice(s, target);
}

/// Subsampling onto a coarser lattice, exact where the source lattice admits
/// it (corners always, center when the node counts line up), bilinear else.
inline IsochronousSurface coarsen_grid(const IsochronousSurface& s, const GridSpec& target) {
  validate_grid(target);
  if (target.count() > s.grid.count())
    throw std::invalid_argument("coarsen_grid: target is larger, use refine_grid");
  return detail::resample_lattice(s, target);
}

}  // namespace isotraj
