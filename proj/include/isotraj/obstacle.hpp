#pragma once

#include <cmath>
#include <functional>
#include <istream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "isotraj/errors.hpp"
#include "isotraj/frames.hpp"
#include "isotraj/util.hpp"

namespace isotraj {

struct YzRect {
  double y0 = 0.0, y1 = 0.0;
  double z0 = 0.0, z1 = 0.0;

  bool contains(double y, double z) const {
    return y >= y0 && y <= y1 && z >= z0 && z <= z1;
  }
  double area() const { return (y1 - y0) * (z1 - z0); }
  friend bool operator==(const YzRect& a, const YzRect& b) {
    return a.y0 == b.y0 && a.y1 == b.y1 && a.z0 == b.z0 && a.z1 == b.z1;
  }
};

/// Single-valued x = zeta(y, z) over a rectangular YZ region. Either an
/// analytic evaluator or a sampled grid with bilinear interpolation (the form
/// fixture files load into).
class HeightField {
public:
  HeightField() = default;

  static HeightField analytic(std::function<double(double, double)> f, YzRect bounds) {
    HeightField h;
    h.eval_ = std::move(f);
    h.bounds_ = bounds;
    return h;
  }

  /// `values` holds ny rows of nz samples (y-major), nodes at the uniform
  /// lattice spanning the bounds inclusive of the edges.
  static HeightField sampled(YzRect bounds, int ny, int nz, std::vector<double> values) {
    if (ny < 2 || nz < 2) throw std::invalid_argument("sampled height field needs ny, nz >= 2");
    if (values.size() != static_cast<std::size_t>(ny) * nz)
      throw shape_error("sampled height field: ny*nz values expected");
    auto grid = std::make_shared<std::vector<double>>(std::move(values));
    HeightField h;
    h.bounds_ = bounds;
    h.eval_ = [bounds, ny, nz, grid](double y, double z) {
      double u = (y - bounds.y0) / (bounds.y1 - bounds.y0) * (ny - 1);
      double v = (z - bounds.z0) / (bounds.z1 - bounds.z0) * (nz - 1);
      int i = static_cast<int>(std::floor(u));
      int j = static_cast<int>(std::floor(v));
      if (i < 0) i = 0;
      if (i > ny - 2) i = ny - 2;
      if (j < 0) j = 0;
      if (j > nz - 2) j = nz - 2;
      double fu = u - i, fv = v - j;
      const auto& g = *grid;
      double a = g[static_cast<std::size_t>(i) * nz + j];
      double b = g[static_cast<std::size_t>(i) * nz + j + 1];
      double c = g[static_cast<std::size_t>(i + 1) * nz + j];
      double d = g[static_cast<std::size_t>(i + 1) * nz + j + 1];
      return (1 - fu) * ((1 - fv) * a + fv * b) + fu * ((1 - fv) * c + fv * d);
    };
    return h;
  }

  double operator()(double y, double z) const { return eval_(y, z); }
  const YzRect& bounds() const { return bounds_; }
  bool valid() const { return static_cast<bool>(eval_); }

private:
  std::function<double(double, double)> eval_;
  YzRect bounds_;
};

/// Region between two height fields, nested in the X slab [c3, d3].
struct ObstacleDomain {
  HeightField zeta1;
  HeightField zeta2;
  double c3 = 0.0;
  double d3 = 0.0;

  /// Closed-domain membership: boundary points belong to the domain.
  bool contains(Vec3 p) const {
    if (!zeta1.bounds().contains(p.y, p.z)) return false;
    return zeta1(p.y, p.z) <= p.x && p.x <= zeta2(p.y, p.z);
  }
};

/// Checks the nesting invariant c3 <= zeta1 <= zeta2 <= d3 on a probe lattice.
inline ObstacleDomain make_obstacle_domain(HeightField zeta1, HeightField zeta2, double c3,
                                           double d3) {
  if (!zeta1.valid() || !zeta2.valid()) throw std::invalid_argument("height field not set");
  if (!(zeta1.bounds() == zeta2.bounds()))
    throw shape_error("obstacle domain: zeta1/zeta2 bounds differ");
  if (!(c3 <= d3)) throw std::invalid_argument("obstacle domain: c3 > d3");
  const YzRect& b = zeta1.bounds();
  constexpr int probe = 9;
  for (int i = 0; i < probe; ++i)
    for (int j = 0; j < probe; ++j) {
      double y = b.y0 + (b.y1 - b.y0) * i / (probe - 1);
      double z = b.z0 + (b.z1 - b.z0) * j / (probe - 1);
      double lo = zeta1(y, z), hi = zeta2(y, z);
      if (!(c3 - 1e-12 <= lo && lo <= hi + 1e-12 && hi <= d3 + 1e-12))
        throw std::invalid_argument("obstacle domain violates c3 <= zeta1 <= zeta2 <= d3");
    }
  return ObstacleDomain{std::move(zeta1), std::move(zeta2), c3, d3};
}

/// One path section SP: the X slab [c3, d3] over a YZ region, carrying the
/// obstacle domains nested inside it.
struct PathSection {
  YzRect yz;
  double c3 = 0.0;
  double d3 = 0.0;
  std::vector<ObstacleDomain> domains;
};

using ScalarField = std::function<double(Vec3)>;

/// The piecewise indicator-weighted field: f(p) inside any obstacle domain,
/// 0 in the rest of the section.
inline double indicator_eval(const ScalarField& f, const PathSection& section, Vec3 p) {
  if (!(p.x >= section.c3 && p.x <= section.d3 && section.yz.contains(p.y, p.z)))
    throw out_of_domain_error("indicator_eval: point outside the path section");
  for (const auto& d : section.domains)
    if (d.contains(p)) return f(p);
  return 0.0;
}

/// Midpoint tensor quadrature of the indicator-weighted field over the
/// section. The YZ region is split into resolution x resolution cells; the
/// inner X integral runs over the exact [zeta1, zeta2] limits at each cell
/// midpoint with resolution subcells. Accumulation order is fixed, so repeated
/// runs are bit-identical. A zero-measure section reports 0 and raises the
/// degenerate flag.
inline double integrate_section(const ScalarField& f, const PathSection& section, int resolution,
                                bool* degenerate = nullptr) {
  if (resolution < 2) throw std::invalid_argument("integrate_section: resolution >= 2 per axis");
  if (degenerate) *degenerate = false;
  double hy = (section.yz.y1 - section.yz.y0) / resolution;
  double hz = (section.yz.z1 - section.yz.z0) / resolution;
  if (hy <= 0.0 || hz <= 0.0 || section.d3 < section.c3) {
    if (degenerate) *degenerate = true;
    return 0.0;
  }

  double acc = 0.0;
  for (int iy = 0; iy < resolution; ++iy) {
    double y = section.yz.y0 + (iy + 0.5) * hy;
    for (int iz = 0; iz < resolution; ++iz) {
      double z = section.yz.z0 + (iz + 0.5) * hz;
      double inner = 0.0;
      for (const auto& d : section.domains) {
        if (!d.zeta1.bounds().contains(y, z)) continue;
        double lo = std::max(d.zeta1(y, z), section.c3);
        double hi = std::min(d.zeta2(y, z), section.d3);
        if (hi <= lo) continue;
        double hx = (hi - lo) / resolution;
        for (int ix = 0; ix < resolution; ++ix)
          inner += f({lo + (ix + 0.5) * hx, y, z}) * hx;
      }
      acc += inner * hy * hz;
    }
  }
  return acc;
}

/// Sum of the per-section integrals (the multi-domain decomposition).
inline double integrate_multi(const ScalarField& f, const std::vector<PathSection>& sections,
                              int resolution, bool* degenerate = nullptr) {
  if (degenerate) *degenerate = false;
  double acc = 0.0;
  for (const auto& s : sections) {
    bool deg = false;
    acc += integrate_section(f, s, resolution, &deg);
    if (deg && degenerate) *degenerate = true;
  }
  return acc;
}

/// Loads an obstacle fixture:
///
///   # comments and blank lines allowed
///   y0 y1 z0 z1        YZ bounds
///   c3 d3              X slab
///   ny nz              sample grid (>= 2 each)
///   ny rows of nz zeta1 samples
///   ny rows of nz zeta2 samples
///
/// Samples sit on the uniform lattice spanning the bounds; evaluation is
/// bilinear between them.
inline ObstacleDomain load_obstacle_fixture(std::istream& in) {
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto t = trim(raw);
    if (t.empty() || t.front() == '#') continue;
    lines.emplace_back(lineno, std::string(t));
  }
  if (lines.empty()) throw empty_input_error("obstacle fixture is empty");

  std::size_t cursor = 0;
  auto next_numbers = [&](std::size_t expect) {
    if (cursor >= lines.size())
      throw parse_error("obstacle fixture truncated", lines.back().first);
    auto [no, text] = lines[cursor++];
    std::vector<double> vals;
    for (auto tok : split(text, ' ')) {
      tok = trim(tok);
      if (tok.empty()) continue;
      vals.push_back(parse_double(tok, no));
    }
    if (vals.size() != expect)
      throw parse_error("expected " + std::to_string(expect) + " values", no);
    return vals;
  };

  auto b = next_numbers(4);
  YzRect bounds{b[0], b[1], b[2], b[3]};
  auto slab = next_numbers(2);
  auto dims = next_numbers(2);
  int ny = static_cast<int>(dims[0]);
  int nz = static_cast<int>(dims[1]);
  if (ny < 2 || nz < 2) throw parse_error("grid dims must be >= 2", lines[cursor - 1].first);

  auto read_grid = [&]() {
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(ny) * nz);
    for (int r = 0; r < ny; ++r) {
      auto row = next_numbers(static_cast<std::size_t>(nz));
      g.insert(g.end(), row.begin(), row.end());
    }
    return g;
  };
  auto z1 = HeightField::sampled(bounds, ny, nz, read_grid());
  auto z2 = HeightField::sampled(bounds, ny, nz, read_grid());
  return make_obstacle_domain(std::move(z1), std::move(z2), slab[0], slab[1]);
}

/// Section wrapping a single loaded domain: SP = [c3, d3] x the domain's YZ bounds.
inline PathSection section_around(const ObstacleDomain& d) {
  return PathSection{d.zeta1.bounds(), d.c3, d.d3, {d}};
}

/// Fraction of the section slab occupied by obstacle domains, in [0, 1].
/// This is the obstacle term fed into the vibration signal.
inline double section_fill_fraction(const PathSection& section, int resolution = 16) {
  double volume = section.yz.area() * (section.d3 - section.c3);
  if (volume <= 0.0) return 0.0;
  double filled = integrate_section([](Vec3) { return 1.0; }, section, resolution);
  double frac = filled / volume;
  if (frac < 0.0) frac = 0.0;
  if (frac > 1.0) frac = 1.0;
  return frac;
}

}  // namespace isotraj
