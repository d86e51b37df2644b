#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "isotraj/errors.hpp"

namespace isotraj {

/// A surface flagged as a potential trajectory-change point, reduced to a
/// scalar random variable. The observations are the signed per-tick heading
/// changes (degrees) across the surface's sample window.
struct SegmentationSurface {
  std::int64_t id = 0;
  std::vector<double> samples;
  double mean = 0.0;
  double sigma = 0.0;
};

/// Two-pass mean / standard deviation (population, n divisor).
inline SegmentationSurface make_segmentation_surface(std::int64_t id,
                                                     std::vector<double> samples) {
  if (samples.empty()) throw insufficient_data_error("segmentation surface needs samples");
  SegmentationSurface s;
  s.id = id;
  s.samples = std::move(samples);
  double sum = 0.0;
  for (double x : s.samples) sum += x;
  s.mean = sum / static_cast<double>(s.samples.size());
  double sq = 0.0;
  for (double x : s.samples) sq += (x - s.mean) * (x - s.mean);
  s.sigma = std::sqrt(sq / static_cast<double>(s.samples.size()));
  return s;
}

/// Covariance of two surfaces' centered observations over their shared sample
/// window (population, n divisor). Symmetric by construction: the summation
/// order is the sample order for both arguments.
inline double correlation(const SegmentationSurface& xi, const SegmentationSurface& xj) {
  if (xi.samples.size() != xj.samples.size())
    throw shape_error("correlation: sample count mismatch");
  if (xi.samples.size() < 2)
    throw insufficient_data_error("correlation needs at least 2 samples");
  double acc = 0.0;
  for (std::size_t k = 0; k < xi.samples.size(); ++k)
    acc += (xi.samples[k] - xi.mean) * (xj.samples[k] - xj.mean);
  return acc / static_cast<double>(xi.samples.size());
}

/// Dispersal D^2 = self-correlation; the diagonal of the correlation matrix.
inline double dispersal(const SegmentationSurface& xi) { return correlation(xi, xi); }

/// Symmetric K matrix stored as the packed upper triangle, row-major:
/// k(0,0), k(0,1), ..., k(0,n-1), k(1,1), ...
struct CorrelationMatrix {
  std::size_t n = 0;
  std::vector<double> upper;

  double at(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    return upper[i * n - i * (i + 1) / 2 + j];
  }

  std::vector<std::vector<double>> full() const {
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m[i][j] = at(i, j);
    return m;
  }

  friend bool operator==(const CorrelationMatrix& a, const CorrelationMatrix& b) {
    return a.n == b.n && a.upper == b.upper;
  }
};

inline CorrelationMatrix correlation_matrix(const std::vector<SegmentationSurface>& surfaces) {
  if (surfaces.empty()) throw insufficient_data_error("correlation_matrix needs n >= 1");
  for (const auto& s : surfaces)
    if (s.samples.size() != surfaces.front().samples.size())
      throw shape_error("correlation_matrix: inconsistent sample lengths");
  CorrelationMatrix m;
  m.n = surfaces.size();
  m.upper.reserve(m.n * (m.n + 1) / 2);
  for (std::size_t i = 0; i < m.n; ++i)
    for (std::size_t j = i; j < m.n; ++j) m.upper.push_back(correlation(surfaces[i], surfaces[j]));
  return m;
}

/// Standard normal CDF via the complementary error function; absolute error
/// below 1e-12 over the whole axis.
inline double std_normal_cdf(double x) {
  if (std::isnan(x)) throw std::invalid_argument("std_normal_cdf: NaN input");
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

/// P(x1 < S < x2) for the surface's Gaussian model. For sigma = 0 the
/// distribution is a point mass at the mean: interval strictly containing the
/// mean gives 1, the mean sitting on an endpoint gives 0, anything else is a
/// degenerate-distribution error.
inline double segmentation_probability(const SegmentationSurface& s, double x1, double x2) {
  if (x1 > x2) throw invalid_interval_error("segmentation_probability: x1 > x2");
  if (s.sigma < 0.0) throw degenerate_distribution_error("negative sigma");
  if (s.sigma == 0.0) {
    if (x1 < s.mean && s.mean < x2) return 1.0;
    if (s.mean == x1 || s.mean == x2) return 0.0;
    throw degenerate_distribution_error("sigma = 0 with mean outside the interval");
  }
  double p = std_normal_cdf((x2 - s.mean) / s.sigma) - std_normal_cdf((x1 - s.mean) / s.sigma);
  if (p < 0.0) p = 0.0;
  if (p > 1.0) p = 1.0;
  return p;
}

/// Ids of the candidates whose probability over their flag interval reaches
/// the threshold, in input order.
inline std::vector<std::int64_t> select_segmentation_surfaces(
    const std::vector<SegmentationSurface>& candidates, double threshold,
    const std::vector<std::pair<double, double>>& intervals) {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw std::invalid_argument("threshold must be within [0, 1]");
  if (candidates.size() != intervals.size())
    throw shape_error("select_segmentation_surfaces: one interval per candidate");
  std::vector<std::int64_t> ids;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    double p = segmentation_probability(candidates[i], intervals[i].first, intervals[i].second);
    if (p >= threshold) ids.push_back(candidates[i].id);
  }
  return ids;
}

}  // namespace isotraj
