#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "isotraj/errors.hpp"

namespace isotraj {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, Vec3 v) { return {s * v.x, s * v.y, s * v.z}; }
  friend Vec3 operator/(Vec3 v, double s) { return {v.x / s, v.y / s, v.z / s}; }
  friend bool operator==(Vec3 a, Vec3 b) { return a.x == b.x && a.y == b.y && a.z == b.z; }

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

/// 3x3 direction-cosine matrix. Construction checks orthonormality
/// (a * a^T = I within 1e-9) and det = +1 within 1e-9.
class RotationMatrix {
public:
  static constexpr double orthonormal_tol = 1e-9;

  RotationMatrix() : a_{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}} {}

  explicit RotationMatrix(const std::array<std::array<double, 3>, 3>& a) : a_(a) {
    validate();
  }

  static RotationMatrix identity() { return RotationMatrix(); }

  double operator()(int r, int c) const { return a_[r][c]; }

  Vec3 apply(Vec3 v) const {
    return {a_[0][0] * v.x + a_[0][1] * v.y + a_[0][2] * v.z,
            a_[1][0] * v.x + a_[1][1] * v.y + a_[1][2] * v.z,
            a_[2][0] * v.x + a_[2][1] * v.y + a_[2][2] * v.z};
  }

  /// Inverse application; for an orthonormal matrix the inverse is the transpose.
  Vec3 apply_transposed(Vec3 v) const {
    return {a_[0][0] * v.x + a_[1][0] * v.y + a_[2][0] * v.z,
            a_[0][1] * v.x + a_[1][1] * v.y + a_[2][1] * v.z,
            a_[0][2] * v.x + a_[1][2] * v.y + a_[2][2] * v.z};
  }

  double det() const {
    return a_[0][0] * (a_[1][1] * a_[2][2] - a_[1][2] * a_[2][1]) -
           a_[0][1] * (a_[1][0] * a_[2][2] - a_[1][2] * a_[2][0]) +
           a_[0][2] * (a_[1][0] * a_[2][1] - a_[1][1] * a_[2][0]);
  }

private:
  void validate() const {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        if (!std::isfinite(a_[i][j])) throw std::invalid_argument("rotation entry not finite");
        double g = a_[i][0] * a_[j][0] + a_[i][1] * a_[j][1] + a_[i][2] * a_[j][2];
        double expect = (i == j) ? 1.0 : 0.0;
        if (std::abs(g - expect) > orthonormal_tol)
          throw std::invalid_argument("rotation matrix not orthonormal");
      }
    if (std::abs(det() - 1.0) > orthonormal_tol)
      throw std::invalid_argument("rotation matrix determinant is not +1");
  }

  std::array<std::array<double, 3>, 3> a_;
};

/// Pose of the mobile frame: world-frame origin, direction cosines and the
/// sample timestamp in milliseconds (a multiple of the sample period).
struct FramePose {
  Vec3 origin;
  RotationMatrix rotation;
  std::int64_t timestamp_ms = 0;
};

/// Rotation about the Z axis (axis convention: X forward, Y right, Z down).
/// Positive yaw maps +X toward +Y, so yaw = pi/2 sends (1,0,0) to (0,1,0).
inline RotationMatrix rotation_from_yaw(double yaw) {
  if (!std::isfinite(yaw)) throw std::invalid_argument("yaw not finite");
  double c = std::cos(yaw), s = std::sin(yaw);
  return RotationMatrix({{{c, -s, 0.0}, {s, c, 0.0}, {0.0, 0.0, 1.0}}});
}

/// World position of a point given in the pose's local frame: r0 + A * local.
inline Vec3 transform_point(const FramePose& pose, Vec3 local) {
  return pose.origin + pose.rotation.apply(local);
}

/// Local coordinates of a world point: A^T * (p - r0).
inline Vec3 inverse_transform(const FramePose& pose, Vec3 world) {
  return pose.rotation.apply_transposed(world - pose.origin);
}

/// Velocity of a frame-fixed local point between two poses, as the finite
/// difference of its world positions over the timestamp gap. m/s.
inline Vec3 frame_velocity(const FramePose& prev, const FramePose& next, Vec3 local) {
  if (next.timestamp_ms <= prev.timestamp_ms)
    throw sequence_error("frame_velocity needs next.timestamp > prev.timestamp");
  double dt = static_cast<double>(next.timestamp_ms - prev.timestamp_ms) * 1e-3;
  return (transform_point(next, local) - transform_point(prev, local)) / dt;
}

}  // namespace isotraj
