#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace bloch {

// Tolerance for the |norm - 1| check on vectors that must be pure states.
inline constexpr double kPureTolerance = 1e-12;
// Below this cross-product magnitude the rotation axis between two states is
// treated as degenerate and a deterministic fallback axis is used.
inline constexpr double kAxisDegeneracyTolerance = 1e-9;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3() = default;
  constexpr Vec3(double px, double py, double pz) : x(px), y(py), z(pz) {}

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator*(double c) const { return {x * c, y * c, z * c}; }
  constexpr Vec3 operator/(double c) const { return {x / c, y / c, z / c}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }

  double norm_squared() const { return x * x + y * y + z * z; }
  double norm() const { return std::sqrt(norm_squared()); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }

  static constexpr Vec3 unit_x() { return {1.0, 0.0, 0.0}; }
  static constexpr Vec3 unit_y() { return {0.0, 1.0, 0.0}; }
  static constexpr Vec3 unit_z() { return {0.0, 0.0, 1.0}; }
};

inline constexpr Vec3 operator*(double c, const Vec3& v) { return v * c; }

// The state vector of a two-level system and a sampled control field value
// share the same algebra; the aliases keep signatures readable.
using BlochVector = Vec3;
using ControlVector = Vec3;

inline constexpr double dot(const Vec3& a, const Vec3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

inline constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline bool is_pure(const Vec3& v) { return std::abs(v.norm() - 1.0) <= kPureTolerance; }

inline void require_pure(const Vec3& v, const char* what) {
  if (!v.finite() || !is_pure(v)) {
    throw std::domain_error(std::string(what) + ": expected a unit Bloch vector, |v| = " +
                            std::to_string(v.norm()));
  }
}

// Unit-norm rotation axis. Construction normalizes; near-zero input is rejected.
class UnitAxis {
 public:
  explicit UnitAxis(const Vec3& v) {
    const double n = v.norm();
    if (!v.finite() || n < kPureTolerance) {
      throw std::invalid_argument("UnitAxis: cannot normalize a (near-)zero vector");
    }
    v_ = v / n;
  }

  const Vec3& vec() const { return v_; }
  double x() const { return v_.x; }
  double y() const { return v_.y; }
  double z() const { return v_.z; }

 private:
  Vec3 v_;
};

// Angle between two pure states, stable near 0 and pi.
inline double angle_between(const BlochVector& a, const BlochVector& b) {
  require_pure(a, "angle_between");
  require_pure(b, "angle_between");
  return std::atan2(cross(a, b).norm(), dot(a, b));
}

// Rotation axis taking s_i toward s_f. For (near-)parallel or (near-)antipodal
// pairs the cross product degenerates and any perpendicular axis is valid; we
// pick one deterministically: cross s_i with whichever of x-hat, y-hat has the
// smaller |dot| with s_i.
inline UnitAxis perpendicular_axis(const BlochVector& s_i, const BlochVector& s_f) {
  require_pure(s_i, "perpendicular_axis");
  require_pure(s_f, "perpendicular_axis");
  const Vec3 c = cross(s_i, s_f);
  if (c.norm() > kAxisDegeneracyTolerance) {
    return UnitAxis(c);
  }
  const Vec3 helper = (std::abs(s_i.x) <= std::abs(s_i.y)) ? Vec3::unit_x() : Vec3::unit_y();
  return UnitAxis(cross(s_i, helper));
}

// Rodrigues rotation of s about a unit axis, right-handed.
inline Vec3 rotate(const Vec3& s, const UnitAxis& axis, double angle) {
  const Vec3& k = axis.vec();
  const double c = std::cos(angle);
  const double si = std::sin(angle);
  const double half = std::sin(0.5 * angle);
  const double one_minus_c = 2.0 * half * half;  // 1 - cos, without cancellation
  return s * c + cross(k, s) * si + k * (dot(k, s) * one_minus_c);
}

}  // namespace bloch
