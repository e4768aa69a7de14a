// Copyright 2026 The envaff Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ENVAFF_GEOMETRY_HPP
#define ENVAFF_GEOMETRY_HPP

#include <array>
#include <cmath>
#include <variant>

namespace envaff {

/// Absolute tolerance used by geometric predicates.
inline constexpr double kGeomTol = 1e-9;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
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
  constexpr bool operator==(const Vec3&) const = default;
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

/// Right-handed cross product.
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

constexpr double norm_sq(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(norm_sq(v)); }
inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }

/// Direction with unit Euclidean norm. Construction normalizes and rejects
/// (near) zero vectors.
class UnitVec3 {
 public:
  UnitVec3() : v_{1.0, 0.0, 0.0} {}
  explicit UnitVec3(const Vec3& v);

  const Vec3& vec() const { return v_; }
  operator const Vec3&() const { return v_; }  // NOLINT: implicit by intent
  double x() const { return v_.x; }
  double y() const { return v_.y; }
  double z() const { return v_.z; }
  UnitVec3 operator-() const { return UnitVec3::trusted(-v_); }
  bool operator==(const UnitVec3& o) const { return v_ == o.v_; }

  /// Wraps an already-normalized vector without renormalizing it.
  static UnitVec3 trusted(const Vec3& v) {
    UnitVec3 u;
    u.v_ = v;
    return u;
  }

 private:
  Vec3 v_;
};

/// Row-major 3x3 matrix; used for rotations.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Mat3 identity() { return {}; }
  static Mat3 from_rows(const Vec3& r0, const Vec3& r1, const Vec3& r2) {
    return {{r0.x, r0.y, r0.z, r1.x, r1.y, r1.z, r2.x, r2.y, r2.z}};
  }
  /// Rotation by `angle` radians about `axis` (Rodrigues).
  static Mat3 rotation(const UnitVec3& axis, double angle);
  static Mat3 rotation_z(double angle) { return rotation(UnitVec3::trusted({0, 0, 1}), angle); }

  double operator()(int r, int c) const { return m[static_cast<std::size_t>(3 * r + c)]; }
  double& operator()(int r, int c) { return m[static_cast<std::size_t>(3 * r + c)]; }
  Vec3 row(int r) const { return {(*this)(r, 0), (*this)(r, 1), (*this)(r, 2)}; }
  Vec3 col(int c) const { return {(*this)(0, c), (*this)(1, c), (*this)(2, c)}; }

  Vec3 operator*(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }
  Mat3 operator*(const Mat3& o) const;
  Mat3 transposed() const;
  double determinant() const;
  bool operator==(const Mat3&) const = default;
};

/// True when QᵀQ = I within `tol` and det Q = +1 within `tol`.
bool is_rotation(const Mat3& q, double tol = kGeomTol);

/// p ↦ rotation·p + translation.
struct RigidTransform {
  Mat3 rotation;
  Vec3 translation;

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Vec3& t) { return {Mat3::identity(), t}; }
  static RigidTransform from_rotation(const Mat3& r) { return {r, {}}; }
  /// Rotation by `angle` about the line through `anchor` along `axis`.
  static RigidTransform about_axis(const Vec3& anchor, const UnitVec3& axis, double angle);

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 apply_direction(const Vec3& v) const { return rotation * v; }
  /// (this ∘ other)(p) = this(other(p)).
  RigidTransform compose(const RigidTransform& other) const;
  RigidTransform inverse() const;
  bool operator==(const RigidTransform&) const = default;
};

inline Vec3 apply_transform(const RigidTransform& t, const Vec3& p) { return t.apply(p); }

struct OrientedBox {
  Vec3 center;
  Vec3 half_extents;
  Mat3 rotation;  // columns are the box axes in the parent frame
};

struct Sphere {
  Vec3 center;
  double radius = 0.0;
};

/// Solid cylinder spanning base + t·axis for t ∈ [0, 2·half_length]; `base`
/// is the center of the bottom cap.
struct Cylinder {
  Vec3 base;
  UnitVec3 axis;
  double half_length = 0.0;
  double radius = 0.0;

  Vec3 mid() const { return base + axis.vec() * half_length; }
};

using Primitive = std::variant<OrientedBox, Sphere, Cylinder>;

/// Throws InvalidArgument unless every extent/radius is strictly positive
/// and box rotations are proper.
void validate(const Primitive& prim);

/// Swept sphere: all points within `radius` of segment ab.
struct Capsule {
  Vec3 a;
  Vec3 b;
  double radius = 0.0;
};

struct Aabb {
  Vec3 lo;
  Vec3 hi;

  bool overlaps(const Aabb& o, double tol = 0.0) const {
    return lo.x < o.hi.x - tol && o.lo.x < hi.x - tol && lo.y < o.hi.y - tol &&
           o.lo.y < hi.y - tol && lo.z < o.hi.z - tol && o.lo.z < hi.z - tol;
  }
  bool contains(const Vec3& p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z && p.z <= hi.z;
  }
};

Aabb bounding_box(const Primitive& prim);

/// Places a primitive given in its local frame into the parent frame.
Primitive transformed(const Primitive& prim, const RigidTransform& t);
OrientedBox transformed(const OrientedBox& box, const RigidTransform& t);

double segment_point_distance(const Vec3& a, const Vec3& b, const Vec3& p);

/// Signed distance, negative inside.
///  sphere:   |p − c| − r
///  box:      exact exterior Euclidean distance; −(distance to nearest face) inside
///  cylinder: with radial excess dr = ρ − r and axial excess da = |h| − L,
///            min(max(dr, da), 0) + ‖(max(dr,0), max(da,0))‖
double point_primitive_distance(const Vec3& p, const Primitive& prim);

/// Discretized swept-sphere test. Samples 2^m + 1 evenly spaced points
/// (endpoints included) along ab, with the smallest m giving spacing ≤ step,
/// and reports a hit when any sample is closer than c.radius to the
/// primitive. The power-of-two count makes the sample set for step/2 a
/// superset of the one for step.
bool capsule_hits_primitive(const Capsule& c, const Primitive& prim, double step);

/// Number of segments used by capsule_hits_primitive for a given length.
int capsule_sample_segments(double length, double step);

/// Exact separating-axis overlap test for two oriented boxes (touching
/// within `tol` does not count).
bool boxes_overlap(const OrientedBox& a, const OrientedBox& b, double tol = kGeomTol);

/// Conservative solid overlap: exact for box/box and box/sphere, cylinders are
/// replaced by their tight bounding box.
bool box_overlaps_primitive(const OrientedBox& box, const Primitive& prim, double tol = kGeomTol);

/// Tight oriented bounding box of a cylinder.
OrientedBox bounding_obb(const Cylinder& c);

/// Any orthonormal basis completing `axis` (returned as rotation columns with
/// axis as the third column).
Mat3 frame_from_axis(const UnitVec3& axis);

}  // namespace envaff

#endif  // ENVAFF_GEOMETRY_HPP
