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

#include "envaff/geometry.hpp"

#include <algorithm>
#include <limits>

#include "envaff/error.hpp"

namespace envaff {

UnitVec3::UnitVec3(const Vec3& v) {
  const double n = norm(v);
  if (!(n > 1e-12) || !std::isfinite(n)) throw InvalidArgument("UnitVec3: zero or non-finite vector");
  v_ = v / n;
}

Mat3 Mat3::rotation(const UnitVec3& axis, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double t = 1.0 - c;
  const double x = axis.x(), y = axis.y(), z = axis.z();
  return {{t * x * x + c, t * x * y - s * z, t * x * z + s * y,  //
           t * x * y + s * z, t * y * y + c, t * y * z - s * x,  //
           t * x * z - s * y, t * y * z + s * x, t * z * z + c}};
}

Mat3 Mat3::operator*(const Mat3& o) const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r(i, j) = (*this)(i, 0) * o(0, j) + (*this)(i, 1) * o(1, j) + (*this)(i, 2) * o(2, j);
  return r;
}

Mat3 Mat3::transposed() const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
  return r;
}

double Mat3::determinant() const { return dot(row(0), cross(row(1), row(2))); }

bool is_rotation(const Mat3& q, double tol) {
  const Mat3 qtq = q.transposed() * q;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (std::abs(qtq(i, j) - (i == j ? 1.0 : 0.0)) > tol) return false;
  return std::abs(q.determinant() - 1.0) <= tol;
}

RigidTransform RigidTransform::about_axis(const Vec3& anchor, const UnitVec3& axis, double angle) {
  const Mat3 r = Mat3::rotation(axis, angle);
  return {r, anchor - r * anchor};
}

RigidTransform RigidTransform::compose(const RigidTransform& other) const {
  return {rotation * other.rotation, rotation * other.translation + translation};
}

RigidTransform RigidTransform::inverse() const {
  const Mat3 rt = rotation.transposed();
  return {rt, -(rt * translation)};
}

void validate(const Primitive& prim) {
  std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, OrientedBox>) {
          if (!(p.half_extents.x > 0 && p.half_extents.y > 0 && p.half_extents.z > 0))
            throw InvalidArgument("OrientedBox: half-extents must be positive");
          if (!is_rotation(p.rotation)) throw InvalidArgument("OrientedBox: rotation is not proper");
        } else if constexpr (std::is_same_v<T, Sphere>) {
          if (!(p.radius > 0)) throw InvalidArgument("Sphere: radius must be positive");
        } else {
          if (!(p.radius > 0 && p.half_length > 0))
            throw InvalidArgument("Cylinder: radius and half-length must be positive");
        }
      },
      prim);
}

OrientedBox transformed(const OrientedBox& box, const RigidTransform& t) {
  return {t.apply(box.center), box.half_extents, t.rotation * box.rotation};
}

Primitive transformed(const Primitive& prim, const RigidTransform& t) {
  return std::visit(
      [&t](const auto& p) -> Primitive {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, OrientedBox>) {
          return transformed(p, t);
        } else if constexpr (std::is_same_v<T, Sphere>) {
          return Sphere{t.apply(p.center), p.radius};
        } else {
          return Cylinder{t.apply(p.base), UnitVec3::trusted(t.apply_direction(p.axis)), p.half_length,
                          p.radius};
        }
      },
      prim);
}

Mat3 frame_from_axis(const UnitVec3& axis) {
  const Vec3 a = axis.vec();
  const Vec3 helper = std::abs(a.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  const Vec3 u = UnitVec3(cross(helper, a)).vec();
  const Vec3 v = cross(a, u);
  Mat3 r;
  for (int i = 0; i < 3; ++i) {
    r(i, 0) = u[i];
    r(i, 1) = v[i];
    r(i, 2) = a[i];
  }
  return r;
}

OrientedBox bounding_obb(const Cylinder& c) {
  return {c.mid(), {c.radius, c.radius, c.half_length}, frame_from_axis(c.axis)};
}

namespace {

Aabb box_aabb(const OrientedBox& b) {
  Vec3 ext;
  for (int i = 0; i < 3; ++i) {
    const Vec3 r = b.rotation.row(i);
    const double e = std::abs(r.x) * b.half_extents.x + std::abs(r.y) * b.half_extents.y +
                     std::abs(r.z) * b.half_extents.z;
    (i == 0 ? ext.x : (i == 1 ? ext.y : ext.z)) = e;
  }
  return {b.center - ext, b.center + ext};
}

double box_sdf(const Vec3& p, const OrientedBox& b) {
  const Vec3 q = b.rotation.transposed() * (p - b.center);
  const Vec3 d{std::abs(q.x) - b.half_extents.x, std::abs(q.y) - b.half_extents.y,
               std::abs(q.z) - b.half_extents.z};
  const Vec3 outside{std::max(d.x, 0.0), std::max(d.y, 0.0), std::max(d.z, 0.0)};
  const double inside = std::min(std::max(d.x, std::max(d.y, d.z)), 0.0);
  return norm(outside) + inside;
}

double cylinder_sdf(const Vec3& p, const Cylinder& c) {
  const Vec3 rel = p - c.mid();
  const double along = dot(rel, c.axis.vec());
  const double radial = norm(rel - c.axis.vec() * along);
  const double dr = radial - c.radius;
  const double da = std::abs(along) - c.half_length;
  const double outside = std::hypot(std::max(dr, 0.0), std::max(da, 0.0));
  return std::min(std::max(dr, da), 0.0) + outside;
}

}  // namespace

Aabb bounding_box(const Primitive& prim) {
  return std::visit(
      [](const auto& p) -> Aabb {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, OrientedBox>) {
          return box_aabb(p);
        } else if constexpr (std::is_same_v<T, Sphere>) {
          const Vec3 r{p.radius, p.radius, p.radius};
          return {p.center - r, p.center + r};
        } else {
          return box_aabb(bounding_obb(p));
        }
      },
      prim);
}

double segment_point_distance(const Vec3& a, const Vec3& b, const Vec3& p) {
  const Vec3 ab = b - a;
  const double len_sq = norm_sq(ab);
  if (len_sq <= 0.0) return distance(a, p);
  const double t = std::clamp(dot(p - a, ab) / len_sq, 0.0, 1.0);
  return distance(a + ab * t, p);
}

double point_primitive_distance(const Vec3& p, const Primitive& prim) {
  return std::visit(
      [&p](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, OrientedBox>) {
          return box_sdf(p, s);
        } else if constexpr (std::is_same_v<T, Sphere>) {
          return distance(p, s.center) - s.radius;
        } else {
          return cylinder_sdf(p, s);
        }
      },
      prim);
}

int capsule_sample_segments(double length, double step) {
  int n = 1;
  while (length / n > step && n < (1 << 20)) n *= 2;
  return n;
}

bool capsule_hits_primitive(const Capsule& c, const Primitive& prim, double step) {
  if (!(step > 0)) throw InvalidArgument("capsule_hits_primitive: step must be positive");
  // Broad-phase reject against the inflated bounding box.
  Aabb box = bounding_box(prim);
  const Vec3 pad{c.radius, c.radius, c.radius};
  const Aabb seg{Vec3{std::min(c.a.x, c.b.x), std::min(c.a.y, c.b.y), std::min(c.a.z, c.b.z)} - pad,
                 Vec3{std::max(c.a.x, c.b.x), std::max(c.a.y, c.b.y), std::max(c.a.z, c.b.z)} + pad};
  if (!box.overlaps(seg)) return false;

  const Vec3 ab = c.b - c.a;
  const int n = capsule_sample_segments(norm(ab), step);
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    if (point_primitive_distance(c.a + ab * t, prim) < c.radius) return true;
  }
  return false;
}

bool boxes_overlap(const OrientedBox& a, const OrientedBox& b, double tol) {
  const Vec3 ea = a.half_extents, eb = b.half_extents;
  // Express b in a's frame.
  const Mat3 at = a.rotation.transposed();
  const Mat3 r = at * b.rotation;
  const Vec3 t = at * (b.center - a.center);
  Mat3 abs_r;
  for (int i = 0; i < 9; ++i) abs_r.m[static_cast<std::size_t>(i)] = std::abs(r.m[static_cast<std::size_t>(i)]) + 1e-12;

  for (int i = 0; i < 3; ++i) {
    const double ra = ea[i];
    const double rb = eb.x * abs_r(i, 0) + eb.y * abs_r(i, 1) + eb.z * abs_r(i, 2);
    if (std::abs(t[i]) >= ra + rb - tol) return false;
  }
  for (int j = 0; j < 3; ++j) {
    const double ra = ea.x * abs_r(0, j) + ea.y * abs_r(1, j) + ea.z * abs_r(2, j);
    const double rb = eb[j];
    const double proj = t.x * r(0, j) + t.y * r(1, j) + t.z * r(2, j);
    if (std::abs(proj) >= ra + rb - tol) return false;
  }
  for (int i = 0; i < 3; ++i) {
    const int i1 = (i + 1) % 3, i2 = (i + 2) % 3;
    for (int j = 0; j < 3; ++j) {
      const int j1 = (j + 1) % 3, j2 = (j + 2) % 3;
      const double ra = ea[i1] * abs_r(i2, j) + ea[i2] * abs_r(i1, j);
      const double rb = eb[j1] * abs_r(i, j2) + eb[j2] * abs_r(i, j1);
      const double proj = t[i2] * r(i1, j) - t[i1] * r(i2, j);
      // Unnormalized axis; near-parallel edges give a degenerate one.
      const double len = std::sqrt(std::max(0.0, 1.0 - r(i, j) * r(i, j)));
      if (std::abs(proj) >= ra + rb - tol * len) return false;
    }
  }
  return true;
}

bool box_overlaps_primitive(const OrientedBox& box, const Primitive& prim, double tol) {
  return std::visit(
      [&](const auto& p) -> bool {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, OrientedBox>) {
          return boxes_overlap(box, p, tol);
        } else if constexpr (std::is_same_v<T, Sphere>) {
          return box_sdf(p.center, box) < p.radius - tol;
        } else {
          return boxes_overlap(box, bounding_obb(p), tol);
        }
      },
      prim);
}

}  // namespace envaff
