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

#include "envaff/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "envaff/error.hpp"
#include "envaff/kernels.hpp"

namespace envaff {

namespace {

constexpr double kPi = std::numbers::pi;

// Cabinet archetype constants (target frame, meters). The front plane is
// x = 0 facing +x; the floor is z = 0.
constexpr double kDepth = 0.40;
constexpr double kPanel = 0.02;
constexpr double kPlinth = 0.05;
constexpr double kGap = 0.002;
constexpr double kMinDoorRegion = 0.25;
constexpr double kDrawerTravel = 0.25;
constexpr double kPlacementClearance = 0.01;
constexpr double kRobotBaseRadius = 0.12;

OrientedBox aabox(const Vec3& lo, const Vec3& hi) {
  return {(lo + hi) * 0.5, (hi - lo) * 0.5, Mat3::identity()};
}

}  // namespace

RigidTransform joint_motion(const Joint& joint, double state) {
  if (joint.kind == JointKind::Prismatic) return RigidTransform::from_translation(joint.axis.vec() * state);
  return RigidTransform::about_axis(joint.anchor, joint.axis, state);
}

ArticulatedTarget set_joint_state(const ArticulatedTarget& target, int part, double state) {
  if (part < 0 || static_cast<std::size_t>(part) >= target.parts.size())
    throw OutOfRange("set_joint_state: part index " + std::to_string(part));
  const Joint& j = target.parts[static_cast<std::size_t>(part)].joint;
  if (!(state >= j.lo - 1e-12 && state <= j.hi + 1e-12)) {
    std::ostringstream msg;
    msg << "set_joint_state: state " << state << " outside [" << j.lo << ", " << j.hi << "]";
    throw OutOfRange(msg.str());
  }
  ArticulatedTarget out = target;
  out.parts[static_cast<std::size_t>(part)].joint.state = std::clamp(state, j.lo, j.hi);
  return out;
}

OrientedBox part_world_box(const ArticulatedTarget& target, int part, double state) {
  const Part& p = target.parts[static_cast<std::size_t>(part)];
  return transformed(p.shape, target.base_pose.compose(joint_motion(p.joint, state)));
}

std::optional<OrientedBox> handle_world_box(const ArticulatedTarget& target, int part, double state) {
  const Part& p = target.parts[static_cast<std::size_t>(part)];
  if (!p.handle) return std::nullopt;
  return transformed(*p.handle, target.base_pose.compose(joint_motion(p.joint, state)));
}

std::vector<OccluderFamily> OccluderFamily::seen() {
  return {
      {"box", ShapeKind::Box, {0.05, 0.40}, {0.05, 0.40}, {0.05, 0.40}},
      {"cylinder", ShapeKind::Cylinder, {0.025, 0.20}, {0.05, 0.40}, {}},
      {"sphere", ShapeKind::Sphere, {0.025, 0.20}, {}, {}},
  };
}

std::vector<OccluderFamily> OccluderFamily::novel() {
  return {
      {"tall_thin_cylinder", ShapeKind::Cylinder, {0.010, 0.020}, {0.45, 0.75}, {}},
      {"flat_wide_box", ShapeKind::Box, {0.42, 0.60}, {0.42, 0.60}, {0.05, 0.12}},
  };
}

int family_index(const std::string& name) {
  int i = 0;
  for (const auto& f : OccluderFamily::seen()) {
    if (f.name == name) return i;
    ++i;
  }
  for (const auto& f : OccluderFamily::novel()) {
    if (f.name == name) return i;
    ++i;
  }
  return -1;
}

bool primitives_overlap(const Primitive& a, const Primitive& b, double clearance) {
  const double tol = -clearance;
  if (const auto* sa = std::get_if<Sphere>(&a)) {
    if (const auto* sb = std::get_if<Sphere>(&b))
      return distance(sa->center, sb->center) < sa->radius + sb->radius + clearance;
  }
  auto as_box = [](const Primitive& p) -> std::optional<OrientedBox> {
    if (const auto* bx = std::get_if<OrientedBox>(&p)) return *bx;
    if (const auto* cy = std::get_if<Cylinder>(&p)) return bounding_obb(*cy);
    return std::nullopt;
  };
  if (auto ba = as_box(a)) return box_overlaps_primitive(*ba, b, tol);
  return box_overlaps_primitive(*as_box(b), a, tol);
}

namespace {

ArticulatedTarget make_cabinet(Rng& rng) {
  ArticulatedTarget t;
  const double width = rng.uniform(0.6, 1.0);
  const double height = rng.uniform(0.6, 0.9);
  const double half_w = width / 2;
  const int num_doors = static_cast<int>(rng.index(3));
  const double drawer_h = rng.uniform(0.12, 0.18);
  const double drawer_budget = height - kPlinth - (num_doors > 0 ? kMinDoorRegion : 0.0);
  const int max_drawers = std::clamp(static_cast<int>(drawer_budget / drawer_h), 1, 3);
  const int num_drawers = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(max_drawers)));

  // Carcass, plinth.
  t.body.push_back(aabox({-kDepth, -half_w, 0.0}, {-kPanel, half_w, height}));
  t.body.push_back(aabox({-kPanel, -half_w, 0.0}, {0.0, half_w, kPlinth}));

  const double drawers_bottom = height - num_drawers * drawer_h;
  for (int i = 0; i < num_drawers; ++i) {
    const double top = height - i * drawer_h;
    Part p;
    p.shape = aabox({-kPanel, -half_w + kGap, top - drawer_h + kGap}, {0.0, half_w - kGap, top - kGap});
    p.joint.kind = JointKind::Prismatic;
    p.joint.axis = UnitVec3::trusted({1, 0, 0});
    p.joint.lo = 0.0;
    p.joint.hi = kDrawerTravel;
    p.joint.state = rng.uniform(0.0, 0.20);
    const Vec3 face{0.0, 0.0, top - drawer_h / 2};
    p.handle = OrientedBox{face + Vec3{0.01, 0, 0}, {0.01, 0.02, 0.01}, Mat3::identity()};
    t.parts.push_back(p);
  }

  if (num_doors == 0) {
    if (drawers_bottom > kPlinth + 1e-9)
      t.body.push_back(aabox({-kPanel, -half_w, kPlinth}, {0.0, half_w, drawers_bottom}));
  } else {
    const double lo_z = kPlinth + kGap, hi_z = drawers_bottom - kGap;
    for (int d = 0; d < num_doors; ++d) {
      // Door 0 hinges on the left edge (y = -W/2), door 1 on the right edge.
      const bool left = d == 0;
      const double y0 = num_doors == 1 ? -half_w + kGap : (left ? -half_w + kGap : kGap);
      const double y1 = num_doors == 1 ? half_w - kGap : (left ? -kGap : half_w - kGap);
      Part p;
      p.shape = aabox({-kPanel, y0, lo_z}, {0.0, y1, hi_z});
      p.joint.kind = JointKind::Revolute;
      p.joint.axis = UnitVec3::trusted({0, 0, left ? -1.0 : 1.0});
      p.joint.anchor = {0.0, left ? -half_w : half_w, 0.0};
      p.joint.lo = 0.0;
      p.joint.hi = kPi / 2;
      p.joint.state = rng.uniform(0.0, 1.2);
      const Vec3 face{0.0, (y0 + y1) / 2, (lo_z + hi_z) / 2};
      p.handle = OrientedBox{face + Vec3{0.01, 0, 0}, {0.01, 0.01, 0.02}, Mat3::identity()};
      t.parts.push_back(p);
    }
  }
  return t;
}

Occluder make_occluder(const OccluderFamily& fam, const Vec3& floor_xy, double yaw, Rng& rng) {
  Occluder o;
  o.family = fam.name;
  switch (fam.kind) {
    case ShapeKind::Box: {
      const Vec3 half{rng.uniform(fam.a.lo, fam.a.hi) / 2, rng.uniform(fam.b.lo, fam.b.hi) / 2,
                      rng.uniform(fam.c.lo, fam.c.hi) / 2};
      o.shape = OrientedBox{{0, 0, half.z}, half, Mat3::identity()};
      break;
    }
    case ShapeKind::Cylinder: {
      const double r = rng.uniform(fam.a.lo, fam.a.hi);
      const double h = rng.uniform(fam.b.lo, fam.b.hi);
      o.shape = Cylinder{{0, 0, 0}, UnitVec3::trusted({0, 0, 1}), h / 2, r};
      break;
    }
    case ShapeKind::Sphere: {
      const double r = rng.uniform(fam.a.lo, fam.a.hi);
      o.shape = Sphere{{0, 0, r}, r};
      break;
    }
  }
  o.pose = RigidTransform{Mat3::rotation_z(yaw), {floor_xy.x, floor_xy.y, 0.0}};
  return o;
}

double xy_distance_to_aabb(const Vec3& p, const Aabb& box) {
  const double dx = std::max({box.lo.x - p.x, 0.0, p.x - box.hi.x});
  const double dy = std::max({box.lo.y - p.y, 0.0, p.y - box.hi.y});
  return std::hypot(dx, dy);
}

/// Placement test of `cand` against everything already in `scene`.
bool placement_ok(const Scene& scene, const Primitive& cand, double clearance) {
  for (const auto& s : world_solids(scene))
    if (primitives_overlap(s.shape, cand, clearance)) return false;
  const Aabb box = bounding_box(cand);
  if (xy_distance_to_aabb(scene.robot, box) < kRobotBaseRadius) return false;
  if (point_primitive_distance(scene.robot, cand) <= 0.0) return false;
  return true;
}

}  // namespace

Scene generate_scene(const SceneSpec& spec) {
  if (spec.num_occluders < 0) throw InvalidArgument("generate_scene: num_occluders must be >= 0");
  if (spec.num_occluders > 0 && spec.pool.empty()) throw InvalidArgument("generate_scene: empty occluder pool");
  Rng rng(derive_seed(spec.seed, {0x5c3e}));

  Scene scene;
  scene.id = spec.id;
  scene.rng_seed = spec.seed;
  scene.target = make_cabinet(rng);
  scene.target.base_pose = RigidTransform::identity();

  const double radius = rng.uniform(spec.robot_radius.lo, spec.robot_radius.hi);
  const double angle = rng.uniform(spec.robot_angle.lo, spec.robot_angle.hi);
  scene.robot = scene.target.base_pose.apply(
      {radius * std::cos(angle), radius * std::sin(angle), spec.robot_height});

  for (int k = 0; k < spec.num_occluders; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < spec.max_retries && !placed; ++attempt) {
      const auto& fam = spec.pool[rng.index(spec.pool.size())];
      const Vec3 xy{rng.uniform(spec.region.x.lo, spec.region.x.hi), rng.uniform(spec.region.y.lo, spec.region.y.hi),
                    0.0};
      const double yaw = rng.uniform(0.0, kPi);
      Occluder o = make_occluder(fam, xy, yaw, rng);
      o.pose = scene.target.base_pose.compose(o.pose);
      if (placement_ok(scene, o.world(), kPlacementClearance)) {
        scene.occluders.push_back(std::move(o));
        placed = true;
      }
    }
    if (!placed) {
      throw PlacementFailure("generate_scene: could not place occluder " + std::to_string(k) + " of " +
                             std::to_string(spec.num_occluders) + " within " + std::to_string(spec.max_retries) +
                             " attempts");
    }
  }
  return scene;
}

std::vector<Solid> world_solids(const Scene& scene) {
  std::vector<Solid> out;
  const auto& t = scene.target;
  for (std::size_t i = 0; i < t.body.size(); ++i)
    out.push_back({transformed(t.body[i], t.base_pose), SolidKind::Body, static_cast<int>(i)});
  for (std::size_t i = 0; i < t.parts.size(); ++i) {
    const int pi = static_cast<int>(i);
    out.push_back({part_world_box(t, pi), SolidKind::Part, pi});
    if (auto h = handle_world_box(t, pi, t.parts[i].joint.state)) out.push_back({*h, SolidKind::Handle, pi});
  }
  for (std::size_t i = 0; i < scene.occluders.size(); ++i)
    out.push_back({scene.occluders[i].world(), SolidKind::Occluder, static_cast<int>(i)});
  return out;
}

std::vector<std::string> validate_scene(const Scene& scene) {
  std::vector<std::string> problems;
  auto fail = [&problems](const std::string& s) { problems.push_back(s); };
  const auto& t = scene.target;
  if (!is_rotation(t.base_pose.rotation)) fail("target base pose rotation is not proper");
  for (std::size_t i = 0; i < t.parts.size(); ++i) {
    const Joint& j = t.parts[i].joint;
    const std::string tag = "part " + std::to_string(i) + ": ";
    if (!(j.lo <= j.state && j.state <= j.hi)) fail(tag + "joint state outside range");
    if (std::abs(norm(j.axis.vec()) - 1.0) > kGeomTol) fail(tag + "joint axis not unit length");
    const OrientedBox rest = part_world_box(t, static_cast<int>(i), j.lo);
    for (std::size_t b = 0; b < t.body.size(); ++b)
      if (boxes_overlap(rest, transformed(t.body[b], t.base_pose)))
        fail(tag + "interpenetrates body box " + std::to_string(b) + " at joint lower limit");
    if (t.parts[i].handle) {
      const OrientedBox h = *t.parts[i].handle;
      // Handle must touch the outward (+x local) face of the panel.
      const Vec3 face_center = t.parts[i].shape.center + t.parts[i].shape.rotation.col(0) * t.parts[i].shape.half_extents.x;
      if (point_primitive_distance(face_center + (h.center - face_center) * 0.0, h) > 1e-6 &&
          point_primitive_distance(h.center - t.parts[i].shape.rotation.col(0) * h.half_extents.x, t.parts[i].shape) > 1e-6)
        fail(tag + "handle does not meet the outward face");
    }
  }
  std::vector<Primitive> target_solids;
  for (const auto& s : world_solids(scene))
    if (s.kind != SolidKind::Occluder) target_solids.push_back(s.shape);
  for (std::size_t i = 0; i < scene.occluders.size(); ++i) {
    const std::string tag = "occluder " + std::to_string(i) + ": ";
    const Primitive wi = scene.occluders[i].world();
    try {
      validate(wi);
    } catch (const Error& e) {
      fail(tag + e.what());
    }
    for (const auto& ts : target_solids)
      if (primitives_overlap(ts, wi)) {
        fail(tag + "interpenetrates the target");
        break;
      }
    for (std::size_t j = i + 1; j < scene.occluders.size(); ++j)
      if (primitives_overlap(wi, scene.occluders[j].world()))
        fail(tag + "interpenetrates occluder " + std::to_string(j));
  }
  for (const auto& s : world_solids(scene))
    if (point_primitive_distance(scene.robot, s.shape) <= 0.0) {
      fail("robot position inside a solid");
      break;
    }
  return problems;
}

std::int32_t SegLabel::encode() const {
  switch (kind) {
    case Kind::Part: return index;
    case Kind::Body: return -1;
    case Kind::Occluder: return -(index + 2);
  }
  return -1;
}

SegLabel SegLabel::decode(std::int32_t code) {
  if (code >= 0) return {Kind::Part, code};
  if (code == -1) return {Kind::Body, 0};
  return {Kind::Occluder, -code - 2};
}

std::vector<std::size_t> LabeledCloud::target_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < seg.size(); ++i)
    if (seg[i].is_part()) out.push_back(i);
  return out;
}

std::vector<std::size_t> LabeledCloud::handle_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < seg.size(); ++i)
    if (seg[i].is_part() && handle[i]) out.push_back(i);
  return out;
}

std::vector<std::string> validate_cloud(const LabeledCloud& cloud, const Scene& scene) {
  std::vector<std::string> problems;
  const std::size_t n = cloud.points.size();
  if (cloud.normals.size() != n || cloud.seg.size() != n || cloud.handle.size() != n) {
    problems.push_back("attribute arrays differ in length");
    return problems;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(norm(cloud.normals[i]) - 1.0) > 1e-6) {
      problems.push_back("normal " + std::to_string(i) + " not unit length");
      break;
    }
    const SegLabel s = cloud.seg[i];
    if (s.kind == SegLabel::Kind::Part && (s.index < 0 || static_cast<std::size_t>(s.index) >= scene.target.parts.size())) {
      problems.push_back("point " + std::to_string(i) + " refers to missing part");
      break;
    }
    if (s.kind == SegLabel::Kind::Occluder &&
        (s.index < 0 || static_cast<std::size_t>(s.index) >= scene.occluders.size())) {
      problems.push_back("point " + std::to_string(i) + " refers to missing occluder");
      break;
    }
  }
  return problems;
}

// ---------------------------------------------------------------------------
// Surface sampling

namespace {

struct Face {
  int id;
  double area;
};

std::vector<Face> box_faces(const OrientedBox& b, const SurfaceSource& src) {
  std::vector<Face> faces;
  const Vec3 h = b.half_extents;
  const double areas[3] = {4 * h.y * h.z, 4 * h.x * h.z, 4 * h.x * h.y};
  for (int f = 0; f < 6; ++f) {
    const int axis = f / 2;
    const double sign = (f % 2 == 0) ? 1.0 : -1.0;
    if (src.skip_local_neg_x && f == 1) continue;
    const Vec3 n = b.rotation.col(axis) * sign;
    if (src.skip_floor_face && n.z < -1.0 + 1e-9) {
      const double face_z = b.center.z + n.z * h[axis];
      if (face_z <= 1e-9) continue;
    }
    faces.push_back({f, areas[axis]});
  }
  return faces;
}

std::vector<Face> cylinder_faces(const Cylinder& c, const SurfaceSource& src) {
  std::vector<Face> faces{{0, 2 * std::numbers::pi * c.radius * 2 * c.half_length},
                          {1, std::numbers::pi * c.radius * c.radius}};
  const bool on_floor = c.axis.z() > 1.0 - 1e-9 && c.base.z <= 1e-9;
  if (!(src.skip_floor_face && on_floor)) faces.push_back({2, std::numbers::pi * c.radius * c.radius});
  return faces;
}

std::vector<Face> faces_of(const SurfaceSource& src) {
  return std::visit(
      [&src](const auto& p) -> std::vector<Face> {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, OrientedBox>) {
          return box_faces(p, src);
        } else if constexpr (std::is_same_v<T, Cylinder>) {
          return cylinder_faces(p, src);
        } else {
          return {{0, 4 * std::numbers::pi * p.radius * p.radius}};
        }
      },
      src.shape);
}

SurfaceSample sample_face(const SurfaceSource& src, int face, Rng& rng) {
  SurfaceSample s;
  s.face = face;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, OrientedBox>) {
          const int axis = face / 2;
          const double sign = (face % 2 == 0) ? 1.0 : -1.0;
          Vec3 local;
          const int u = (axis + 1) % 3, v = (axis + 2) % 3;
          double c[3];
          c[axis] = sign * p.half_extents[axis];
          c[u] = rng.uniform(-1.0, 1.0) * p.half_extents[u];
          c[v] = rng.uniform(-1.0, 1.0) * p.half_extents[v];
          local = {c[0], c[1], c[2]};
          s.point = p.center + p.rotation * local;
          s.normal = p.rotation.col(axis) * sign;
        } else if constexpr (std::is_same_v<T, Cylinder>) {
          const Mat3 frame = frame_from_axis(p.axis);
          const Vec3 u = frame.col(0), v = frame.col(1), a = p.axis.vec();
          if (face == 0) {
            const double phi = rng.uniform(0.0, 2 * std::numbers::pi);
            const double t = rng.uniform(0.0, 2 * p.half_length);
            const Vec3 radial = u * std::cos(phi) + v * std::sin(phi);
            s.point = p.base + a * t + radial * p.radius;
            s.normal = radial;
          } else {
            const double r = p.radius * std::sqrt(rng.uniform());
            const double phi = rng.uniform(0.0, 2 * std::numbers::pi);
            const Vec3 disk = (u * std::cos(phi) + v * std::sin(phi)) * r;
            if (face == 1) {
              s.point = p.base + a * (2 * p.half_length) + disk;
              s.normal = a;
            } else {
              s.point = p.base + disk;
              s.normal = -a;
            }
          }
        } else {
          // Uniform direction via the z / azimuth parametrization.
          const double z = rng.uniform(-1.0, 1.0);
          const double phi = rng.uniform(0.0, 2 * std::numbers::pi);
          const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
          const Vec3 n{rho * std::cos(phi), rho * std::sin(phi), z};
          s.point = p.center + n * p.radius;
          s.normal = n;
        }
      },
      src.shape);
  s.normal = UnitVec3(s.normal).vec();
  return s;
}

}  // namespace

double sampleable_area(const SurfaceSource& src) {
  double a = 0.0;
  for (const auto& f : faces_of(src)) a += f.area;
  return a;
}

std::vector<SurfaceSample> sample_surfaces(std::span<const SurfaceSource> sources, std::size_t n, Rng& rng) {
  // Flatten (source, face) pairs into one cumulative table.
  std::vector<std::pair<int, int>> keys;
  std::vector<double> cum;
  double total = 0.0;
  for (std::size_t s = 0; s < sources.size(); ++s)
    for (const auto& f : faces_of(sources[s])) {
      total += f.area;
      keys.emplace_back(static_cast<int>(s), f.id);
      cum.push_back(total);
    }
  std::vector<SurfaceSample> out;
  if (keys.empty() || n == 0) return out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = rng.uniform() * total;
    auto it = std::upper_bound(cum.begin(), cum.end(), r);
    if (it == cum.end()) --it;
    const auto k = keys[static_cast<std::size_t>(it - cum.begin())];
    SurfaceSample smp = sample_face(sources[static_cast<std::size_t>(k.first)], k.second, rng);
    smp.source = k.first;
    out.push_back(smp);
  }
  return out;
}

std::vector<SurfaceSource> surface_sources(const Scene& scene) {
  std::vector<SurfaceSource> out;
  for (const auto& s : world_solids(scene)) {
    SurfaceSource src;
    src.shape = s.shape;
    switch (s.kind) {
      case SolidKind::Body: src.label = {SegLabel::Kind::Body, 0}; break;
      case SolidKind::Part: src.label = {SegLabel::Kind::Part, s.index}; break;
      case SolidKind::Handle:
        src.label = {SegLabel::Kind::Part, s.index};
        src.handle = true;
        src.skip_local_neg_x = true;
        break;
      case SolidKind::Occluder: src.label = {SegLabel::Kind::Occluder, s.index}; break;
    }
    out.push_back(std::move(src));
  }
  return out;
}

std::vector<std::size_t> farthest_point_sampling(std::span<const Vec3> points, std::size_t k, std::size_t first) {
  return kernels::fps(points, k, first);
}

namespace {

/// Draws `n` surface samples, rejecting points strictly inside another source.
std::vector<SurfaceSample> sample_visible(std::span<const SurfaceSource> sources, std::size_t n, Rng& rng) {
  std::vector<SurfaceSample> out;
  out.reserve(n);
  std::size_t attempts = 0;
  const std::size_t budget = 50 * n + 1000;
  while (out.size() < n && attempts < budget) {
    const std::size_t want = n - out.size();
    auto batch = sample_surfaces(sources, want, rng);
    attempts += want;
    for (auto& s : batch) {
      bool buried = false;
      for (std::size_t j = 0; j < sources.size() && !buried; ++j)
        if (static_cast<int>(j) != s.source && point_primitive_distance(s.point, sources[j].shape) < -1e-6)
          buried = true;
      if (!buried) out.push_back(s);
    }
  }
  if (out.size() < n) throw InvalidArgument("sample_cloud: surfaces are fully buried");
  return out;
}

}  // namespace

LabeledCloud sample_cloud(const Scene& scene, std::size_t n_raw, std::size_t n_out, std::uint64_t seed) {
  if (!(n_out >= 1 && n_raw >= n_out)) throw InvalidArgument("sample_cloud: need n_raw >= n_out >= 1");
  Rng rng(derive_seed(seed, {0xc10d}));
  const auto sources = surface_sources(scene);
  const auto raw = sample_visible(sources, n_raw, rng);

  std::vector<std::size_t> keep;
  if (n_out == n_raw) {
    keep.resize(n_raw);
    for (std::size_t i = 0; i < n_raw; ++i) keep[i] = i;
  } else {
    std::vector<Vec3> pts(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) pts[i] = raw[i].point;
    keep = farthest_point_sampling(pts, n_out, 0);
  }
  LabeledCloud cloud;
  cloud.points.reserve(n_out);
  for (std::size_t i : keep) {
    const auto& s = raw[i];
    const auto& src = sources[static_cast<std::size_t>(s.source)];
    cloud.points.push_back(s.point);
    cloud.normals.push_back(s.normal);
    cloud.seg.push_back(src.label);
    cloud.handle.push_back(src.handle ? 1 : 0);
  }
  return cloud;
}

LabeledCloud augment_cloud(const LabeledCloud& anchor, const Scene& anchor_scene, const Scene& augmented,
                           int occluder_index, std::uint64_t seed) {
  if (occluder_index < 0 || static_cast<std::size_t>(occluder_index) >= augmented.occluders.size())
    throw InvalidArgument("augment_cloud: occluder index out of range");
  double anchor_area = 0.0;
  for (const auto& s : surface_sources(anchor_scene)) anchor_area += sampleable_area(s);
  SurfaceSource added;
  added.shape = augmented.occluders[static_cast<std::size_t>(occluder_index)].world();
  added.label = {SegLabel::Kind::Occluder, occluder_index};
  const double added_area = sampleable_area(added);

  std::vector<std::size_t> replaceable;
  for (std::size_t i = 0; i < anchor.size(); ++i)
    if (!anchor.seg[i].is_part()) replaceable.push_back(i);
  const double share = added_area / (anchor_area + added_area);
  std::size_t m = static_cast<std::size_t>(std::llround(share * static_cast<double>(anchor.size())));
  m = std::clamp<std::size_t>(m, 1, replaceable.size());

  // Densest points first: smallest nearest-neighbour distance, ties by index.
  std::vector<double> nn(anchor.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < anchor.size(); ++i)
    for (std::size_t j = i + 1; j < anchor.size(); ++j) {
      const double d = norm_sq(anchor.points[i] - anchor.points[j]);
      nn[i] = std::min(nn[i], d);
      nn[j] = std::min(nn[j], d);
    }
  std::stable_sort(replaceable.begin(), replaceable.end(),
                   [&nn](std::size_t a, std::size_t b) { return nn[a] < nn[b]; });
  replaceable.resize(m);
  std::sort(replaceable.begin(), replaceable.end());

  Rng rng(derive_seed(seed, {0xa0c1}));
  const std::vector<SurfaceSource> one{added};
  const auto raw = sample_surfaces(one, 4 * m, rng);
  std::vector<Vec3> pts(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) pts[i] = raw[i].point;
  const auto pick = farthest_point_sampling(pts, m, 0);

  LabeledCloud out = anchor;
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t dst = replaceable[r];
    const auto& s = raw[pick[r]];
    out.points[dst] = s.point;
    out.normals[dst] = s.normal;
    out.seg[dst] = added.label;
    out.handle[dst] = 0;
  }
  return out;
}

Scene augment_positive(const Scene& scene, const Vec3& target_point,
                       const std::function<int(const Scene&)>& label_of, const AugmentOptions& opt) {
  if (opt.pool.empty()) throw InvalidArgument("augment_positive: empty occluder pool");
  const int label = label_of(scene);
  Rng rng(derive_seed(opt.seed, {0xa116}));
  const RigidTransform to_local = scene.target.base_pose.inverse();
  const Vec3 robot_l = to_local.apply(scene.robot);
  const Vec3 target_l = to_local.apply(target_point);
  const Vec3 ra{robot_l.x, robot_l.y, 0.0}, tb{target_l.x, target_l.y, 0.0};

  for (int attempt = 0; attempt < opt.max_retries; ++attempt) {
    const auto& fam = opt.pool[rng.index(opt.pool.size())];
    const bool left = rng.bernoulli(0.5);
    const double band_y = rng.uniform(opt.region.y.hi - opt.periphery_band, opt.region.y.hi);
    const Vec3 xy{rng.uniform(opt.region.x.lo, opt.region.x.hi), left ? -band_y : band_y, 0.0};
    const double yaw = rng.uniform(0.0, kPi);
    Occluder o = make_occluder(fam, xy, yaw, rng);
    const Aabb footprint = bounding_box(o.shape);
    const double reach = std::hypot(footprint.hi.x - footprint.lo.x, footprint.hi.y - footprint.lo.y) / 2;
    if (segment_point_distance(ra, tb, xy) < opt.corridor_clearance + reach) continue;
    o.pose = scene.target.base_pose.compose(o.pose);
    if (!placement_ok(scene, o.world(), kPlacementClearance)) continue;
    Scene out = scene;
    out.id = opt.new_id;
    out.occluders.push_back(std::move(o));
    if (label_of(out) == label) return out;
  }
  throw AugmentFailure("augment_positive: no label-preserving peripheral placement within " +
                       std::to_string(opt.max_retries) + " attempts");
}

std::size_t sample_negative_point(const LabeledCloud& cloud, std::size_t anchor, std::uint64_t seed, double d_min) {
  const auto targets = cloud.target_indices();
  std::vector<std::size_t> far, other;
  for (std::size_t i : targets) {
    if (i == anchor) continue;
    other.push_back(i);
    if (distance(cloud.points[i], cloud.points[anchor]) >= d_min) far.push_back(i);
  }
  if (other.empty()) throw InvalidArgument("sample_negative_point: need at least two target points");
  const auto& pool = far.empty() ? other : far;
  Rng rng(derive_seed(seed, {0x4e6}));
  return pool[rng.index(pool.size())];
}

// ---------------------------------------------------------------------------
// Mirroring through the target-frame plane y = 0.

namespace {

const Mat3 kFlipY{{1, 0, 0, 0, -1, 0, 0, 0, 1}};

OrientedBox mirror_box(const OrientedBox& b) {
  return {kFlipY * b.center, b.half_extents, kFlipY * b.rotation * kFlipY};
}

}  // namespace

Scene mirror_scene(const Scene& scene) {
  Scene out = scene;
  const RigidTransform& base = scene.target.base_pose;
  // World-space reflection L p + c with L = Rb F Rbᵀ.
  const Mat3 l = base.rotation * kFlipY * base.rotation.transposed();
  const Vec3 c = base.translation - l * base.translation;

  for (auto& b : out.target.body) b = mirror_box(b);
  for (auto& p : out.target.parts) {
    p.shape = mirror_box(p.shape);
    if (p.handle) p.handle = mirror_box(*p.handle);
    p.joint.anchor = kFlipY * p.joint.anchor;
    const Vec3 ax = kFlipY * p.joint.axis.vec();
    // Rotation axes are pseudo-vectors and pick up the determinant sign.
    p.joint.axis = UnitVec3::trusted(p.joint.kind == JointKind::Revolute ? -ax : ax);
  }
  for (auto& o : out.occluders) {
    o.pose = RigidTransform{l * o.pose.rotation * kFlipY, l * o.pose.translation + c};
    o.shape = std::visit(
        [](const auto& p) -> Primitive {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, OrientedBox>) {
            return mirror_box(p);
          } else if constexpr (std::is_same_v<T, Sphere>) {
            return Sphere{kFlipY * p.center, p.radius};
          } else {
            return Cylinder{kFlipY * p.base, UnitVec3::trusted(kFlipY * p.axis.vec()), p.half_length, p.radius};
          }
        },
        o.shape);
  }
  out.robot = l * scene.robot + c;
  return out;
}

LabeledCloud mirror_cloud(const LabeledCloud& cloud, const Scene& scene) {
  const RigidTransform& base = scene.target.base_pose;
  const Mat3 l = base.rotation * kFlipY * base.rotation.transposed();
  const Vec3 c = base.translation - l * base.translation;
  LabeledCloud out = cloud;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    out.points[i] = l * cloud.points[i] + c;
    out.normals[i] = l * cloud.normals[i];
  }
  return out;
}

}  // namespace envaff
