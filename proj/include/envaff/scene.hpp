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

#ifndef ENVAFF_SCENE_HPP
#define ENVAFF_SCENE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "envaff/geometry.hpp"
#include "envaff/rng.hpp"

namespace envaff {

enum class JointKind : std::uint8_t { Prismatic, Revolute };

/// Single-DoF joint expressed in the target frame. `state` is meters for
/// prismatic joints and radians for revolute ones.
struct Joint {
  JointKind kind = JointKind::Prismatic;
  UnitVec3 axis;
  Vec3 anchor;  // pivot point on the hinge line (revolute only)
  double lo = 0.0;
  double hi = 0.0;
  double state = 0.0;
};

/// Rigid motion of the joint at `state`, in the target frame.
RigidTransform joint_motion(const Joint& joint, double state);

/// A movable panel. `shape` and `handle` are given in the target frame at
/// joint state 0; the local +x axis of `shape` is the panel's outward normal.
struct Part {
  OrientedBox shape;
  Joint joint;
  std::optional<OrientedBox> handle;
};

struct ArticulatedTarget {
  std::vector<OrientedBox> body;  // static solids, target frame
  std::vector<Part> parts;
  RigidTransform base_pose;  // target frame -> world
};

/// Copy of `target` with part `part` moved to `state`. Throws OutOfRange when
/// the state is outside the joint range (or the part index is invalid).
ArticulatedTarget set_joint_state(const ArticulatedTarget& target, int part, double state);

/// World-frame placement of a part's panel / handle at an arbitrary state.
OrientedBox part_world_box(const ArticulatedTarget& target, int part, double state);
std::optional<OrientedBox> handle_world_box(const ArticulatedTarget& target, int part, double state);
inline OrientedBox part_world_box(const ArticulatedTarget& t, int part) {
  return part_world_box(t, part, t.parts[static_cast<std::size_t>(part)].joint.state);
}

enum class ShapeKind : std::uint8_t { Box, Cylinder, Sphere };

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  bool disjoint(const Range& o) const { return hi < o.lo || o.hi < lo; }
  bool contains(double v) const { return v >= lo && v <= hi; }
};

/// Parameter family for procedural occluders. Dimensions are full sizes:
///  box:      a = size x, b = size y, c = height
///  cylinder: a = radius, b = height
///  sphere:   a = radius
struct OccluderFamily {
  std::string name;
  ShapeKind kind = ShapeKind::Box;
  Range a, b, c;

  /// Families drawn during training (extents 5–40 cm).
  static std::vector<OccluderFamily> seen();
  /// Held-out families whose parameter ranges never occur in `seen()`.
  static std::vector<OccluderFamily> novel();
};

/// Index of the family by name within seen() ∪ novel(); -1 when unknown.
int family_index(const std::string& name);

struct Occluder {
  Primitive shape;  // local frame, resting on z = 0 when posed
  RigidTransform pose;
  std::string family;

  Primitive world() const { return transformed(shape, pose); }
};

struct Scene {
  std::int64_t id = 0;
  ArticulatedTarget target;
  std::vector<Occluder> occluders;
  Vec3 robot;  // arm mount point (world, m)
  std::uint64_t rng_seed = 0;
};

/// Axis-aligned placement area for occluders, in the target frame.
struct Region {
  Range x{0.05, 0.65};
  Range y{-0.6, 0.6};
};

struct SceneSpec {
  std::int64_t id = 0;
  int num_occluders = 1;
  std::vector<OccluderFamily> pool = OccluderFamily::seen();
  Region region;
  Range robot_radius{0.6, 1.0};
  Range robot_angle{-0.8726646259971648, 0.8726646259971648};  // ±50°
  double robot_height = 0.5;
  std::uint64_t seed = 0;
  int max_retries = 1000;
};

/// Procedural cabinet + occluders + robot. Deterministic in `spec.seed`.
/// Throws PlacementFailure when an occluder cannot be placed within
/// `spec.max_retries` attempts.
Scene generate_scene(const SceneSpec& spec);

/// Human-readable violations of the Scene invariants; empty when valid.
std::vector<std::string> validate_scene(const Scene& scene);

enum class SolidKind : std::uint8_t { Body, Part, Handle, Occluder };

struct Solid {
  Primitive shape;  // world frame
  SolidKind kind = SolidKind::Body;
  int index = 0;  // body box / part / occluder index
};

/// Every solid of the scene in world coordinates at the current joint states.
std::vector<Solid> world_solids(const Scene& scene);

/// Conservative overlap predicate used for placement; `clearance` > 0 demands
/// a gap of that size.
bool primitives_overlap(const Primitive& a, const Primitive& b, double clearance = 0.0);

/// Semantic label of a cloud point.
struct SegLabel {
  enum class Kind : std::uint8_t { Part, Body, Occluder };
  Kind kind = Kind::Body;
  int index = 0;  // part or occluder index; 0 for body

  bool is_part() const { return kind == Kind::Part; }
  bool operator==(const SegLabel&) const = default;

  /// Flat integer code used on disk: part i → i, body → -1, occluder k → -(k+2).
  std::int32_t encode() const;
  static SegLabel decode(std::int32_t code);
};

struct LabeledCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
  std::vector<SegLabel> seg;
  std::vector<std::uint8_t> handle;

  std::size_t size() const { return points.size(); }
  std::vector<std::size_t> target_indices() const;
  std::vector<std::size_t> handle_indices() const;
  bool operator==(const LabeledCloud&) const = default;
};

/// Violations of the LabeledCloud invariants against `scene`; empty when valid.
std::vector<std::string> validate_cloud(const LabeledCloud& cloud, const Scene& scene);

/// One sampleable surface patch source.
struct SurfaceSource {
  Primitive shape;
  SegLabel label;
  bool handle = false;
  bool skip_floor_face = true;   // omit faces resting on z = 0
  bool skip_local_neg_x = false;  // omit the box face facing local −x (handle back)
};

struct SurfaceSample {
  Vec3 point;
  Vec3 normal;
  int source = 0;
  int face = 0;  // box: 0..5 (+x,-x,+y,-y,+z,-z); cylinder: 0 side, 1 top, 2 bottom; sphere: 0
};

double sampleable_area(const SurfaceSource& src);

/// Area-weighted uniform samples over the sources' surfaces.
std::vector<SurfaceSample> sample_surfaces(std::span<const SurfaceSource> sources, std::size_t n, Rng& rng);

std::vector<SurfaceSource> surface_sources(const Scene& scene);

/// Greedy max-min subset of size k starting from index `first`; returns indices
/// in pick order.
std::vector<std::size_t> farthest_point_sampling(std::span<const Vec3> points, std::size_t k,
                                                 std::size_t first = 0);

/// Surface point cloud: n_raw area-weighted samples (points buried inside
/// another solid are rejected), furthest-point downsampled to n_out.
LabeledCloud sample_cloud(const Scene& scene, std::size_t n_raw, std::size_t n_out, std::uint64_t seed);

/// Cloud of a scene that extends the anchor scene by the occluder at
/// `occluder_index`. Target-part points keep their indices; the densest
/// non-target points are replaced by samples of the new occluder in
/// proportion to its surface area.
LabeledCloud augment_cloud(const LabeledCloud& anchor, const Scene& anchor_scene, const Scene& augmented,
                           int occluder_index, std::uint64_t seed);

struct AugmentOptions {
  std::vector<OccluderFamily> pool = OccluderFamily::seen();
  Region region;
  double periphery_band = 0.2;        // width of the lateral edge band (m)
  double corridor_clearance = 0.25;   // min xy distance from robot→target corridor (m)
  int max_retries = 200;
  std::uint64_t seed = 0;
  std::int64_t new_id = 0;
};

/// S' = S plus one occluder at the lateral periphery such that
/// `label_of(S') == label_of(S)`. Throws AugmentFailure after the retry budget.
Scene augment_positive(const Scene& scene, const Vec3& target_point,
                       const std::function<int(const Scene&)>& label_of, const AugmentOptions& opt);

/// Uniform draw among target-part points other than `anchor` at distance
/// ≥ d_min from it; falls back to any other target point.
std::size_t sample_negative_point(const LabeledCloud& cloud, std::size_t anchor, std::uint64_t seed,
                                  double d_min = 0.05);

/// Reflection through the target's vertical mid-plane (target-frame y = 0).
Scene mirror_scene(const Scene& scene);
LabeledCloud mirror_cloud(const LabeledCloud& cloud, const Scene& scene);

}  // namespace envaff

#endif  // ENVAFF_SCENE_HPP
