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

#include "envaff/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "envaff/error.hpp"
#include "json.hpp"

namespace envaff {

const char* to_string(Action a) { return a == Action::Push ? "push" : "pull"; }

Action parse_action(const std::string& s) {
  if (s == "push") return Action::Push;
  if (s == "pull") return Action::Pull;
  throw InvalidArgument("unknown action '" + s + "' (expected push or pull)");
}

const char* to_string(FailureReason r) {
  switch (r) {
    case FailureReason::Unreachable: return "unreachable";
    case FailureReason::ApproachCollision: return "approach_collision";
    case FailureReason::NotGraspable: return "not_graspable";
    case FailureReason::ManipulationCollision: return "manipulation_collision";
    case FailureReason::InsufficientMotion: return "insufficient_motion";
  }
  return "unknown";
}

void OracleConfig::validate() const {
  const double vals[] = {r_min,      r_max, r_ee, d_approach, delta_push, delta_pull, theta_min_prismatic,
                         theta_min_revolute, ee_height, step};
  for (double v : vals)
    if (!(v > 0) || !std::isfinite(v)) throw InvalidArgument("OracleConfig: all values must be positive and finite");
  if (!(r_min < r_max)) throw InvalidArgument("OracleConfig: r_min must be below r_max");
  if (step > r_ee / 4 + 1e-15) throw InvalidArgument("OracleConfig: step must be at most r_ee/4");
  if (sweep_states < 1) throw InvalidArgument("OracleConfig: sweep_states must be >= 1");
}

Contact contact_at(const LabeledCloud& cloud, std::size_t point_index) {
  if (point_index >= cloud.size()) throw InvalidPoint("point index " + std::to_string(point_index) + " out of range");
  const SegLabel s = cloud.seg[point_index];
  if (!s.is_part()) throw InvalidPoint("point " + std::to_string(point_index) + " is not on a target part");
  return {cloud.points[point_index], cloud.normals[point_index], s.index, cloud.handle[point_index] != 0};
}

namespace {

/// Joint-space rate of a unit Cartesian push along `dir` applied at `point`
/// (both target frame).
double joint_rate(const Joint& j, const Vec3& point, const Vec3& dir) {
  if (j.kind == JointKind::Prismatic) return dot(dir, j.axis.vec());
  const Vec3 v = cross(j.axis.vec(), point - j.anchor);
  const double v2 = norm_sq(v);
  if (v2 < 1e-12) return 0.0;
  return dot(dir, v) / v2;
}

bool is_moving(const Solid& s, int part) {
  return (s.kind == SolidKind::Part || s.kind == SolidKind::Handle) && s.index == part;
}

bool capsule_hits_any(const Capsule& cap, const std::vector<Solid>& solids, int skip_part, double step) {
  for (const auto& s : solids) {
    if (skip_part >= 0 && is_moving(s, skip_part)) continue;
    if (capsule_hits_primitive(cap, s.shape, step)) return true;
  }
  return false;
}

}  // namespace

InteractionPath plan_path(const Scene& scene, const Contact& c, Action action, const OracleConfig& cfg) {
  const auto& t = scene.target;
  if (c.part < 0 || static_cast<std::size_t>(c.part) >= t.parts.size()) throw InvalidPoint("contact part out of range");
  const Joint& j = t.parts[static_cast<std::size_t>(c.part)].joint;
  const Vec3 n = c.normal;
  const Vec3 dir = action == Action::Push ? -n : n;
  const double delta = action == Action::Push ? cfg.delta_push : cfg.delta_pull;

  const RigidTransform to_local = t.base_pose.inverse();
  const double rate = joint_rate(j, to_local.apply(c.point), to_local.apply_direction(dir));
  const double raw = delta * rate;
  const double end = std::clamp(j.state + raw, j.lo, j.hi);
  const double moved = end - j.state;
  const double stroke = raw != 0.0 ? delta * moved / raw : 0.0;

  const Vec3 start{scene.robot.x, scene.robot.y, cfg.ee_height};
  const Vec3 pre = c.point + n * (cfg.d_approach + cfg.r_ee);
  const Vec3 touch = c.point + n * cfg.r_ee;
  InteractionPath path;
  path.capsules = {{start, pre, cfg.r_ee}, {pre, touch, cfg.r_ee}, {touch, touch + dir * stroke, cfg.r_ee}};
  path.state_begin = j.state;
  path.state_end = end;
  return path;
}

Verdict check_path(const Scene& scene, const Contact& c, Action action, const InteractionPath& path,
                   const OracleConfig& cfg) {
  if (path.capsules.size() != 3) throw InvalidArgument("check_path: expected three path segments");
  // (a) reach
  const double reach = distance(c.point, scene.robot);
  if (reach < cfg.r_min || reach > cfg.r_max) return Verdict::failure(FailureReason::Unreachable);

  // (b) swept end-effector
  const auto solids = world_solids(scene);
  if (capsule_hits_any(path.capsules[0], solids, -1, cfg.step) ||
      capsule_hits_any(path.capsules[1], solids, c.part, cfg.step))
    return Verdict::failure(FailureReason::ApproachCollision);
  if (capsule_hits_any(path.capsules[2], solids, c.part, cfg.step))
    return Verdict::failure(FailureReason::ManipulationCollision);

  // (c) graspability
  if (action == Action::Pull && !c.handle) return Verdict::failure(FailureReason::NotGraspable);

  // (d) part motion
  const Joint& j = scene.target.parts[static_cast<std::size_t>(c.part)].joint;
  const double theta_min = j.kind == JointKind::Prismatic ? cfg.theta_min_prismatic : cfg.theta_min_revolute;
  const double moved = path.state_end - path.state_begin;
  if (std::abs(moved) < theta_min) return Verdict::failure(FailureReason::InsufficientMotion);
  for (int i = 1; i <= cfg.sweep_states; ++i) {
    const double s = path.state_begin + moved * i / cfg.sweep_states;
    const OrientedBox panel = part_world_box(scene.target, c.part, s);
    const auto handle = handle_world_box(scene.target, c.part, s);
    for (const auto& o : scene.occluders) {
      const Primitive w = o.world();
      if (box_overlaps_primitive(panel, w) || (handle && box_overlaps_primitive(*handle, w)))
        return Verdict::failure(FailureReason::ManipulationCollision);
    }
  }
  return Verdict::success();
}

Verdict evaluate(const Scene& scene, const Contact& c, Action action, const OracleConfig& cfg) {
  // Reach first: it needs no path and settles most far-away points.
  const double reach = distance(c.point, scene.robot);
  if (reach < cfg.r_min || reach > cfg.r_max) return Verdict::failure(FailureReason::Unreachable);
  return check_path(scene, c, action, plan_path(scene, c, action, cfg), cfg);
}

Verdict evaluate(const Scene& scene, const LabeledCloud& cloud, std::size_t point_index, Action action,
                 const OracleConfig& cfg) {
  return evaluate(scene, contact_at(cloud, point_index), action, cfg);
}

std::vector<Capsule> explain_path(const Scene& scene, const LabeledCloud& cloud, std::size_t point_index,
                                  Action action, const OracleConfig& cfg) {
  return plan_path(scene, contact_at(cloud, point_index), action, cfg).capsules;
}

std::string explain_path_json(const Scene& scene, const LabeledCloud& cloud, std::size_t point_index, Action action,
                              const OracleConfig& cfg) {
  const Contact c = contact_at(cloud, point_index);
  const InteractionPath path = plan_path(scene, c, action, cfg);
  const Verdict v = evaluate(scene, c, action, cfg);
  nlohmann::json j;
  j["point_index"] = point_index;
  j["action"] = to_string(action);
  j["label"] = v.label;
  j["failure_reason"] = v.reason ? nlohmann::json(to_string(*v.reason)) : nlohmann::json(nullptr);
  j["joint_state"] = {path.state_begin, path.state_end};
  static const char* kPhase[] = {"approach", "contact", "stroke"};
  for (std::size_t i = 0; i < path.capsules.size(); ++i) {
    const Capsule& cap = path.capsules[i];
    j["segments"].push_back({{"phase", kPhase[i]},
                             {"a", {cap.a.x, cap.a.y, cap.a.z}},
                             {"b", {cap.b.x, cap.b.y, cap.b.z}},
                             {"radius", cap.radius}});
  }
  return j.dump(2);
}

std::vector<Verdict> census_serial(const Scene& scene, const LabeledCloud& cloud, std::span<const std::size_t> indices,
                                   Action action, const OracleConfig& cfg) {
  std::vector<Verdict> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(evaluate(scene, cloud, i, action, cfg));
  return out;
}

std::vector<Verdict> census_omp(const Scene& scene, const LabeledCloud& cloud, std::span<const std::size_t> indices,
                                Action action, const OracleConfig& cfg) {
  std::vector<Contact> contacts;
  contacts.reserve(indices.size());
  for (std::size_t i : indices) contacts.push_back(contact_at(cloud, i));  // throws before the parallel region
  std::vector<Verdict> out(indices.size());
  const auto n = static_cast<std::ptrdiff_t>(indices.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t s = 0; s < n; ++s) {
    const auto u = static_cast<std::size_t>(s);
    out[u] = evaluate(scene, contacts[u], action, cfg);
  }
  return out;
}

}  // namespace envaff
