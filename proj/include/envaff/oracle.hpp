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

#ifndef ENVAFF_ORACLE_HPP
#define ENVAFF_ORACLE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "envaff/geometry.hpp"
#include "envaff/kernels.hpp"
#include "envaff/scene.hpp"

namespace envaff {

enum class Action : std::uint8_t { Push, Pull };

const char* to_string(Action a);
/// "push" | "pull"; throws InvalidArgument otherwise.
Action parse_action(const std::string& s);

enum class FailureReason : std::uint8_t {
  Unreachable,
  ApproachCollision,
  NotGraspable,
  ManipulationCollision,
  InsufficientMotion,
};

const char* to_string(FailureReason r);

struct OracleConfig {
  double r_min = 0.25;
  double r_max = 1.05;
  double r_ee = 0.04;
  double d_approach = 0.08;
  double delta_push = 0.10;
  double delta_pull = 0.10;
  double theta_min_prismatic = 0.03;  // m
  double theta_min_revolute = 0.1;    // rad
  double ee_height = 0.5;
  double step = 0.01;
  int sweep_states = 8;

  /// Throws InvalidArgument on a violated invariant.
  void validate() const;
};

struct Verdict {
  int label = 0;
  std::optional<FailureReason> reason;

  static Verdict success() { return {1, std::nullopt}; }
  static Verdict failure(FailureReason r) { return {0, r}; }
  bool operator==(const Verdict&) const = default;
};

/// What the oracle needs to know about a target point.
struct Contact {
  Vec3 point;
  Vec3 normal;  // outward, unit
  int part = 0;
  bool handle = false;
};

/// Throws InvalidPoint unless `point_index` is a target-part point of `cloud`.
Contact contact_at(const LabeledCloud& cloud, std::size_t point_index);

/// The three swept segments (approach, contact, stroke) plus the joint
/// states the stroke moves the part between.
struct InteractionPath {
  std::vector<Capsule> capsules;
  double state_begin = 0.0;
  double state_end = 0.0;
};

InteractionPath plan_path(const Scene& scene, const Contact& c, Action action, const OracleConfig& cfg);

/// Checks (a)..(d) given an already planned path.
Verdict check_path(const Scene& scene, const Contact& c, Action action, const InteractionPath& path,
                   const OracleConfig& cfg);

Verdict evaluate(const Scene& scene, const Contact& c, Action action, const OracleConfig& cfg);
Verdict evaluate(const Scene& scene, const LabeledCloud& cloud, std::size_t point_index, Action action,
                 const OracleConfig& cfg);

std::vector<Capsule> explain_path(const Scene& scene, const LabeledCloud& cloud, std::size_t point_index,
                                  Action action, const OracleConfig& cfg);
std::string explain_path_json(const Scene& scene, const LabeledCloud& cloud, std::size_t point_index,
                              Action action, const OracleConfig& cfg);

/// Verdicts for many points of one cloud.
std::vector<Verdict> census_serial(const Scene& scene, const LabeledCloud& cloud, std::span<const std::size_t> indices,
                                   Action action, const OracleConfig& cfg);
std::vector<Verdict> census_omp(const Scene& scene, const LabeledCloud& cloud, std::span<const std::size_t> indices,
                                Action action, const OracleConfig& cfg);
inline std::vector<Verdict> census(const Scene& scene, const LabeledCloud& cloud,
                                   std::span<const std::size_t> indices, Action action, const OracleConfig& cfg,
                                   kernels::Exec exec = kernels::Exec::Parallel) {
  return exec == kernels::Exec::Serial ? census_serial(scene, cloud, indices, action, cfg)
                                       : census_omp(scene, cloud, indices, action, cfg);
}

}  // namespace envaff

#endif  // ENVAFF_ORACLE_HPP
