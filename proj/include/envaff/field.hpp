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

#ifndef ENVAFF_FIELD_HPP
#define ENVAFF_FIELD_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "envaff/geometry.hpp"
#include "envaff/kernels.hpp"
#include "envaff/scene.hpp"

namespace envaff {

/// Occlusion field at p for robot R and target point T: (p − R) × (p − T).
/// Its norm is twice the area of the triangle (p, R, T).
inline Vec3 field_value(const Vec3& p, const Vec3& robot, const Vec3& target) {
  return cross(p - robot, p - target);
}

struct FieldSample {
  std::size_t point_index = 0;
  Vec3 value;
  double magnitude = 0.0;

  bool operator==(const FieldSample&) const = default;
};

/// Samples sorted by ascending magnitude, ties by ascending index.
struct SignificantSet {
  std::vector<FieldSample> samples;
  std::size_t k = 0;
};

struct SelectOptions {
  std::size_t k = 256;
  /// Keep points of the manipulated part as candidates.
  bool include_target_points = false;
  kernels::Exec exec = kernels::Exec::Parallel;
};

/// The k smallest-magnitude field samples among candidate points. Candidates
/// are body, occluder and other-part points; points on `target_part` are
/// candidates only with `include_target_points`. A negative `target_part`
/// excludes no part.
SignificantSet select_significant(const LabeledCloud& cloud, const Vec3& robot, const Vec3& target,
                                  int target_part, const SelectOptions& opt);

/// Convenience form conditioned on cloud point `point_index`.
SignificantSet select_significant(const LabeledCloud& cloud, const Vec3& robot, std::size_t point_index,
                                  const SelectOptions& opt);

/// CSV rows: index,F1,F2,F3,magnitude,selected. Throws IoFailure.
void export_field_csv(const std::string& path, const LabeledCloud& cloud, const Vec3& robot, const Vec3& target,
                      const SignificantSet& selected);

}  // namespace envaff

#endif  // ENVAFF_FIELD_HPP
