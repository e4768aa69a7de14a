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

#include "envaff/field.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <unordered_set>

#include "envaff/error.hpp"

namespace envaff {

SignificantSet select_significant(const LabeledCloud& cloud, const Vec3& robot, const Vec3& target,
                                  int target_part, const SelectOptions& opt) {
  if (opt.k < 1) throw InvalidArgument("select_significant: k must be >= 1");
  std::vector<Vec3> values(cloud.size());
  kernels::field_values(cloud.points, robot, target, values, opt.exec);

  std::vector<FieldSample> cand;
  cand.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const SegLabel s = cloud.seg[i];
    if (!opt.include_target_points && s.is_part() && s.index == target_part) continue;
    cand.push_back({i, values[i], norm(values[i])});
  }
  auto less = [](const FieldSample& a, const FieldSample& b) {
    return a.magnitude < b.magnitude || (a.magnitude == b.magnitude && a.point_index < b.point_index);
  };
  const std::size_t keep = std::min(opt.k, cand.size());
  std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(keep), cand.end(), less);
  cand.resize(keep);
  return {std::move(cand), opt.k};
}

SignificantSet select_significant(const LabeledCloud& cloud, const Vec3& robot, std::size_t point_index,
                                  const SelectOptions& opt) {
  if (point_index >= cloud.size()) throw InvalidPoint("select_significant: point index out of range");
  const SegLabel s = cloud.seg[point_index];
  return select_significant(cloud, robot, cloud.points[point_index], s.is_part() ? s.index : -1, opt);
}

void export_field_csv(const std::string& path, const LabeledCloud& cloud, const Vec3& robot, const Vec3& target,
                      const SignificantSet& selected) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot open " + path);
  std::unordered_set<std::size_t> chosen;
  for (const auto& s : selected.samples) chosen.insert(s.point_index);
  out << "index,F1,F2,F3,magnitude,selected\n";
  char buf[256];
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3 f = field_value(cloud.points[i], robot, target);
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%d\n", i, f.x, f.y, f.z, norm(f),
                  chosen.count(i) ? 1 : 0);
    out << buf;
  }
  if (!out) throw IoFailure("write failed: " + path);
}

}  // namespace envaff
