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

#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "envaff/error.hpp"
#include "envaff/field.hpp"
#include "envaff/scene_io.hpp"
#include "support.hpp"

using namespace envaff;
using namespace envaff::testing;

namespace {

LabeledCloud occluder_cloud(const std::vector<Vec3>& pts) {
  LabeledCloud c;
  for (const auto& p : pts) {
    c.points.push_back(p);
    c.normals.push_back({0, 0, 1});
    c.seg.push_back({SegLabel::Kind::Occluder, 0});
    c.handle.push_back(0);
  }
  return c;
}

std::vector<std::size_t> indices(const SignificantSet& s) {
  std::vector<std::size_t> out;
  for (const auto& f : s.samples) out.push_back(f.point_index);
  return out;
}

}  // namespace

TEST_CASE("field values at the special points") {
  const Vec3 r{0.3, -0.2, 0.5}, t{1.0, 0.4, 0.7};
  CHECK(field_value(r, r, t) == Vec3{0, 0, 0});
  CHECK(field_value(t, r, t) == Vec3{0, 0, 0});
  const Vec3 f = field_value({1, 1, 0}, {0, 0, 0}, {2, 0, 0});
  CHECK(f == Vec3{0, 0, 2});
  CHECK(norm(f) == doctest::Approx(2.0));
  // Collinear with R and T_p, beyond either end.
  CHECK(norm(field_value(r + (t - r) * 2.5, r, t)) <= 1e-15);
  CHECK(norm(field_value(r - (t - r) * 0.5, r, t)) <= 1e-15);
}

TEST_CASE("field magnitude is twice the triangle area") {
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 p = random_vec(rng), r = random_vec(rng), t = random_vec(rng);
    // Heron's formula as an independent area reference.
    const double a = distance(p, r), b = distance(p, t), c = distance(r, t);
    const double s = (a + b + c) / 2;
    const double area = std::sqrt(std::max(0.0, s * (s - a) * (s - b) * (s - c)));
    CHECK(norm(field_value(p, r, t)) == doctest::Approx(2 * area).epsilon(1e-6));
  }
}

TEST_CASE("field is rigidly equivariant") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 p = random_vec(rng), r = random_vec(rng), t = random_vec(rng), shift = random_vec(rng, 5);
    const Mat3 q = random_rotation(rng);
    const Vec3 f = field_value(p, r, t);
    const Vec3 g = field_value(q * p + shift, q * r + shift, q * t + shift);
    const double scale = distance(p, r) * distance(p, t);
    CHECK(close_vec(g, q * f, 1e-9, scale));
    CHECK(close_rel(norm(g), norm(f), 1e-9, scale));
  }
}

TEST_CASE("field is continuous at the target point") {
  Rng rng(4);
  for (double eps : {1e-3, 1e-6}) {
    for (int i = 0; i < 500; ++i) {
      const Vec3 r = random_vec(rng), t = random_vec(rng);
      Vec3 u = random_vec(rng);
      if (norm(u) < 1e-6) continue;
      u = u / norm(u);
      CHECK(norm(field_value(t + u * eps, r, t)) <= eps * distance(t, r) + eps * eps);
    }
  }
}

TEST_CASE("significant set picks the smallest magnitudes") {
  // R=(0,0,0), T=(2,0,0); a point (1,h,0) has magnitude 2h.
  const LabeledCloud c = occluder_cloud({{1, 1.0, 0}, {1, 0.25, 0}, {1, 0.5, 0}});
  const Vec3 r{0, 0, 0}, t{2, 0, 0};
  SelectOptions opt;
  opt.k = 2;
  const auto s = select_significant(c, r, t, -1, opt);
  CHECK(indices(s) == std::vector<std::size_t>{1, 2});
  CHECK(s.samples[0].magnitude == doctest::Approx(0.5));
  CHECK(s.samples[1].magnitude == doctest::Approx(1.0));
  opt.k = 10;
  CHECK(select_significant(c, r, t, -1, opt).samples.size() == 3);
}

TEST_CASE("ties on the robot-target line are index ordered") {
  const LabeledCloud c = occluder_cloud({{3, 0, 0}, {0.5, 0, 0}, {-1, 0, 0}, {1.5, 0, 0}, {1, 0.1, 0}});
  SelectOptions opt;
  opt.k = 3;
  const auto s = select_significant(c, {0, 0, 0}, {2, 0, 0}, -1, opt);
  CHECK(indices(s) == std::vector<std::size_t>{0, 1, 2});
  for (const auto& f : s.samples) CHECK(f.magnitude == 0.0);
}

TEST_CASE("manipulated part is excluded unless requested") {
  const auto [scene, cloud] = small_scene(5, 2, 512);
  const auto targets = cloud.target_indices();
  const std::size_t t = targets[targets.size() / 2];
  const int part = cloud.seg[t].index;
  SelectOptions opt;
  opt.k = 100000;
  const auto excl = select_significant(cloud, scene.robot, t, opt);
  for (const auto& f : excl.samples) {
    const SegLabel& l = cloud.seg[f.point_index];
    CHECK_FALSE((l.is_part() && l.index == part));
  }
  opt.include_target_points = true;
  const auto incl = select_significant(cloud, scene.robot, t, opt);
  CHECK(incl.samples.size() == cloud.size());
  CHECK(incl.samples.size() > excl.samples.size());
  CHECK_THROWS_AS(select_significant(cloud, scene.robot, cloud.size() + 3, opt), InvalidPoint);
}

TEST_CASE("selection is stable under far-field additions") {
  const auto [scene, cloud] = small_scene(6, 1, 512);
  const auto targets = cloud.target_indices();
  const std::size_t t = targets.front();
  SelectOptions opt;
  opt.k = 64;
  const auto base = select_significant(cloud, scene.robot, t, opt);
  const double kth = base.samples.back().magnitude;

  LabeledCloud more = cloud;
  Rng rng(1);
  int added = 0;
  while (added < 300) {
    const Vec3 p = random_vec(rng, 3);
    if (norm(field_value(p, scene.robot, cloud.points[t])) <= kth) continue;
    more.points.push_back(p);
    more.normals.push_back({0, 0, 1});
    more.seg.push_back({SegLabel::Kind::Occluder, 0});
    more.handle.push_back(0);
    ++added;
  }
  CHECK(indices(select_significant(more, scene.robot, t, opt)) == indices(base));
}

TEST_CASE("selection is independent of the execution mode") {
  const auto [scene, cloud] = small_scene(8, 3, 1024);
  for (std::size_t t : cloud.target_indices()) {
    SelectOptions a, b;
    a.exec = kernels::Exec::Serial;
    b.exec = kernels::Exec::Parallel;
    const auto sa = select_significant(cloud, scene.robot, t, a);
    const auto sb = select_significant(cloud, scene.robot, t, b);
    REQUIRE(sa.samples.size() == sb.samples.size());
    CHECK(std::equal(sa.samples.begin(), sa.samples.end(), sb.samples.begin()));
    CHECK(std::is_sorted(sa.samples.begin(), sa.samples.end(),
                         [](const FieldSample& x, const FieldSample& y) { return x.magnitude < y.magnitude; }));
    for (const auto& f : sa.samples) CHECK(std::abs(f.magnitude - norm(f.value)) <= 1e-12);
    if (t > 40) break;
  }
}

TEST_CASE("field CSV export") {
  TempDir dir("field_csv");
  const LabeledCloud c = occluder_cloud({{1, 1.0, 0}, {1, 0.25, 0}, {1, 0.5, 0}});
  SelectOptions opt;
  opt.k = 1;
  const auto s = select_significant(c, {0, 0, 0}, {2, 0, 0}, -1, opt);
  export_field_csv(dir / "f.csv", c, {0, 0, 0}, {2, 0, 0}, s);
  std::istringstream in(read_file(dir / "f.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "index,F1,F2,F3,magnitude,selected");
  int rows = 0, selected = 0;
  while (std::getline(in, line)) {
    ++rows;
    selected += line.back() == '1';
  }
  CHECK(rows == 3);
  CHECK(selected == 1);
}
