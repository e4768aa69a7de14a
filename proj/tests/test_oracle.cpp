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

#include <cmath>

#include "doctest.h"
#include "envaff/error.hpp"
#include "envaff/oracle.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace envaff;
using namespace envaff::testing;

TEST_CASE("push on an open drawer face succeeds") {
  const DrawerScene d(0.1);
  const OracleConfig cfg;
  const Verdict v = evaluate(d.scene, d.cloud, DrawerScene::kFace, Action::Push, cfg);
  CHECK(v == Verdict::success());

  // Each sub-check by hand: reach 0.8 m, stroke fully inside the joint range.
  CHECK(distance(d.scene.robot, d.cloud.points[0]) == doctest::Approx(0.8));
  const InteractionPath path = plan_path(d.scene, contact_at(d.cloud, DrawerScene::kFace), Action::Push, cfg);
  CHECK(path.state_begin == doctest::Approx(0.1));
  CHECK(path.state_end == doctest::Approx(0.0));
}

TEST_CASE("pull needs a handle") {
  const DrawerScene d(0.1);
  const OracleConfig cfg;
  CHECK(evaluate(d.scene, d.cloud, DrawerScene::kFace, Action::Pull, cfg) ==
        Verdict::failure(FailureReason::NotGraspable));
  CHECK(evaluate(d.scene, d.cloud, DrawerScene::kHandle, Action::Pull, cfg) == Verdict::success());
}

TEST_CASE("closed drawer cannot be pushed further") {
  const DrawerScene d(0.0);
  CHECK(evaluate(d.scene, d.cloud, DrawerScene::kFace, Action::Push, OracleConfig{}) ==
        Verdict::failure(FailureReason::InsufficientMotion));
}

TEST_CASE("occluder on the corridor blocks the approach") {
  DrawerScene d(0.1);
  const OracleConfig cfg;
  // Start (0.9, 0.15, 0.5), target (0.1, 0.15, 0.5): the box spans the
  // corridor with zero clearance.
  d.add_occluder(aabb_box({0.45, 0.05, 0.0}, {0.55, 0.25, 0.7}));
  CHECK(evaluate(d.scene, d.cloud, DrawerScene::kFace, Action::Push, cfg) ==
        Verdict::failure(FailureReason::ApproachCollision));

  // Same box lowered below the corridor by more than r_ee.
  DrawerScene low(0.1);
  low.add_occluder(aabb_box({0.45, 0.05, 0.0}, {0.55, 0.25, 0.45}));
  CHECK(evaluate(low.scene, low.cloud, DrawerScene::kFace, Action::Push, cfg) == Verdict::success());
  // And raised to within r_ee of it.
  DrawerScene graze(0.1);
  graze.add_occluder(aabb_box({0.45, 0.05, 0.0}, {0.55, 0.25, 0.47}));
  CHECK(evaluate(graze.scene, graze.cloud, DrawerScene::kFace, Action::Push, cfg) ==
        Verdict::failure(FailureReason::ApproachCollision));
}

TEST_CASE("occluder in the drawer's path blocks pulling") {
  DrawerScene d(0.1);
  const OracleConfig cfg;
  // Clear of the arm (which reaches the handle from +x at y = 0) but in
  // front of the drawer's lower half.
  d.add_occluder(aabb_box({0.15, -0.28, 0.0}, {0.25, -0.12, 0.42}));
  const Verdict v = evaluate(d.scene, d.cloud, DrawerScene::kHandle, Action::Pull, cfg);
  CHECK(v.label == 0);
  CHECK(v.reason == FailureReason::ManipulationCollision);
}

TEST_CASE("out of reach fails first") {
  DrawerScene d(0.1);
  d.scene.robot = {2.0, 0.15, 0.5};
  // Also not graspable for pull, but reach is checked first.
  CHECK(evaluate(d.scene, d.cloud, DrawerScene::kFace, Action::Pull, OracleConfig{}) ==
        Verdict::failure(FailureReason::Unreachable));
  d.scene.robot = {0.2, 0.15, 0.5};
  CHECK(evaluate(d.scene, d.cloud, DrawerScene::kFace, Action::Push, OracleConfig{}) ==
        Verdict::failure(FailureReason::Unreachable));
}

TEST_CASE("non-target points are rejected") {
  const DrawerScene d;
  CHECK_THROWS_AS(evaluate(d.scene, d.cloud, DrawerScene::kBody, Action::Push, OracleConfig{}), InvalidPoint);
  CHECK_THROWS_AS(evaluate(d.scene, d.cloud, 99, Action::Push, OracleConfig{}), InvalidPoint);
  CHECK_THROWS_AS(explain_path(d.scene, d.cloud, DrawerScene::kBody, Action::Push, OracleConfig{}), InvalidPoint);
}

TEST_CASE("explained paths have three phases and reproduce the verdict") {
  const OracleConfig cfg;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto [s, c] = small_scene(seed, 2, 256);
    for (std::size_t idx : c.target_indices()) {
      for (Action a : {Action::Push, Action::Pull}) {
        const auto caps = explain_path(s, c, idx, a, cfg);
        REQUIRE(caps.size() == 3);
        const Contact k = contact_at(c, idx);
        const Vec3 stroke = caps[2].b - caps[2].a;
        const double along = dot(stroke, k.normal);
        if (a == Action::Push)
          CHECK(along <= 1e-12);
        else
          CHECK(along >= -1e-12);
        const InteractionPath path = plan_path(s, k, a, cfg);
        const bool reach = distance(k.point, s.robot) >= cfg.r_min && distance(k.point, s.robot) <= cfg.r_max;
        if (reach) CHECK(check_path(s, k, a, path, cfg) == evaluate(s, c, idx, a, cfg));
      }
      if (idx > 60) break;
    }
  }
  const DrawerScene d;
  const auto j = nlohmann::json::parse(explain_path_json(d.scene, d.cloud, DrawerScene::kFace, Action::Push, cfg));
  CHECK(j.at("segments").size() == 3);
  CHECK(j.at("label") == 1);
}

TEST_CASE("adding occluders never turns failure into success") {
  const OracleConfig cfg;
  int pairs = 0;
  for (std::uint64_t seed = 0; pairs < 200; ++seed) {
    SceneSpec ss;
    ss.seed = seed;
    ss.num_occluders = 1;
    const Scene s = generate_scene(ss);
    ss.num_occluders = 2;
    const Scene more = generate_scene(ss);
    const LabeledCloud c = sample_cloud(s, 512, 128, seed);
    Scene plus = s;
    plus.occluders.push_back(more.occluders.back());
    for (std::size_t idx : c.target_indices()) {
      for (Action a : {Action::Push, Action::Pull}) {
        const int before = evaluate(s, c, idx, a, cfg).label;
        const int after = evaluate(plus, c, idx, a, cfg).label;
        CHECK_FALSE((before == 0 && after == 1));
      }
    }
    ++pairs;
  }
}

TEST_CASE("mirroring preserves labels") {
  const OracleConfig cfg;
  int successes = 0;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const auto [s, c] = small_scene(seed, 2, 256);
    const Scene ms = mirror_scene(s);
    const LabeledCloud mc = mirror_cloud(c, s);
    for (std::size_t idx : c.target_indices())
      for (Action a : {Action::Push, Action::Pull}) {
        const Verdict v = evaluate(s, c, idx, a, cfg);
        CHECK(v == evaluate(ms, mc, idx, a, cfg));
        successes += v.label;
      }
  }
  CHECK(successes > 0);
}

TEST_CASE("census is identical serial and parallel") {
  const OracleConfig cfg;
  const auto [s, c] = small_scene(31, 3, 512);
  const auto idx = c.target_indices();
  for (Action a : {Action::Push, Action::Pull}) {
    const auto ser = census_serial(s, c, idx, a, cfg);
    CHECK(ser == census_omp(s, c, idx, a, cfg));
    for (std::size_t i = 0; i < idx.size(); i += 7) CHECK(ser[i] == evaluate(s, c, idx[i], a, cfg));
  }
  const std::vector<std::size_t> bad{idx.front(), c.size()};
  CHECK_THROWS_AS(census_omp(s, c, bad, Action::Push, cfg), InvalidPoint);
}

TEST_CASE("verdict invariant: success has no reason") {
  const OracleConfig cfg;
  const auto [s, c] = small_scene(13, 1, 256);
  for (std::size_t idx : c.target_indices())
    for (Action a : {Action::Push, Action::Pull}) {
      const Verdict v = evaluate(s, c, idx, a, cfg);
      CHECK((v.label == 1) == !v.reason.has_value());
    }
}

TEST_CASE("oracle config validation") {
  OracleConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.step = cfg.r_ee / 2;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = OracleConfig{};
  cfg.r_max = cfg.r_min;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = OracleConfig{};
  cfg.delta_push = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}

TEST_CASE("action and reason names") {
  CHECK(std::string(to_string(Action::Push)) == "push");
  CHECK(parse_action("pull") == Action::Pull);
  CHECK_THROWS_AS(parse_action("poke"), InvalidArgument);
  CHECK(std::string(to_string(FailureReason::ApproachCollision)) == "approach_collision");
}
