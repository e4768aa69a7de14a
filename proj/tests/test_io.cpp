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

#include "doctest.h"
#include "envaff/error.hpp"
#include "envaff/scene_io.hpp"
#include "support.hpp"

using namespace envaff;
using namespace envaff::testing;

TEST_CASE("scenes round-trip through JSON") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto [scene, cloud] = small_scene(seed, 3, 64);
    const Scene back = scene_from_json(nlohmann::json::parse(scene_to_json(scene).dump()));
    CHECK(scene_to_json(back) == scene_to_json(scene));
    CHECK(back.robot == scene.robot);
    CHECK(back.occluders.size() == scene.occluders.size());
  }
}

TEST_CASE("scene JSON errors") {
  const auto [scene, cloud] = small_scene(1, 1, 64);
  auto j = scene_to_json(scene);
  j["schema_version"] = 999;
  CHECK_THROWS_AS(scene_from_json(j), VersionMismatch);
  j = scene_to_json(scene);
  j.erase("robot");
  CHECK_THROWS_AS(scene_from_json(j), CorruptData);
  TempDir dir("scene_io");
  write_file(dir / "bad.json", "{not json");
  CHECK_THROWS_AS(load_scene(dir / "bad.json"), CorruptData);
  CHECK_THROWS_AS(load_scene(dir / "missing.json"), IoFailure);
  save_scene(dir / "s.json", scene);
  CHECK(scene_to_json(load_scene(dir / "s.json")) == scene_to_json(scene));
}

TEST_CASE("clouds round-trip through PLY") {
  const auto [scene, cloud] = small_scene(4, 2, 300);
  TempDir dir("ply");
  save_cloud_ply(dir / "c.ply", cloud);
  const LabeledCloud back = load_cloud_ply(dir / "c.ply");
  CHECK(back.points == cloud.points);
  CHECK(back.normals == cloud.normals);
  CHECK(back.seg == cloud.seg);
  CHECK(back.handle == cloud.handle);

  const std::string bytes = read_file(dir / "c.ply");
  CHECK(bytes.find("element vertex 300\n") != std::string::npos);
  write_file(dir / "t.ply", bytes.substr(0, bytes.size() - 10));
  CHECK_THROWS_AS(load_cloud_ply(dir / "t.ply"), CorruptData);
  write_file(dir / "a.ply", "ply\nformat ascii 1.0\nend_header\n");
  CHECK_THROWS_AS(load_cloud_ply(dir / "a.ply"), CorruptData);
}

TEST_CASE("colored PLY checks lengths") {
  TempDir dir("cply");
  CHECK_THROWS_AS(save_colored_ply(dir / "x.ply", {{0, 0, 0}}, {}), LengthMismatch);
  save_colored_ply(dir / "x.ply", {{0, 0, 0}, {1, 2, 3}}, {{{1, 2, 3}}, {{4, 5, 6}}});
  const std::string b = read_file(dir / "x.ply");
  CHECK(b.find("element vertex 2\n") != std::string::npos);
  CHECK(b.substr(b.size() - 3) == "\x04\x05\x06");
}

TEST_CASE("file helpers report IO failures") {
  CHECK_THROWS_AS(read_file("/nonexistent/envaff/file"), IoFailure);
  CHECK_THROWS_AS(write_file("/nonexistent/envaff/file", "x"), IoFailure);
  try {
    read_file("/nonexistent/envaff/file");
  } catch (const Error& e) {
    CHECK(std::string(e.code()) == "IoFailure");
  }
}
