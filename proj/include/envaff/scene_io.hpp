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

#ifndef ENVAFF_SCENE_IO_HPP
#define ENVAFF_SCENE_IO_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "envaff/scene.hpp"
#include "json.hpp"

namespace envaff {

inline constexpr int kSceneSchemaVersion = 1;

/// Scene <-> JSON. Doubles are written with round-trip precision so
/// save/load is lossless. from_json throws CorruptData / VersionMismatch.
nlohmann::json scene_to_json(const Scene& scene);
Scene scene_from_json(const nlohmann::json& j);

void save_scene(const std::string& path, const Scene& scene);
Scene load_scene(const std::string& path);

/// Binary little-endian PLY with properties
///   double x y z nx ny nz, int seg, uchar handle
void save_cloud_ply(const std::string& path, const LabeledCloud& cloud);
LabeledCloud load_cloud_ply(const std::string& path);

/// Binary PLY with float x y z and uchar red green blue.
void save_colored_ply(const std::string& path, const std::vector<Vec3>& points,
                      const std::vector<std::array<std::uint8_t, 3>>& colors);

/// Whole-file helpers; throw IoFailure.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace envaff

#endif  // ENVAFF_SCENE_IO_HPP
