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

#ifndef ENVAFF_CONFIG_HPP
#define ENVAFF_CONFIG_HPP

#include <cstdint>
#include <string>

#include "envaff/dataset.hpp"
#include "envaff/harness.hpp"
#include "envaff/learn.hpp"
#include "envaff/oracle.hpp"
#include "envaff/train.hpp"
#include "json.hpp"

namespace envaff {

inline constexpr int kConfigVersion = 1;

/// Scene generation for `gen-scenes`.
struct GenConfig {
  int num_scenes = 10;
  int min_occluders = 1;
  int max_occluders = 1;
  bool novel = false;  // draw occluders from the held-out families
  std::int64_t id_base = 0;
};

/// Everything a CLI run needs. All sections and keys are optional in the
/// file; missing ones keep these defaults.
struct Config {
  std::uint64_t seed = 0;
  CloudSpec cloud;
  OracleConfig oracle;
  GenConfig gen;
  CollectSpec collect;
  TestSpec test;
  ModelConfig model;
  TrainConfig train;
  EvalOptions eval;

  /// Copies the master seed, cloud and oracle settings into the sections
  /// that carry their own copies.
  void propagate();
};

/// Strict parse: unknown keys, wrong types and out-of-range values raise
/// ConfigError whose message starts with the offending field path, e.g.
/// "train.epochs: expected a positive integer".
Config config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const Config& c);
Config load_config(const std::string& path);

/// FNV-1a 64 of the canonical JSON dump.
std::uint64_t config_hash(const Config& c);
std::string hex64(std::uint64_t v);

}  // namespace envaff

#endif  // ENVAFF_CONFIG_HPP
