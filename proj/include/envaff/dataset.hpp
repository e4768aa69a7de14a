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

#ifndef ENVAFF_DATASET_HPP
#define ENVAFF_DATASET_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "envaff/oracle.hpp"
#include "envaff/scene.hpp"
#include "json.hpp"

namespace envaff {

inline constexpr std::uint8_t kDatasetFormatVersion = 1;

enum class Split : std::uint8_t { Train, TestSeen, TestNovel };
const char* to_string(Split s);
Split parse_split(const std::string& s);

/// Scene ids are partitioned by purpose so splits can never share a scene.
struct IdRange {
  static constexpr std::int64_t kTrain = 0;
  static constexpr std::int64_t kPositive = 1'000'000;
  static constexpr std::int64_t kTestSeen = 2'000'000;
  static constexpr std::int64_t kTestNovel = 3'000'000;
  static constexpr std::int64_t kHeldOut = 4'000'000;
  static constexpr std::int64_t kHeldOutPositive = 5'000'000;
  static constexpr std::int64_t kWidth = 1'000'000;
};

struct InteractionRecord {
  std::int64_t scene_ref = 0;
  std::int64_t cloud_ref = 0;
  Vec3 robot;
  std::uint32_t point_index = 0;
  Action action = Action::Push;
  std::uint8_t label = 0;
  std::optional<FailureReason> reason;  // diagnostics only

  bool operator==(const InteractionRecord&) const = default;
};

/// Indices into Dataset::records.
struct Triplet {
  std::size_t anchor = 0;
  std::size_t positive = 0;
  std::size_t negative = 0;
  bool operator==(const Triplet&) const = default;
};

struct Quota {
  int success = 0;
  int failure = 0;
};

struct ActionCounts {
  int anchor_success = 0;
  int anchor_failure = 0;
  int records = 0;
  bool operator==(const ActionCounts&) const = default;
};

struct DatasetManifest {
  int format_version = kDatasetFormatVersion;
  Split split = Split::Train;
  std::uint64_t seed = 0;
  std::size_t n_points = 0;
  std::vector<std::string> families;
  std::map<int, int> occluder_histogram;  // occluder count -> anchor scenes
  ActionCounts push, pull;
  std::size_t num_records = 0;
  std::size_t num_triplets = 0;
  std::vector<std::int64_t> scene_ids;  // every stored scene, ascending

  const ActionCounts& counts(Action a) const { return a == Action::Push ? push : pull; }
  ActionCounts& counts(Action a) { return a == Action::Push ? push : pull; }
  bool operator==(const DatasetManifest&) const = default;
};

struct Dataset {
  DatasetManifest manifest;
  std::map<std::int64_t, Scene> scenes;
  std::map<std::int64_t, LabeledCloud> clouds;  // keyed like scenes
  std::vector<InteractionRecord> records;
  std::vector<Triplet> triplets;

  const Scene& scene(std::int64_t id) const;
  const LabeledCloud& cloud(std::int64_t id) const;
  bool operator==(const Dataset&) const;
};

struct CloudSpec {
  std::size_t n_raw = 8192;
  std::size_t n_out = 2048;
};

struct CollectSpec {
  std::uint64_t seed = 0;
  std::int64_t id_base = IdRange::kTrain;
  std::int64_t positive_id_base = IdRange::kPositive;
  int num_scenes = 200;
  Quota push{90, 90};
  Quota pull{30, 250};
  /// Share of pull draws taken from handle points; the rest come from
  /// non-handle target points.
  double handle_fraction = 0.5;
  int sample_budget = 200'000;
  CloudSpec cloud;
  OracleConfig oracle;
  std::vector<OccluderFamily> pool = OccluderFamily::seen();
};

/// Train-split collection: one-occluder scenes, quota-balanced anchors, each
/// with a contrastive triplet. Throws QuotaFailure naming the starved class.
Dataset collect(const CollectSpec& spec);

struct TestSpec {
  std::uint64_t seed = 0;
  int num_scenes = 100;
  int min_occluders = 2;
  int max_occluders = 4;
  int points_per_action = 32;  // labelled records per scene and action
  double handle_fraction = 0.5;
  CloudSpec cloud;
  OracleConfig oracle;
};

/// Multi-occluder evaluation split; test-seen draws training families,
/// test-novel the held-out ones.
Dataset build_test_set(const TestSpec& spec, Split split);

/// Violations of the Triplet invariants, with the positive label re-checked
/// by the oracle. Empty when all hold.
std::vector<std::string> check_triplets(const Dataset& ds, const OracleConfig& cfg);

/// Directory layout: manifest.json, records.bin, scenes/<id>.json, clouds/<id>.ply.
void save_dataset(const std::string& dir, const Dataset& ds);
/// Throws CorruptData / VersionMismatch.
Dataset load_dataset(const std::string& dir);

nlohmann::json manifest_to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const nlohmann::json& j);

/// Raw records.bin encoding (exposed for tests).
std::string encode_records(const std::vector<InteractionRecord>& records, const std::vector<Triplet>& triplets);
void decode_records(const std::string& bytes, std::vector<InteractionRecord>& records, std::vector<Triplet>& triplets);

}  // namespace envaff

#endif  // ENVAFF_DATASET_HPP
