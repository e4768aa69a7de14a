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

#ifndef ENVAFF_HARNESS_HPP
#define ENVAFF_HARNESS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "envaff/dataset.hpp"
#include "envaff/learn.hpp"
#include "envaff/oracle.hpp"
#include "envaff/train.hpp"
#include "json.hpp"

namespace envaff {

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

/// Thresholded at pred >= tau. Throws LengthMismatch.
Confusion confusion(std::span<const double> preds, std::span<const int> labels, double tau = 0.5);
/// 2PR / (P + R), 0 when P + R = 0.
double f_score(std::span<const double> preds, std::span<const int> labels, double tau = 0.5);
/// Mean precision at each positive in descending-score order, ties by
/// ascending index; nullopt when there are no positives.
std::optional<double> average_precision(std::span<const double> scores, std::span<const int> labels);

struct ProposalPolicy {
  double tau = 0.5;
  int max_proposals = 1;  // per scene
  std::uint64_t seed = 0;
};

struct SceneRef {
  const Scene* scene = nullptr;
  const LabeledCloud* cloud = nullptr;
};

/// Scores for the listed target points of one scene.
using Scorer = std::function<std::vector<double>(const Scene&, const LabeledCloud&, std::span<const std::size_t>)>;

struct SmaResult {
  double sma = 0.0;
  std::size_t proposals = 0;
  std::size_t successes = 0;
};

/// Samples proposals among target points scoring >= tau (top-1 when none
/// do), executes them with the oracle and returns the success fraction.
/// Throws EmptyScene for a scene without target points.
SmaResult sample_manipulation_accuracy(const Scorer& scorer, std::span<const SceneRef> scenes, Action action,
                                       const ProposalPolicy& policy, const OracleConfig& cfg);

/// Expected success rate of one uniformly random target point per scene.
double random_proposal_rate(std::span<const SceneRef> scenes, Action action, const OracleConfig& cfg);

Scorer model_scorer(const Model& m);
Scorer oracle_scorer(Action action, const OracleConfig& cfg);

struct MetricsReport {
  std::string split;
  Action action = Action::Push;
  std::uint64_t seed = 0;
  double f_score = 0.0;
  std::optional<double> average_precision;
  std::optional<double> sma;
  Confusion counts;
  std::size_t records = 0;
  std::size_t positives = 0;
  std::size_t proposals = 0;
  std::size_t successes = 0;
};

nlohmann::json report_to_json(const MetricsReport& r);

struct EvalOptions {
  double tau = 0.5;
  bool with_sma = false;
  ProposalPolicy policy;
};

/// One report for `model` on the records of `model.action` in `test`.
MetricsReport evaluate_split(const Model& model, const Dataset& test, const EvalOptions& opt, const OracleConfig& cfg);

/// Scores every record of `action` in `ds`, in record order.
std::vector<double> score_records(const Model& model, const Dataset& ds, Action action);

/// Fraction of triplets whose anchor is closer to its positive than to its
/// negative in scene-encoder space.
double triplet_ordering(const Model& model, std::span<const TripletExample> triplets);

/// PLY colored by score on target points (gray elsewhere) plus a CSV of
/// (index, score) for target points. Throws IoFailure.
void export_heatmap(const Model& model, const LabeledCloud& cloud, const Vec3& robot, const std::string& ply_path,
                    const std::string& csv_path);

// -- desk-scale protocol -----------------------------------------------------

enum class Variant : std::uint8_t { Full, NoField, NoCl };
const char* to_string(Variant v);

struct ProtocolSpec {
  std::vector<std::uint64_t> seeds{0, 1, 2};
  CollectSpec collect;
  TestSpec test;
  ModelConfig model;
  TrainConfig train;
  std::vector<Variant> variants{Variant::Full, Variant::NoField, Variant::NoCl};
  bool with_sma = true;
  ProposalPolicy policy;
  OracleConfig oracle;
  int heldout_triplets = 40;  // per action, for the ordering check
};

struct ProtocolCell {
  std::uint64_t seed = 0;
  Variant variant = Variant::Full;
  MetricsReport report;
};

struct ProtocolResult {
  std::vector<ProtocolCell> cells;
  /// Per seed / action / split, the random-proposal success rate.
  struct Baseline {
    std::uint64_t seed;
    Action action;
    std::string split;
    double rate;
  };
  std::vector<Baseline> baselines;
  /// Per seed / action, held-out triplet ordering of the full model.
  struct Ordering {
    std::uint64_t seed;
    Action action;
    double fraction;
  };
  std::vector<Ordering> ordering;
};

using ProgressFn = std::function<void(const std::string&)>;

ProtocolResult run_protocol(const ProtocolSpec& spec, const ProgressFn& progress = {});

}  // namespace envaff

#endif  // ENVAFF_HARNESS_HPP
