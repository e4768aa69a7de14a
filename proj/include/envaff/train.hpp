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

#ifndef ENVAFF_TRAIN_HPP
#define ENVAFF_TRAIN_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "envaff/dataset.hpp"
#include "envaff/learn.hpp"

namespace envaff {

inline constexpr std::uint8_t kCheckpointVersion = 1;

struct TrainConfig {
  std::size_t batch_triplets = 10;  // 30 records per step
  AdamConfig adam;
  LossWeights loss;
  int epochs = 30;
  std::uint64_t seed = 0;
  bool no_field = false;
  bool no_cl = false;
};

struct TrainResult {
  Model model;
  AdamState optimizer;
  std::vector<LossParts> curve;  // per-epoch means
};

/// Triplets of `action` from a collected dataset, as network examples.
std::vector<TripletExample> triplet_examples(const Dataset& ds, Action action, const ModelConfig& cfg);

using EpochCallback = std::function<void(int epoch, const LossParts& mean)>;

/// Deterministic per seed. NonFiniteGradient is rethrown with the step index.
TrainResult train_examples(std::span<const TripletExample> data, Action action, ModelConfig mc,
                           const TrainConfig& tc, const EpochCallback& on_epoch = {});
TrainResult train(const Dataset& ds, Action action, const ModelConfig& mc, const TrainConfig& tc,
                  const EpochCallback& on_epoch = {});

/// Versioned binary: magic, version byte, JSON model header, parameters,
/// Adam moments. Throws IoFailure / CorruptData / VersionMismatch.
void save_checkpoint(const std::string& path, const Model& m, const AdamState& opt);
std::string encode_checkpoint(const Model& m, const AdamState& opt);
void decode_checkpoint(const std::string& bytes, Model& m, AdamState& opt);
Model load_checkpoint(const std::string& path, AdamState* opt = nullptr);

void save_loss_curve_csv(const std::string& path, const std::vector<LossParts>& curve);

}  // namespace envaff

#endif  // ENVAFF_TRAIN_HPP
