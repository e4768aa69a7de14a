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

// Four-network affordance model: robot encoder, target encoder, scene
// (occlusion-field) encoder and predictor, with hand-written backward passes.
// All parameters live in one flat vector; each layer is a view into it.

#ifndef ENVAFF_LEARN_HPP
#define ENVAFF_LEARN_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "envaff/field.hpp"
#include "envaff/kernels.hpp"
#include "envaff/oracle.hpp"
#include "envaff/scene.hpp"

namespace envaff {

/// Per-point target-encoder input width: position, normal, class one-hot
/// (part, body, occluder), handle flag, same-part flag, position − T.
inline constexpr std::size_t kPointFeatures = 14;

enum class SceneInput : std::uint8_t {
  Field,        // field vector only
  FieldOffset,  // field vector and position − T
};

struct ModelConfig {
  std::size_t robot_hidden = 64;
  std::size_t point_hidden = 64;
  std::size_t scene_hidden = 64;
  std::size_t feature = 128;  // width of f_R, f_T and f_S
  std::size_t pred_hidden = 128;
  SceneInput scene_input = SceneInput::Field;
  double field_scale = 10.0;  // field values are O(0.01) m²
  std::size_t k_significant = 256;
  bool include_target_points = false;
  bool no_field = false;  // ablation: f_S ≡ 0

  std::size_t scene_in_dim() const { return scene_input == SceneInput::Field ? 3 : 6; }
  bool operator==(const ModelConfig&) const = default;
};

/// y = W x + b with W (out × in) row-major at params[w], b at params[b].
struct Dense {
  std::size_t in = 0, out = 0, w = 0, b = 0;
  std::size_t size() const { return out * in + out; }
};

struct Model {
  ModelConfig cfg;
  Action action = Action::Push;
  std::vector<double> params;
  Dense robot1, robot2, point, fuse, scene1, scene2, pred1, pred2;

  /// Fan-in uniform weights, zero biases.
  static Model init(const ModelConfig& cfg, Action action, std::uint64_t seed);
  /// Recomputes layer offsets from cfg (params untouched).
  void layout();
  std::size_t num_params() const { return params.size(); }
};

// -- robot encoder ----------------------------------------------------------

struct RobotCache {
  double x[3];
  std::vector<double> pre1, h1, out;
};
void robot_forward(const Model& m, const Vec3& robot, RobotCache& c);
void robot_backward(const Model& m, const RobotCache& c, std::span<const double> dout, std::span<double> grad);

// -- target encoder ---------------------------------------------------------

/// Target-independent part of the per-point preactivation, N × point_hidden.
struct CloudActivations {
  std::vector<double> a;
  std::size_t n = 0;
};
CloudActivations target_prepare(const Model& m, const LabeledCloud& cloud,
                                kernels::Exec exec = kernels::Exec::Serial);

struct TargetCache {
  std::size_t point = 0;
  std::vector<std::size_t> argmax;  // per channel
  std::vector<double> pre_max;      // preactivation at argmax
  std::vector<double> pre_t;        // preactivation at the target point
  std::vector<double> fuse_in;      // [h_T, g]
  std::vector<double> out;
};
void target_forward(const Model& m, const LabeledCloud& cloud, const CloudActivations& act, std::size_t point,
                    TargetCache& c);
void target_backward(const Model& m, const LabeledCloud& cloud, const TargetCache& c, std::span<const double> dout,
                     std::span<double> grad);

/// Full 14-wide feature row of cloud point i conditioned on target point t.
void point_features(const LabeledCloud& cloud, std::size_t i, std::size_t t, double* out);

// -- scene encoder ----------------------------------------------------------

/// Scene-encoder input rows (k × scene_in_dim) for (robot, target point).
std::vector<double> scene_inputs(const ModelConfig& cfg, const LabeledCloud& cloud, const Vec3& robot,
                                 std::size_t point, kernels::Exec exec = kernels::Exec::Serial);

struct SceneCache {
  std::size_t rows = 0;
  std::vector<double> pre;  // rows × scene_hidden
  std::vector<std::size_t> argmax;
  std::vector<double> g, raw;
  double raw_norm = 0.0;
  std::vector<double> out;  // raw / ‖raw‖
};
void scene_forward(const Model& m, std::span<const double> inputs, SceneCache& c);
void scene_backward(const Model& m, std::span<const double> inputs, const SceneCache& c,
                    std::span<const double> dout, std::span<double> grad);

// -- predictor --------------------------------------------------------------

struct PredictorCache {
  std::vector<double> z, pre1, h1;
  double logit = 0.0;
  double score = 0.5;
};
void predictor_forward(const Model& m, std::span<const double> z, PredictorCache& c);
/// Accumulates parameter gradients and writes d score / d z scaled by
/// `dscore` into dz.
void predictor_backward(const Model& m, const PredictorCache& c, double dscore, std::span<double> grad,
                        std::span<double> dz);

// -- whole model ------------------------------------------------------------

/// One labelled interaction ready for the network.
struct Example {
  const LabeledCloud* cloud = nullptr;
  Vec3 robot;
  std::size_t point = 0;
  double label = 0.0;
  std::vector<double> scene_in;
};

Example make_example(const ModelConfig& cfg, const LabeledCloud& cloud, const Vec3& robot, std::size_t point,
                     double label);

struct RecordCache {
  RobotCache robot;
  TargetCache target;
  SceneCache scene;
  PredictorCache pred;
  double score() const { return pred.score; }
  std::span<const double> embedding() const { return scene.out; }
};

void record_forward(const Model& m, const Example& ex, const CloudActivations& act, RecordCache& c);
void record_backward(const Model& m, const Example& ex, const RecordCache& c, double dscore,
                     std::span<const double> dembed, std::span<double> grad);

/// Score in [0, 1].
double predict(const Model& m, const LabeledCloud& cloud, const Vec3& robot, std::size_t point);
/// Scores for many points of one cloud; reuses the target-independent work.
std::vector<double> predict_points(const Model& m, const LabeledCloud& cloud, const Vec3& robot,
                                   std::span<const std::size_t> points, kernels::Exec exec = kernels::Exec::Serial);
/// f_S for (robot, point); zeros under no_field.
std::vector<double> scene_embedding(const Model& m, const LabeledCloud& cloud, const Vec3& robot, std::size_t point);

// -- losses -----------------------------------------------------------------

/// max(0, ‖a − p‖² − ‖a − n‖² + alpha). Throws ShapeMismatch.
double triplet_loss(std::span<const double> a, std::span<const double> p, std::span<const double> n, double alpha);
/// |pred − label|.
double affordance_loss(double pred, double label);

struct TripletExample {
  Example anchor, positive, negative;
};

struct LossWeights {
  double alpha = 2.0;
  double lambda_cl = 1.0;
  // Reweight the L1 term so both label classes in a batch carry equal mass.
  bool balance_classes = true;
};

struct LossParts {
  double total = 0.0;
  double affordance = 0.0;  // mean over all records
  double contrastive = 0.0;  // mean over triplets
};

/// L = mean_records w_r |pred − label| + λ · mean_triplets hinge, with w_r = 1
/// unless classes are balanced. When `grad` is non-empty it receives
/// ∂L/∂params (overwritten).
LossParts batch_loss(const Model& m, std::span<const TripletExample> batch, const LossWeights& w,
                     std::span<double> grad = {});

// -- optimizer ---------------------------------------------------------------

struct AdamState {
  std::vector<double> m, v;
  std::uint64_t t = 0;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One Adam update. Throws NonFiniteGradient on NaN/inf in `grad`.
void adam_step(std::vector<double>& params, AdamState& st, std::span<const double> grad, const AdamConfig& cfg);

// -- gradient checking -------------------------------------------------------

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t worst = 0;
  std::size_t checked = 0;
  std::size_t kinks = 0;  // coordinates judged against a one-sided slope
};

/// Central differences of f at x for the given coordinates, compared to
/// `analytic`. Relative error |a − n| / max(|a|, |n|, floor). Where the forward
/// and backward slopes disagree by more than `kink_tol` (relative) a ReLU or
/// max-pool switch lies within h; there the error is taken against the closer
/// one-sided slope.
GradCheck check_gradient(const std::function<double(std::span<const double>)>& f, std::vector<double> x,
                         std::span<const double> analytic, std::span<const std::size_t> coords, double h = 1e-5,
                         double floor = 1e-6, double kink_tol = 1e-2);

}  // namespace envaff

#endif  // ENVAFF_LEARN_HPP
