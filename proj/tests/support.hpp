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

// Fixtures shared by the unit tests and the acceptance runner.

#ifndef ENVAFF_TESTS_SUPPORT_HPP
#define ENVAFF_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "envaff/learn.hpp"
#include "envaff/oracle.hpp"
#include "envaff/rng.hpp"
#include "envaff/scene.hpp"

namespace envaff::testing {

inline OrientedBox aabb_box(const Vec3& lo, const Vec3& hi) {
  return {(lo + hi) * 0.5, (hi - lo) * 0.5, Mat3::identity()};
}

inline Vec3 random_vec(Rng& rng, double s = 1.0) { return {rng.uniform(-s, s), rng.uniform(-s, s), rng.uniform(-s, s)}; }

inline Mat3 random_rotation(Rng& rng) {
  Vec3 axis;
  do axis = random_vec(rng);
  while (norm(axis) < 1e-3);
  return Mat3::rotation(UnitVec3(axis), rng.uniform(-3.14159, 3.14159));
}

inline bool close_rel(double a, double b, double rel, double abs_floor = 1e-300) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), abs_floor});
}

inline bool close_vec(const Vec3& a, const Vec3& b, double rel, double scale) {
  return norm(a - b) <= rel * std::max({norm(a), norm(b), scale});
}

/// Cabinet carcass with one drawer open by `state`, its face centred at
/// height 0.5 m, and the robot 0.7 m in front of the face.
struct DrawerScene {
  Scene scene;
  LabeledCloud cloud;
  static constexpr std::size_t kFace = 0;    // drawer face, off the handle
  static constexpr std::size_t kHandle = 1;  // front of the handle
  static constexpr std::size_t kBody = 2;    // carcass top

  explicit DrawerScene(double state = 0.1) {
    scene.id = 1;
    scene.target.body.push_back(aabb_box({-0.40, -0.5, 0.0}, {-0.02, 0.5, 1.0}));
    Part p;
    p.shape = aabb_box({-0.02, -0.3, 0.4}, {0.0, 0.3, 0.6});
    p.joint.kind = JointKind::Prismatic;
    p.joint.axis = UnitVec3::trusted({1, 0, 0});
    p.joint.lo = 0.0;
    p.joint.hi = 0.25;
    p.joint.state = state;
    p.handle = OrientedBox{{0.01, 0.0, 0.5}, {0.01, 0.02, 0.01}, Mat3::identity()};
    scene.target.parts.push_back(p);
    scene.robot = {0.8 + state, 0.15, 0.5};

    auto add = [this](const Vec3& pt, const Vec3& n, SegLabel seg, bool handle) {
      cloud.points.push_back(pt);
      cloud.normals.push_back(n);
      cloud.seg.push_back(seg);
      cloud.handle.push_back(handle ? 1 : 0);
    };
    add({state, 0.15, 0.5}, {1, 0, 0}, {SegLabel::Kind::Part, 0}, false);
    add({state + 0.02, 0.0, 0.5}, {1, 0, 0}, {SegLabel::Kind::Part, 0}, true);
    add({-0.2, 0.0, 1.0}, {0, 0, 1}, {SegLabel::Kind::Body, 0}, false);
  }

  void add_occluder(const OrientedBox& box) {
    Occluder o;
    o.family = "box";
    o.shape = OrientedBox{{0, 0, box.half_extents.z}, box.half_extents, Mat3::identity()};
    o.pose = RigidTransform::from_translation({box.center.x, box.center.y, box.center.z - box.half_extents.z});
    scene.occluders.push_back(o);
  }
};

/// Scene with `occ` occluders and a small cloud (fast enough for many
/// forward passes).
inline std::pair<Scene, LabeledCloud> small_scene(std::uint64_t seed, int occ = 1, std::size_t n_out = 96) {
  SceneSpec ss;
  ss.seed = seed;
  ss.id = static_cast<std::int64_t>(seed % 100000);
  ss.num_occluders = occ;
  Scene s = generate_scene(ss);
  LabeledCloud c = sample_cloud(s, 4 * n_out, n_out, derive_seed(seed, {0xc1}));
  return {std::move(s), std::move(c)};
}

inline ModelConfig random_model_config(Rng& rng) {
  ModelConfig mc;
  auto dim = [&rng](std::size_t lo, std::size_t hi) { return lo + static_cast<std::size_t>(rng.index(hi - lo + 1)); };
  mc.robot_hidden = dim(2, 12);
  mc.point_hidden = dim(2, 12);
  mc.scene_hidden = dim(2, 12);
  mc.feature = dim(3, 12);
  mc.pred_hidden = dim(2, 12);
  mc.scene_input = rng.bernoulli(0.5) ? SceneInput::Field : SceneInput::FieldOffset;
  mc.k_significant = dim(4, 24);
  mc.include_target_points = rng.bernoulli(0.3);
  return mc;
}

/// Parameter coordinates of the listed layers, subsampled to at most
/// `per_layer` each.
inline std::vector<std::size_t> layer_coords(std::initializer_list<Dense> layers, std::size_t per_layer, Rng& rng) {
  std::vector<std::size_t> out;
  for (const Dense& d : layers) {
    std::vector<std::size_t> all;
    for (std::size_t i = 0; i < d.out * d.in; ++i) all.push_back(d.w + i);
    for (std::size_t i = 0; i < d.out; ++i) all.push_back(d.b + i);
    for (std::size_t i = 0; i < std::min(per_layer, all.size()); ++i) {
      std::swap(all[i], all[i + rng.index(all.size() - i)]);
      out.push_back(all[i]);
    }
  }
  return out;
}

inline std::vector<double> random_weights(std::size_t n, Rng& rng) {
  std::vector<double> w(n);
  for (auto& v : w) v = rng.uniform(-1, 1);
  return w;
}

inline double dot_span(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

enum class GradModule { Robot, Target, Scene, Predictor, Loss };

inline const char* to_string(GradModule g) {
  switch (g) {
    case GradModule::Robot: return "robot encoder";
    case GradModule::Target: return "target encoder";
    case GradModule::Scene: return "scene encoder";
    case GradModule::Predictor: return "predictor";
    case GradModule::Loss: return "full objective";
  }
  return "?";
}

/// Analytic vs central-difference gradient of one sub-module under a random
/// configuration derived from `seed`; the scalar probed is a random linear
/// functional of the module output (the loss itself for GradModule::Loss).
inline GradCheck gradient_case(GradModule mod, std::uint64_t seed, const Scene& scene, const LabeledCloud& cloud) {
  Rng rng(derive_seed(seed, {0x9c, static_cast<std::uint64_t>(mod)}));
  const ModelConfig mc = random_model_config(rng);
  Model m = Model::init(mc, rng.bernoulli(0.5) ? Action::Push : Action::Pull, seed);
  // Non-zero biases so that every parameter is exercised.
  for (auto& p : m.params) p += rng.uniform(-0.05, 0.05);

  const auto targets = cloud.target_indices();
  const std::size_t point = targets[rng.index(targets.size())];
  std::vector<double> grad(m.num_params(), 0.0);
  std::vector<std::size_t> coords;
  std::function<double(std::span<const double>)> f;
  Model probe = m;
  auto with = [&probe](std::span<const double> x) {
    std::copy(x.begin(), x.end(), probe.params.begin());
    return &probe;
  };

  switch (mod) {
    case GradModule::Robot: {
      const Vec3 r = scene.robot + random_vec(rng, 0.2);
      const auto w = random_weights(mc.feature, rng);
      RobotCache c;
      robot_forward(m, r, c);
      robot_backward(m, c, w, grad);
      f = [&, r, w](std::span<const double> x) {
        RobotCache cc;
        robot_forward(*with(x), r, cc);
        return dot_span(cc.out, w);
      };
      coords = layer_coords({m.robot1, m.robot2}, 60, rng);
      break;
    }
    case GradModule::Target: {
      const auto w = random_weights(mc.feature, rng);
      const CloudActivations act = target_prepare(m, cloud);
      TargetCache c;
      target_forward(m, cloud, act, point, c);
      target_backward(m, cloud, c, w, grad);
      f = [&, w, point](std::span<const double> x) {
        const Model* pm = with(x);
        const CloudActivations a = target_prepare(*pm, cloud);
        TargetCache cc;
        target_forward(*pm, cloud, a, point, cc);
        return dot_span(cc.out, w);
      };
      coords = layer_coords({m.point, m.fuse}, 60, rng);
      break;
    }
    case GradModule::Scene: {
      const auto in = scene_inputs(mc, cloud, scene.robot, point);
      const auto w = random_weights(mc.feature, rng);
      SceneCache c;
      scene_forward(m, in, c);
      scene_backward(m, in, c, w, grad);
      f = [&, in, w](std::span<const double> x) {
        SceneCache cc;
        scene_forward(*with(x), in, cc);
        return dot_span(cc.out, w);
      };
      coords = layer_coords({m.scene1, m.scene2}, 60, rng);
      break;
    }
    case GradModule::Predictor: {
      const auto z = random_weights(3 * mc.feature, rng);
      const double ds = rng.uniform(-1, 1);
      PredictorCache c;
      predictor_forward(m, z, c);
      std::vector<double> dz(z.size());
      predictor_backward(m, c, ds, grad, dz);
      f = [&, z, ds](std::span<const double> x) {
        PredictorCache cc;
        predictor_forward(*with(x), z, cc);
        return ds * cc.score;
      };
      coords = layer_coords({m.pred1, m.pred2}, 60, rng);
      break;
    }
    case GradModule::Loss: {
      std::vector<TripletExample> batch;
      for (int t = 0; t < 2; ++t) {
        const std::size_t a = targets[rng.index(targets.size())];
        std::size_t n = targets[rng.index(targets.size())];
        if (n == a) n = targets[(std::find(targets.begin(), targets.end(), a) - targets.begin() + 1) % targets.size()];
        const double la = rng.bernoulli(0.5) ? 1.0 : 0.0;
        const Vec3 rp = scene.robot + random_vec(rng, 0.05);
        batch.push_back({make_example(mc, cloud, scene.robot, a, la), make_example(mc, cloud, rp, a, la),
                         make_example(mc, cloud, scene.robot, n, rng.bernoulli(0.5) ? 1.0 : 0.0)});
      }
      LossWeights lw;
      lw.alpha = rng.uniform(0.5, 3.0);
      lw.lambda_cl = rng.uniform(0.1, 2.0);
      lw.balance_classes = rng.bernoulli(0.5);
      batch_loss(m, batch, lw, grad);
      f = [&, batch, lw](std::span<const double> x) { return batch_loss(*with(x), batch, lw).total; };
      coords = layer_coords({m.robot1, m.robot2, m.point, m.fuse, m.scene1, m.scene2, m.pred1, m.pred2}, 12, rng);
      break;
    }
  }
  return check_gradient(f, m.params, grad, coords);
}

/// Scratch directory under the system temp dir, emptied on construction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / ("envaff_" + name)) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string operator/(const std::string& leaf) const { return (path / leaf).string(); }
};

}  // namespace envaff::testing

#endif  // ENVAFF_TESTS_SUPPORT_HPP
