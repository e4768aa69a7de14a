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

// Serial reference vs OpenMP variant of each hot kernel.

#include <benchmark/benchmark.h>

#include <vector>

#include "envaff/kernels.hpp"
#include "envaff/learn.hpp"
#include "envaff/oracle.hpp"
#include "envaff/rng.hpp"
#include "envaff/scene.hpp"

namespace {

using namespace envaff;
using kernels::Exec;

std::vector<Vec3> random_points(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec3> p(n);
  for (auto& v : p) v = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0, 1.5)};
  return p;
}

struct Fixture {
  Scene scene;
  LabeledCloud cloud;
  std::vector<std::size_t> targets;
  Model model;

  Fixture() {
    SceneSpec ss;
    ss.seed = 7;
    ss.num_occluders = 3;
    scene = generate_scene(ss);
    cloud = sample_cloud(scene, 8192, 2048, 11);
    targets = cloud.target_indices();
    model = Model::init(ModelConfig{}, Action::Push, 3);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

Exec exec_of(const benchmark::State& st) { return st.range(0) == 0 ? Exec::Serial : Exec::Parallel; }

void BM_FieldValues(benchmark::State& st) {
  const auto pts = random_points(static_cast<std::size_t>(st.range(1)), 1);
  std::vector<Vec3> out(pts.size());
  for (auto _ : st) {
    kernels::field_values(pts, {1.0, 0.0, 0.5}, {0.0, 0.1, 0.6}, out, exec_of(st));
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(1));
}
BENCHMARK(BM_FieldValues)->ArgsProduct({{0, 1}, {2048, 10000}});

void BM_Fps(benchmark::State& st) {
  const auto pts = random_points(8192, 2);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::fps(pts, static_cast<std::size_t>(st.range(1)), 0, exec_of(st)));
}
BENCHMARK(BM_Fps)->ArgsProduct({{0, 1}, {512, 2048}})->Unit(benchmark::kMillisecond);

void BM_DenseRows(benchmark::State& st) {
  const std::size_t rows = static_cast<std::size_t>(st.range(1)), in = 13, out = 64;
  Rng rng(3);
  std::vector<double> x(rows * in), w(out * in), b(out), y(rows * out);
  for (auto& v : x) v = rng.uniform(-1, 1);
  for (auto& v : w) v = rng.uniform(-1, 1);
  for (auto _ : st) {
    kernels::dense_rows(x, rows, in, w, b, out, y, exec_of(st));
    benchmark::DoNotOptimize(y.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(1));
}
BENCHMARK(BM_DenseRows)->ArgsProduct({{0, 1}, {2048, 10000}});

void BM_Census(benchmark::State& st) {
  const auto& f = fixture();
  const OracleConfig cfg;
  for (auto _ : st) benchmark::DoNotOptimize(census(f.scene, f.cloud, f.targets, Action::Push, cfg, exec_of(st)));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(f.targets.size()));
}
BENCHMARK(BM_Census)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_PredictPoints(benchmark::State& st) {
  const auto& f = fixture();
  for (auto _ : st)
    benchmark::DoNotOptimize(predict_points(f.model, f.cloud, f.scene.robot, f.targets, exec_of(st)));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(f.targets.size()));
}
BENCHMARK(BM_PredictPoints)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
