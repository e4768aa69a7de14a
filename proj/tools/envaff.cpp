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

// envaff: scene generation, dataset collection, training and evaluation.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or config error.
// Failures print one JSON line {"error":{"code":...,"message":...}} to stderr.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "envaff/config.hpp"
#include "envaff/dataset.hpp"
#include "envaff/error.hpp"
#include "envaff/harness.hpp"
#include "envaff/rng.hpp"
#include "envaff/scene_io.hpp"
#include "envaff/train.hpp"
#include "json.hpp"

#ifndef ENVAFF_VERSION
#define ENVAFF_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace envaff;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> action;
  std::optional<std::string> split;
  std::optional<std::size_t> k_significant;
  std::optional<std::string> ablation;
  std::string out;
  std::string data;
  std::string model;
  std::string scene;
  std::string cloud;
  std::optional<std::size_t> point;
};

Config resolve(const Options& o) {
  Config c = o.config.empty() ? Config{} : load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.k_significant) {
    if (*o.k_significant == 0) throw ConfigError("model.k_significant: expected a positive integer");
    c.model.k_significant = *o.k_significant;
  }
  if (o.ablation) {
    c.train.no_field = *o.ablation == "no-of";
    c.train.no_cl = *o.ablation == "no-cl";
  }
  c.propagate();
  return c;
}

json provenance(const std::string& command, const Config& c) {
  return json{{"tool", "envaff"},
              {"version", ENVAFF_VERSION},
              {"command", command},
              {"config_hash", hex64(config_hash(c))},
              {"seed", c.seed},
              {"formats",
               {{"config", kConfigVersion},
                {"scene", kSceneSchemaVersion},
                {"dataset", kDatasetFormatVersion},
                {"checkpoint", kCheckpointVersion}}}};
}

void announce(const json& prov) { std::cout << json{{"provenance", prov}}.dump() << "\n"; }

void write_json(const fs::path& p, const json& j) { write_file(p.string(), j.dump(2) + "\n"); }

fs::path out_dir(const Options& o) {
  if (o.out.empty()) throw InvalidArgument("--out is required");
  fs::create_directories(o.out);
  return o.out;
}

void check_action(const Options& o, const Model& m) {
  if (o.action && parse_action(*o.action) != m.action)
    throw InvalidArgument("--action " + *o.action + " does not match the checkpoint (" + to_string(m.action) + ")");
}

Model load_model(const Options& o, const Config& c) {
  if (o.model.empty()) throw InvalidArgument("--model is required");
  Model m = load_checkpoint(o.model);
  check_action(o, m);
  if (o.k_significant) m.cfg.k_significant = c.model.k_significant;
  return m;
}

int cmd_gen_scenes(const Options& o) {
  const Config c = resolve(o);
  const json prov = provenance("gen-scenes", c);
  announce(prov);
  const fs::path dir = out_dir(o);
  const auto& g = c.gen;
  json index = json::array();
  for (int i = 0; i < g.num_scenes; ++i) {
    const std::int64_t id = g.id_base + i;
    Rng rng(derive_seed(c.seed, {0x6e5e, static_cast<std::uint64_t>(id)}));
    SceneSpec ss;
    ss.id = id;
    ss.num_occluders =
        g.min_occluders + static_cast<int>(rng.index(static_cast<std::uint64_t>(g.max_occluders - g.min_occluders + 1)));
    ss.pool = g.novel ? OccluderFamily::novel() : OccluderFamily::seen();
    ss.seed = derive_seed(c.seed, {0x5ce0e, static_cast<std::uint64_t>(id)});
    const Scene s = generate_scene(ss);
    const LabeledCloud cloud =
        sample_cloud(s, c.cloud.n_raw, c.cloud.n_out, derive_seed(c.seed, {0xc1011d, static_cast<std::uint64_t>(id)}));
    const std::string stem = std::to_string(id);
    save_scene((dir / ("scene_" + stem + ".json")).string(), s);
    save_cloud_ply((dir / ("cloud_" + stem + ".ply")).string(), cloud);
    index.push_back({{"id", id}, {"occluders", s.occluders.size()}, {"points", cloud.size()}});
  }
  write_json(dir / "scenes.json", {{"provenance", prov}, {"config", config_to_json(c)}, {"scenes", index}});
  std::cout << "wrote " << g.num_scenes << " scenes to " << dir.string() << "\n";
  return 0;
}

int cmd_build_dataset(const Options& o) {
  const Config c = resolve(o);
  const json prov = provenance("build-dataset", c);
  announce(prov);
  const Split split = parse_split(o.split.value_or("train"));
  const fs::path dir = out_dir(o);
  const Dataset ds = split == Split::Train ? collect(c.collect) : build_test_set(c.test, split);
  save_dataset(dir.string(), ds);
  write_json(dir / "provenance.json", {{"provenance", prov}, {"config", config_to_json(c)}});
  std::cout << "wrote " << ds.records.size() << " records, " << ds.triplets.size() << " triplets to "
            << dir.string() << "\n";
  return 0;
}

int cmd_train(const Options& o) {
  const Config c = resolve(o);
  const json prov = provenance("train", c);
  announce(prov);
  if (o.data.empty()) throw InvalidArgument("--data is required");
  const Action a = parse_action(o.action.value_or("push"));
  const fs::path dir = out_dir(o);
  const Dataset ds = load_dataset(o.data);
  const TrainResult tr = train(ds, a, c.model, c.train, [](int epoch, const LossParts& l) {
    std::fprintf(stderr, "epoch %d loss %.6f (affordance %.6f, contrastive %.6f)\n", epoch, l.total, l.affordance,
                 l.contrastive);
  });
  save_checkpoint((dir / "model.ckpt").string(), tr.model, tr.optimizer);
  save_loss_curve_csv((dir / "loss.csv").string(), tr.curve);
  write_json(dir / "provenance.json", {{"provenance", prov}, {"config", config_to_json(c)}, {"action", to_string(a)}});
  std::cout << "wrote " << (dir / "model.ckpt").string() << "\n";
  return 0;
}

int cmd_eval(const Options& o) {
  const Config c = resolve(o);
  const json prov = provenance("eval", c);
  announce(prov);
  const Model m = load_model(o, c);
  const fs::path dir = out_dir(o);
  Dataset test;
  if (!o.data.empty()) {
    test = load_dataset(o.data);
    if (o.split && parse_split(*o.split) != test.manifest.split)
      throw InvalidArgument("--split " + *o.split + " does not match " + o.data);
  } else {
    const Split split = parse_split(o.split.value_or("test-seen"));
    if (split == Split::Train) throw InvalidArgument("eval needs a test split");
    test = build_test_set(c.test, split);
  }
  const MetricsReport r = evaluate_split(m, test, c.eval, c.oracle);
  json out = report_to_json(r);
  out["provenance"] = prov;
  write_json(dir / "report.json", out);
  std::cout << out.dump() << "\n";
  return 0;
}

struct Loaded {
  Scene scene;
  LabeledCloud cloud;
};

Loaded load_inputs(const Options& o) {
  if (o.scene.empty() || o.cloud.empty()) throw InvalidArgument("--scene and --cloud are required");
  Loaded in{load_scene(o.scene), load_cloud_ply(o.cloud)};
  const auto problems = validate_cloud(in.cloud, in.scene);
  if (!problems.empty()) throw CorruptData("cloud does not match scene: " + problems.front());
  const auto solids = world_solids(in.scene);
  for (std::size_t i = 0; i < in.cloud.size(); ++i) {
    double best = INFINITY;
    for (const auto& s : solids) best = std::min(best, std::abs(point_primitive_distance(in.cloud.points[i], s.shape)));
    if (best > 1e-6)
      throw CorruptData("cloud does not match scene: point " + std::to_string(i) + " is off every surface");
  }
  return in;
}

int cmd_predict(const Options& o) {
  const Config c = resolve(o);
  const json prov = provenance("predict", c);
  announce(prov);
  const Model m = load_model(o, c);
  const Loaded in = load_inputs(o);
  const fs::path dir = out_dir(o);
  std::vector<std::size_t> idx;
  if (o.point) {
    if (*o.point >= in.cloud.size()) throw InvalidPoint("--point " + std::to_string(*o.point) + " out of range");
    idx.push_back(*o.point);
  } else {
    idx = in.cloud.target_indices();
  }
  const auto scores = predict_points(m, in.cloud, in.scene.robot, idx, kernels::Exec::Parallel);
  std::string csv = "index,score\n";
  char buf[64];
  for (std::size_t j = 0; j < idx.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", idx[j], scores[j]);
    csv += buf;
  }
  write_file((dir / "scores.csv").string(), csv);
  std::cout << "scored " << idx.size() << " points\n";
  return 0;
}

int cmd_export_heatmap(const Options& o) {
  const Config c = resolve(o);
  announce(provenance("export-heatmap", c));
  const Model m = load_model(o, c);
  const Loaded in = load_inputs(o);
  const fs::path dir = out_dir(o);
  export_heatmap(m, in.cloud, in.scene.robot, (dir / "heatmap.ply").string(), (dir / "heatmap.csv").string());
  std::cout << "wrote " << (dir / "heatmap.ply").string() << "\n";
  return 0;
}

void print_error(const std::string& code, const std::string& message) {
  std::cerr << json{{"error", {{"code", code}, {"message", message}}}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Environment-aware affordance: scenes, datasets, training and evaluation"};
  app.require_subcommand(1);
  Options o;

  auto common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--out", o.out, "output directory");
  };
  auto model_flags = [&o](CLI::App* sub) {
    sub->add_option("--model", o.model, "checkpoint from train")->required();
    sub->add_option("--action", o.action, "push or pull")->check(CLI::IsMember({"push", "pull"}));
    sub->add_option("--k-significant", o.k_significant, "field samples fed to the scene encoder");
  };

  auto* gen = app.add_subcommand("gen-scenes", "generate scenes and point clouds");
  common(gen);
  auto* build = app.add_subcommand("build-dataset", "collect a training set or label a test split");
  common(build);
  build->add_option("--split", o.split, "train, test-seen or test-novel")
      ->check(CLI::IsMember({"train", "test-seen", "test-novel"}));
  auto* tr = app.add_subcommand("train", "train one action model");
  common(tr);
  tr->add_option("--data", o.data, "dataset directory")->required();
  tr->add_option("--action", o.action, "push or pull")->check(CLI::IsMember({"push", "pull"}));
  tr->add_option("--k-significant", o.k_significant, "field samples fed to the scene encoder");
  tr->add_option("--ablation", o.ablation, "none, no-of or no-cl")->check(CLI::IsMember({"none", "no-of", "no-cl"}));
  auto* ev = app.add_subcommand("eval", "metrics report for a checkpoint");
  common(ev);
  model_flags(ev);
  ev->add_option("--data", o.data, "labelled test split directory (built from the config when absent)");
  ev->add_option("--split", o.split, "test-seen or test-novel")->check(CLI::IsMember({"test-seen", "test-novel"}));
  auto* pr = app.add_subcommand("predict", "score target points of one scene");
  common(pr);
  model_flags(pr);
  pr->add_option("--scene", o.scene, "scene JSON")->required();
  pr->add_option("--cloud", o.cloud, "cloud PLY")->required();
  pr->add_option("--point", o.point, "single point index");
  auto* hm = app.add_subcommand("export-heatmap", "colored PLY and CSV of target-point scores");
  common(hm);
  model_flags(hm);
  hm->add_option("--scene", o.scene, "scene JSON")->required();
  hm->add_option("--cloud", o.cloud, "cloud PLY")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    print_error("UsageError", e.what());
    return 2;
  }

  try {
    if (*gen) return cmd_gen_scenes(o);
    if (*build) return cmd_build_dataset(o);
    if (*tr) return cmd_train(o);
    if (*ev) return cmd_eval(o);
    if (*pr) return cmd_predict(o);
    if (*hm) return cmd_export_heatmap(o);
  } catch (const ConfigError& e) {
    print_error(e.code(), e.what());
    return 2;
  } catch (const Error& e) {
    print_error(e.code(), e.what());
    return 1;
  } catch (const fs::filesystem_error& e) {
    print_error("IoFailure", e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("InternalError", e.what());
    return 1;
  }
  return 2;
}
