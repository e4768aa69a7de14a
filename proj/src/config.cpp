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

#include "envaff/config.hpp"

#include <cstdio>
#include <limits>
#include <optional>
#include <set>

#include "envaff/error.hpp"
#include "envaff/scene_io.hpp"

namespace envaff {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw ConfigError(path + ": " + msg); }

// One JSON object being consumed; `done()` rejects keys nobody asked for.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void real(const std::string& key, double& out, double lo, double hi, bool open_lo = false, bool open_hi = false) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_number()) fail(at(key), "expected a number");
    const double x = v->get<double>();
    const bool ok = (open_lo ? x > lo : x >= lo) && (open_hi ? x < hi : x <= hi);
    if (!ok) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "expected a value in %c%g, %g%c", open_lo ? '(' : '[', lo, hi, open_hi ? ')' : ']');
      fail(at(key), buf);
    }
    out = x;
  }

  template <class I>
  void integer(const std::string& key, I& out, long long lo, long long hi = std::numeric_limits<long long>::max()) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_number_integer()) fail(at(key), "expected an integer");
    const long long x = v->get<long long>();
    if (x < lo || x > hi) fail(at(key), "expected an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    out = static_cast<I>(x);
  }

  void seed(const std::string& key, std::uint64_t& out) {
    const json* v = find(key);
    if (!v) return;
    const bool ok = v->is_number_unsigned() || (v->is_number_integer() && v->get<std::int64_t>() >= 0);
    if (!ok) fail(at(key), "expected a non-negative integer");
    out = v->get<std::uint64_t>();
  }

  void flag(const std::string& key, bool& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_boolean()) fail(at(key), "expected true or false");
    out = v->get<bool>();
  }

  std::optional<std::string> text(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) fail(at(key), "expected a string");
    return v->get<std::string>();
  }

  std::optional<Obj> sub(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    return Obj(*v, at(key));
  }

  void done() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) fail(at(k), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

void read_quota(Obj& parent, const std::string& key, Quota& q) {
  auto o = parent.sub(key);
  if (!o) return;
  o->integer("success", q.success, 0);
  o->integer("failure", q.failure, 0);
  o->done();
}

void read_occluder_range(Obj& o, int& lo, int& hi) {
  o.integer("min_occluders", lo, 0, 16);
  o.integer("max_occluders", hi, 0, 16);
  if (hi < lo) fail(o.at("max_occluders"), "must not be below min_occluders");
}

}  // namespace

void Config::propagate() {
  collect.seed = seed;
  collect.cloud = cloud;
  collect.oracle = oracle;
  test.seed = seed;
  test.cloud = cloud;
  test.oracle = oracle;
  train.seed = seed;
  eval.policy.seed = seed;
  eval.policy.tau = eval.tau;
}

Config config_from_json(const json& j) {
  Config c;
  Obj root(j, "");
  int version = kConfigVersion;
  root.integer("version", version, 0);
  if (version != kConfigVersion) fail("version", "unsupported config version " + std::to_string(version));
  root.seed("seed", c.seed);

  if (auto o = root.sub("cloud")) {
    o->integer("n_raw", c.cloud.n_raw, 1);
    o->integer("n_out", c.cloud.n_out, 1);
    if (c.cloud.n_out > c.cloud.n_raw) fail(o->at("n_out"), "must not exceed cloud.n_raw");
    o->done();
  }

  if (auto o = root.sub("oracle")) {
    auto& r = c.oracle;
    o->real("r_min", r.r_min, 0.0, kInf);
    o->real("r_max", r.r_max, 0.0, kInf, true);
    o->real("r_ee", r.r_ee, 0.0, kInf, true);
    o->real("d_approach", r.d_approach, 0.0, kInf);
    o->real("delta_push", r.delta_push, 0.0, kInf, true);
    o->real("delta_pull", r.delta_pull, 0.0, kInf, true);
    o->real("theta_min_prismatic", r.theta_min_prismatic, 0.0, kInf, true);
    o->real("theta_min_revolute", r.theta_min_revolute, 0.0, kInf, true);
    o->real("ee_height", r.ee_height, -kInf, kInf);
    o->real("step", r.step, 0.0, kInf, true);
    o->integer("sweep_states", r.sweep_states, 1, 1024);
    o->done();
    try {
      r.validate();
    } catch (const InvalidArgument& e) {
      fail("oracle", e.what());
    }
  }

  if (auto o = root.sub("gen")) {
    o->integer("num_scenes", c.gen.num_scenes, 1, IdRange::kWidth);
    read_occluder_range(*o, c.gen.min_occluders, c.gen.max_occluders);
    if (auto f = o->text("families")) {
      if (*f != "seen" && *f != "novel") fail(o->at("families"), "expected \"seen\" or \"novel\"");
      c.gen.novel = *f == "novel";
    }
    o->integer("id_base", c.gen.id_base, 0);
    o->done();
  }

  if (auto o = root.sub("collect")) {
    o->integer("num_scenes", c.collect.num_scenes, 1, IdRange::kWidth);
    read_quota(*o, "push", c.collect.push);
    read_quota(*o, "pull", c.collect.pull);
    o->real("handle_fraction", c.collect.handle_fraction, 0.0, 1.0);
    o->integer("sample_budget", c.collect.sample_budget, 1);
    o->done();
  }

  if (auto o = root.sub("test")) {
    o->integer("num_scenes", c.test.num_scenes, 1, IdRange::kWidth);
    read_occluder_range(*o, c.test.min_occluders, c.test.max_occluders);
    o->integer("points_per_action", c.test.points_per_action, 1);
    o->real("handle_fraction", c.test.handle_fraction, 0.0, 1.0);
    o->done();
  }

  if (auto o = root.sub("model")) {
    auto& m = c.model;
    o->integer("robot_hidden", m.robot_hidden, 1, 4096);
    o->integer("point_hidden", m.point_hidden, 1, 4096);
    o->integer("scene_hidden", m.scene_hidden, 1, 4096);
    o->integer("feature", m.feature, 1, 4096);
    o->integer("pred_hidden", m.pred_hidden, 1, 4096);
    if (auto s = o->text("scene_input")) {
      if (*s == "field")
        m.scene_input = SceneInput::Field;
      else if (*s == "field+offset")
        m.scene_input = SceneInput::FieldOffset;
      else
        fail(o->at("scene_input"), "expected \"field\" or \"field+offset\"");
    }
    o->real("field_scale", m.field_scale, 0.0, kInf, true);
    o->integer("k_significant", m.k_significant, 1);
    o->flag("include_target_points", m.include_target_points);
    o->done();
  }

  if (auto o = root.sub("train")) {
    auto& t = c.train;
    o->integer("batch_triplets", t.batch_triplets, 1);
    o->integer("epochs", t.epochs, 1, 100000);
    o->real("lr", t.adam.lr, 0.0, kInf, true);
    o->real("beta1", t.adam.beta1, 0.0, 1.0, false, true);
    o->real("beta2", t.adam.beta2, 0.0, 1.0, false, true);
    o->real("eps", t.adam.eps, 0.0, kInf, true);
    o->real("alpha", t.loss.alpha, 0.0, kInf);
    o->real("lambda_cl", t.loss.lambda_cl, 0.0, kInf);
    o->flag("balance_classes", t.loss.balance_classes);
    if (auto a = o->text("ablation")) {
      if (*a != "none" && *a != "no-of" && *a != "no-cl") fail(o->at("ablation"), "expected none, no-of or no-cl");
      t.no_field = *a == "no-of";
      t.no_cl = *a == "no-cl";
    }
    o->done();
  }

  if (auto o = root.sub("eval")) {
    o->real("tau", c.eval.tau, 0.0, 1.0, true, true);
    o->integer("max_proposals", c.eval.policy.max_proposals, 1);
    o->flag("with_sma", c.eval.with_sma);
    o->done();
  }

  root.done();
  c.propagate();
  return c;
}

json config_to_json(const Config& c) {
  const auto& r = c.oracle;
  const auto& m = c.model;
  const auto& t = c.train;
  auto quota = [](const Quota& q) { return json{{"success", q.success}, {"failure", q.failure}}; };
  return json{
      {"version", kConfigVersion},
      {"seed", c.seed},
      {"cloud", {{"n_raw", c.cloud.n_raw}, {"n_out", c.cloud.n_out}}},
      {"oracle",
       {{"r_min", r.r_min},
        {"r_max", r.r_max},
        {"r_ee", r.r_ee},
        {"d_approach", r.d_approach},
        {"delta_push", r.delta_push},
        {"delta_pull", r.delta_pull},
        {"theta_min_prismatic", r.theta_min_prismatic},
        {"theta_min_revolute", r.theta_min_revolute},
        {"ee_height", r.ee_height},
        {"step", r.step},
        {"sweep_states", r.sweep_states}}},
      {"gen",
       {{"num_scenes", c.gen.num_scenes},
        {"min_occluders", c.gen.min_occluders},
        {"max_occluders", c.gen.max_occluders},
        {"families", c.gen.novel ? "novel" : "seen"},
        {"id_base", c.gen.id_base}}},
      {"collect",
       {{"num_scenes", c.collect.num_scenes},
        {"push", quota(c.collect.push)},
        {"pull", quota(c.collect.pull)},
        {"handle_fraction", c.collect.handle_fraction},
        {"sample_budget", c.collect.sample_budget}}},
      {"test",
       {{"num_scenes", c.test.num_scenes},
        {"min_occluders", c.test.min_occluders},
        {"max_occluders", c.test.max_occluders},
        {"points_per_action", c.test.points_per_action},
        {"handle_fraction", c.test.handle_fraction}}},
      {"model",
       {{"robot_hidden", m.robot_hidden},
        {"point_hidden", m.point_hidden},
        {"scene_hidden", m.scene_hidden},
        {"feature", m.feature},
        {"pred_hidden", m.pred_hidden},
        {"scene_input", m.scene_input == SceneInput::Field ? "field" : "field+offset"},
        {"field_scale", m.field_scale},
        {"k_significant", m.k_significant},
        {"include_target_points", m.include_target_points}}},
      {"train",
       {{"batch_triplets", t.batch_triplets},
        {"epochs", t.epochs},
        {"lr", t.adam.lr},
        {"beta1", t.adam.beta1},
        {"beta2", t.adam.beta2},
        {"eps", t.adam.eps},
        {"alpha", t.loss.alpha},
        {"lambda_cl", t.loss.lambda_cl},
        {"balance_classes", t.loss.balance_classes},
        {"ablation", t.no_field ? "no-of" : (t.no_cl ? "no-cl" : "none")}}},
      {"eval", {{"tau", c.eval.tau}, {"max_proposals", c.eval.policy.max_proposals}, {"with_sma", c.eval.with_sma}}},
  };
}

Config load_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>: " + path + " is not valid JSON (" + e.what() + ")");
  }
  return config_from_json(j);
}

std::uint64_t config_hash(const Config& c) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : config_to_json(c).dump()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace envaff
