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

#include "envaff/train.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>

#include "envaff/error.hpp"
#include "envaff/scene_io.hpp"
#include "json.hpp"

namespace envaff {

using nlohmann::json;

std::vector<TripletExample> triplet_examples(const Dataset& ds, Action action, const ModelConfig& cfg) {
  std::vector<TripletExample> out;
  auto example = [&](const InteractionRecord& r) {
    return make_example(cfg, ds.cloud(r.cloud_ref), r.robot, r.point_index, r.label);
  };
  for (const auto& t : ds.triplets) {
    if (ds.records.at(t.anchor).action != action) continue;
    out.push_back({example(ds.records[t.anchor]), example(ds.records[t.positive]), example(ds.records[t.negative])});
  }
  return out;
}

TrainResult train_examples(std::span<const TripletExample> data, Action action, ModelConfig mc, const TrainConfig& tc,
                           const EpochCallback& on_epoch) {
  if (data.empty()) throw InvalidArgument("train: no triplets for action " + std::string(to_string(action)));
  if (tc.batch_triplets == 0 || tc.epochs < 0) throw InvalidArgument("train: bad batch size or epoch count");
  mc.no_field = mc.no_field || tc.no_field;
  for (const auto& t : data)
    for (const Example* e : {&t.anchor, &t.positive, &t.negative})
      if (!mc.no_field && e->scene_in.empty()) throw ShapeMismatch("train: example built without field inputs");
  LossWeights lw = tc.loss;
  if (tc.no_cl) lw.lambda_cl = 0.0;

  TrainResult res;
  res.model = Model::init(mc, action, tc.seed);
  std::vector<double> grad(res.model.num_params());
  std::vector<std::size_t> order(data.size());
  std::uint64_t step = 0;
  for (int epoch = 0; epoch < tc.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(tc.seed, {0xe90c, static_cast<std::uint64_t>(epoch)}));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);

    LossParts sum;
    std::size_t batches = 0;
    std::vector<TripletExample> batch;
    for (std::size_t start = 0; start < order.size(); start += tc.batch_triplets) {
      batch.clear();
      for (std::size_t j = start; j < std::min(order.size(), start + tc.batch_triplets); ++j) batch.push_back(data[order[j]]);
      const LossParts lp = batch_loss(res.model, batch, lw, grad);
      try {
        adam_step(res.model.params, res.optimizer, grad, tc.adam);
      } catch (const NonFiniteGradient& e) {
        throw NonFiniteGradient("step " + std::to_string(step) + ": " + e.what());
      }
      ++step;
      sum.total += lp.total;
      sum.affordance += lp.affordance;
      sum.contrastive += lp.contrastive;
      ++batches;
    }
    const double nb = static_cast<double>(batches);
    const LossParts mean{sum.total / nb, sum.affordance / nb, sum.contrastive / nb};
    res.curve.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  return res;
}

TrainResult train(const Dataset& ds, Action action, const ModelConfig& mc, const TrainConfig& tc,
                  const EpochCallback& on_epoch) {
  ModelConfig cfg = mc;
  cfg.no_field = cfg.no_field || tc.no_field;
  const auto data = triplet_examples(ds, action, cfg);
  return train_examples(data, action, cfg, tc, on_epoch);
}

// -- checkpoints ------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'E', 'A', 'F', 'M'};

json model_header(const Model& m) {
  const ModelConfig& c = m.cfg;
  return {{"action", to_string(m.action)},
          {"robot_hidden", c.robot_hidden},
          {"point_hidden", c.point_hidden},
          {"scene_hidden", c.scene_hidden},
          {"feature", c.feature},
          {"pred_hidden", c.pred_hidden},
          {"scene_input", c.scene_input == SceneInput::Field ? "field" : "field+offset"},
          {"field_scale", c.field_scale},
          {"k_significant", c.k_significant},
          {"include_target_points", c.include_target_points},
          {"no_field", c.no_field},
          {"num_params", m.params.size()}};
}

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T take(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw CorruptData("checkpoint: truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

void put_array(std::string& out, const std::vector<double>& v) {
  put(out, static_cast<std::uint64_t>(v.size()));
  out.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
}

std::vector<double> take_array(const std::string& in, std::size_t& pos) {
  const auto n = take<std::uint64_t>(in, pos);
  if (n > (in.size() - pos) / sizeof(double)) throw CorruptData("checkpoint: truncated array");
  std::vector<double> v(n);
  std::memcpy(v.data(), in.data() + pos, n * sizeof(double));
  pos += n * sizeof(double);
  return v;
}

}  // namespace

std::string encode_checkpoint(const Model& m, const AdamState& opt) {
  std::string out(kMagic, 4);
  put(out, kCheckpointVersion);
  const std::string header = model_header(m).dump();
  put(out, static_cast<std::uint32_t>(header.size()));
  out += header;
  put_array(out, m.params);
  put(out, opt.t);
  put_array(out, opt.m);
  put_array(out, opt.v);
  return out;
}

void decode_checkpoint(const std::string& in, Model& m, AdamState& opt) {
  if (in.size() < 5 || std::memcmp(in.data(), kMagic, 4) != 0) throw CorruptData("checkpoint: bad magic");
  std::size_t pos = 4;
  const auto version = take<std::uint8_t>(in, pos);
  if (version != kCheckpointVersion)
    throw VersionMismatch("checkpoint version " + std::to_string(version) + ", expected " +
                          std::to_string(kCheckpointVersion));
  const auto hlen = take<std::uint32_t>(in, pos);
  if (hlen > in.size() - pos) throw CorruptData("checkpoint: truncated header");
  try {
    const json h = json::parse(in.substr(pos, hlen));
    pos += hlen;
    m = Model{};
    m.action = parse_action(h.at("action").get<std::string>());
    ModelConfig& c = m.cfg;
    c.robot_hidden = h.at("robot_hidden").get<std::size_t>();
    c.point_hidden = h.at("point_hidden").get<std::size_t>();
    c.scene_hidden = h.at("scene_hidden").get<std::size_t>();
    c.feature = h.at("feature").get<std::size_t>();
    c.pred_hidden = h.at("pred_hidden").get<std::size_t>();
    const std::string si = h.at("scene_input").get<std::string>();
    if (si != "field" && si != "field+offset") throw CorruptData("checkpoint: unknown scene_input");
    c.scene_input = si == "field" ? SceneInput::Field : SceneInput::FieldOffset;
    c.field_scale = h.at("field_scale").get<double>();
    c.k_significant = h.at("k_significant").get<std::size_t>();
    c.include_target_points = h.at("include_target_points").get<bool>();
    c.no_field = h.at("no_field").get<bool>();
  } catch (const json::exception& e) {
    throw CorruptData(std::string("checkpoint header: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw CorruptData(std::string("checkpoint header: ") + e.what());
  }
  m.params = take_array(in, pos);
  try {
    m.layout();
  } catch (const ShapeMismatch& e) {
    throw CorruptData(std::string("checkpoint: ") + e.what());
  }
  opt.t = take<std::uint64_t>(in, pos);
  opt.m = take_array(in, pos);
  opt.v = take_array(in, pos);
  if (!opt.m.empty() && (opt.m.size() != m.params.size() || opt.v.size() != m.params.size()))
    throw CorruptData("checkpoint: optimizer state size");
  if (pos != in.size()) throw CorruptData("checkpoint: trailing bytes");
  for (double v : m.params)
    if (!std::isfinite(v)) throw CorruptData("checkpoint: non-finite parameter");
}

void save_checkpoint(const std::string& path, const Model& m, const AdamState& opt) {
  write_file(path, encode_checkpoint(m, opt));
}

Model load_checkpoint(const std::string& path, AdamState* opt) {
  Model m;
  AdamState st;
  decode_checkpoint(read_file(path), m, st);
  if (opt) *opt = std::move(st);
  return m;
}

void save_loss_curve_csv(const std::string& path, const std::vector<LossParts>& curve) {
  std::string out = "epoch,total,affordance,contrastive\n";
  char buf[128];
  for (std::size_t e = 0; e < curve.size(); ++e) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", e, curve[e].total, curve[e].affordance,
                  curve[e].contrastive);
    out += buf;
  }
  write_file(path, out);
}

}  // namespace envaff
