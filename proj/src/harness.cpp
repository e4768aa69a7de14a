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

#include "envaff/harness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "envaff/error.hpp"
#include "envaff/scene_io.hpp"

namespace envaff {

namespace {

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw LengthMismatch(std::string(what) + ": " + std::to_string(a) + " scores vs " + std::to_string(b) + " labels");
}

void check_labels(std::span<const int> labels) {
  for (int l : labels)
    if (l != 0 && l != 1) throw InvalidArgument("labels must be 0 or 1");
}

}  // namespace

Confusion confusion(std::span<const double> preds, std::span<const int> labels, double tau) {
  check_lengths(preds.size(), labels.size(), "confusion");
  check_labels(labels);
  Confusion c;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool p = preds[i] >= tau;
    if (p && labels[i]) ++c.tp;
    else if (p) ++c.fp;
    else if (labels[i]) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double f_score(std::span<const double> preds, std::span<const int> labels, double tau) {
  const Confusion c = confusion(preds, labels, tau);
  const double p = c.tp + c.fp ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
  const double r = c.tp + c.fn ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

std::optional<double> average_precision(std::span<const double> scores, std::span<const int> labels) {
  check_lengths(scores.size(), labels.size(), "average_precision");
  check_labels(labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (!labels[order[r]]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(r + 1);
  }
  if (hits == 0) return std::nullopt;
  return sum / static_cast<double>(hits);
}

SmaResult sample_manipulation_accuracy(const Scorer& scorer, std::span<const SceneRef> scenes, Action action,
                                       const ProposalPolicy& policy, const OracleConfig& cfg) {
  if (!(policy.tau > 0.0 && policy.tau < 1.0)) throw InvalidArgument("ProposalPolicy: tau must lie in (0, 1)");
  if (policy.max_proposals < 1) throw InvalidArgument("ProposalPolicy: max_proposals must be >= 1");
  SmaResult res;
  for (const SceneRef& ref : scenes) {
    const auto targets = ref.cloud->target_indices();
    if (targets.empty()) throw EmptyScene("scene " + std::to_string(ref.scene->id) + " has no target points");
    const auto scores = scorer(*ref.scene, *ref.cloud, targets);
    check_lengths(scores.size(), targets.size(), "scorer");
    std::vector<std::size_t> cand;
    for (std::size_t i = 0; i < targets.size(); ++i)
      if (scores[i] >= policy.tau) cand.push_back(targets[i]);
    if (cand.empty()) {
      const auto best = std::max_element(scores.begin(), scores.end()) - scores.begin();
      cand.push_back(targets[static_cast<std::size_t>(best)]);
    }
    Rng rng(derive_seed(policy.seed, {0x5a4, static_cast<std::uint64_t>(ref.scene->id)}));
    const std::size_t take = std::min(cand.size(), static_cast<std::size_t>(policy.max_proposals));
    for (std::size_t j = 0; j < take; ++j) {
      std::swap(cand[j], cand[j + rng.index(cand.size() - j)]);
      res.successes += static_cast<std::size_t>(evaluate(*ref.scene, *ref.cloud, cand[j], action, cfg).label);
      ++res.proposals;
    }
  }
  if (res.proposals == 0) throw EmptyScene("no proposals: empty scene set");
  res.sma = static_cast<double>(res.successes) / static_cast<double>(res.proposals);
  return res;
}

double random_proposal_rate(std::span<const SceneRef> scenes, Action action, const OracleConfig& cfg) {
  if (scenes.empty()) throw EmptyScene("random_proposal_rate: empty scene set");
  double sum = 0.0;
  for (const SceneRef& ref : scenes) {
    const auto targets = ref.cloud->target_indices();
    if (targets.empty()) throw EmptyScene("scene " + std::to_string(ref.scene->id) + " has no target points");
    const auto v = census(*ref.scene, *ref.cloud, targets, action, cfg);
    const auto ok = std::count_if(v.begin(), v.end(), [](const Verdict& x) { return x.label == 1; });
    sum += static_cast<double>(ok) / static_cast<double>(targets.size());
  }
  return sum / static_cast<double>(scenes.size());
}

Scorer model_scorer(const Model& m) {
  return [&m](const Scene& s, const LabeledCloud& c, std::span<const std::size_t> idx) {
    return predict_points(m, c, s.robot, idx, kernels::Exec::Parallel);
  };
}

Scorer oracle_scorer(Action action, const OracleConfig& cfg) {
  return [action, cfg](const Scene& s, const LabeledCloud& c, std::span<const std::size_t> idx) {
    const auto v = census(s, c, idx, action, cfg);
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].label;
    return out;
  };
}

nlohmann::json report_to_json(const MetricsReport& r) {
  nlohmann::json j;
  j["split"] = r.split;
  j["action"] = to_string(r.action);
  j["seed"] = r.seed;
  j["f_score"] = r.f_score;
  j["average_precision"] = r.average_precision ? nlohmann::json(*r.average_precision) : nlohmann::json(nullptr);
  j["sma"] = r.sma ? nlohmann::json(*r.sma) : nlohmann::json(nullptr);
  j["counts"] = {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"fn", r.counts.fn}, {"tn", r.counts.tn}};
  j["records"] = r.records;
  j["positives"] = r.positives;
  j["proposals"] = r.proposals;
  j["successes"] = r.successes;
  return j;
}

std::vector<double> score_records(const Model& model, const Dataset& ds, Action action) {
  std::map<std::int64_t, std::vector<std::size_t>> by_cloud;
  for (std::size_t i = 0; i < ds.records.size(); ++i)
    if (ds.records[i].action == action) by_cloud[ds.records[i].cloud_ref].push_back(i);
  std::vector<double> scores(ds.records.size(), 0.0);
  for (const auto& [cloud_id, recs] : by_cloud) {
    // Records on one cloud may still differ in robot position.
    std::map<std::array<double, 3>, std::vector<std::size_t>> by_robot;
    for (std::size_t i : recs) {
      const Vec3& r = ds.records[i].robot;
      by_robot[{r.x, r.y, r.z}].push_back(i);
    }
    for (const auto& [robot, group] : by_robot) {
      std::vector<std::size_t> pts;
      for (std::size_t i : group) pts.push_back(ds.records[i].point_index);
      const auto s = predict_points(model, ds.cloud(cloud_id), {robot[0], robot[1], robot[2]}, pts,
                                    kernels::Exec::Parallel);
      for (std::size_t j = 0; j < group.size(); ++j) scores[group[j]] = s[j];
    }
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < ds.records.size(); ++i)
    if (ds.records[i].action == action) out.push_back(scores[i]);
  return out;
}

MetricsReport evaluate_split(const Model& model, const Dataset& test, const EvalOptions& opt, const OracleConfig& cfg) {
  MetricsReport r;
  r.split = to_string(test.manifest.split);
  r.action = model.action;
  r.seed = test.manifest.seed;
  const auto scores = score_records(model, test, model.action);
  std::vector<int> labels;
  for (const auto& rec : test.records)
    if (rec.action == model.action) labels.push_back(rec.label);
  r.records = labels.size();
  r.positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  r.counts = confusion(scores, labels, opt.tau);
  r.f_score = f_score(scores, labels, opt.tau);
  r.average_precision = average_precision(scores, labels);
  if (opt.with_sma) {
    std::vector<SceneRef> refs;
    for (const auto& [id, s] : test.scenes) refs.push_back({&s, &test.cloud(id)});
    const SmaResult sma = sample_manipulation_accuracy(model_scorer(model), refs, model.action, opt.policy, cfg);
    r.sma = sma.sma;
    r.proposals = sma.proposals;
    r.successes = sma.successes;
  }
  return r;
}

double triplet_ordering(const Model& model, std::span<const TripletExample> triplets) {
  if (triplets.empty()) throw InvalidArgument("triplet_ordering: no triplets");
  std::size_t good = 0;
  for (const auto& t : triplets) {
    auto embed = [&](const Example& e) {
      if (model.cfg.no_field) return std::vector<double>(model.cfg.feature, 0.0);
      SceneCache c;
      scene_forward(model, e.scene_in, c);
      return c.out;
    };
    const auto a = embed(t.anchor), p = embed(t.positive), n = embed(t.negative);
    double dp = 0.0, dn = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      dp += (a[i] - p[i]) * (a[i] - p[i]);
      dn += (a[i] - n[i]) * (a[i] - n[i]);
    }
    if (dp < dn) ++good;
  }
  return static_cast<double>(good) / static_cast<double>(triplets.size());
}

namespace {

std::array<std::uint8_t, 3> colormap(double s) {
  // Blue -> cyan -> yellow -> red.
  s = std::clamp(s, 0.0, 1.0);
  auto u8 = [](double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); };
  if (s < 1.0 / 3) return {0, u8(3 * s), 255};
  if (s < 2.0 / 3) return {u8(3 * s - 1), 255, u8(2 - 3 * s)};
  return {255, u8(3 - 3 * s), 0};
}

}  // namespace

void export_heatmap(const Model& model, const LabeledCloud& cloud, const Vec3& robot, const std::string& ply_path,
                    const std::string& csv_path) {
  const auto targets = cloud.target_indices();
  const auto scores = predict_points(model, cloud, robot, targets, kernels::Exec::Parallel);
  std::vector<std::array<std::uint8_t, 3>> colors(cloud.size(), {128, 128, 128});
  for (std::size_t j = 0; j < targets.size(); ++j) colors[targets[j]] = colormap(scores[j]);
  save_colored_ply(ply_path, cloud.points, colors);
  std::string csv = "index,score\n";
  char buf[64];
  for (std::size_t j = 0; j < targets.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", targets[j], scores[j]);
    csv += buf;
  }
  write_file(csv_path, csv);
}

const char* to_string(Variant v) {
  switch (v) {
    case Variant::Full: return "full";
    case Variant::NoField: return "no-of";
    case Variant::NoCl: return "no-cl";
  }
  return "unknown";
}

ProtocolResult run_protocol(const ProtocolSpec& spec, const ProgressFn& progress) {
  auto say = [&progress](const std::string& s) {
    if (progress) progress(s);
  };
  ProtocolResult res;
  for (std::uint64_t seed : spec.seeds) {
    CollectSpec cs = spec.collect;
    cs.seed = seed;
    cs.oracle = spec.oracle;
    say("seed " + std::to_string(seed) + ": collecting training triplets");
    const Dataset train_ds = collect(cs);

    TestSpec ts = spec.test;
    ts.seed = seed;
    ts.oracle = spec.oracle;
    say("seed " + std::to_string(seed) + ": building test splits");
    const Dataset tests[2] = {build_test_set(ts, Split::TestSeen), build_test_set(ts, Split::TestNovel)};

    CollectSpec hs = cs;
    hs.seed = derive_seed(seed, {0x4e1d});
    hs.id_base = IdRange::kHeldOut;
    hs.positive_id_base = IdRange::kHeldOutPositive;
    hs.num_scenes = std::max(10, spec.heldout_triplets);
    hs.push = {spec.heldout_triplets / 2, spec.heldout_triplets - spec.heldout_triplets / 2};
    hs.pull = {spec.heldout_triplets / 4, spec.heldout_triplets - spec.heldout_triplets / 4};
    const Dataset heldout = collect(hs);

    for (const Dataset& t : tests) {
      std::vector<SceneRef> refs;
      for (const auto& [id, s] : t.scenes) refs.push_back({&s, &t.cloud(id)});
      for (Action a : {Action::Push, Action::Pull})
        res.baselines.push_back({seed, a, to_string(t.manifest.split), random_proposal_rate(refs, a, spec.oracle)});
    }

    for (Variant v : spec.variants) {
      for (Action a : {Action::Push, Action::Pull}) {
        TrainConfig tc = spec.train;
        tc.seed = seed;
        tc.no_field = v == Variant::NoField;
        tc.no_cl = v == Variant::NoCl;
        say("seed " + std::to_string(seed) + ": training " + to_string(v) + " " + to_string(a));
        const TrainResult tr = train(train_ds, a, spec.model, tc);
        for (const Dataset& t : tests) {
          EvalOptions eo;
          eo.with_sma = spec.with_sma && v == Variant::Full;
          eo.policy = spec.policy;
          eo.policy.seed = derive_seed(seed, {0x9e0});
          res.cells.push_back({seed, v, evaluate_split(tr.model, t, eo, spec.oracle)});
        }
        if (v == Variant::Full)
          res.ordering.push_back({seed, a, triplet_ordering(tr.model, triplet_examples(heldout, a, tr.model.cfg))});
      }
    }
  }
  return res;
}

}  // namespace envaff
