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

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "envaff/error.hpp"
#include "envaff/harness.hpp"
#include "envaff/scene_io.hpp"
#include "support.hpp"

using namespace envaff;
using namespace envaff::testing;

namespace {

// Reference F-score straight from the definition.
double brute_f(const std::vector<double>& s, const std::vector<int>& l, double tau) {
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    tp += s[i] >= tau && l[i];
    fp += s[i] >= tau && !l[i];
    fn += s[i] < tau && l[i];
  }
  const double p = tp + fp > 0 ? tp / (tp + fp) : 0, r = tp + fn > 0 ? tp / (tp + fn) : 0;
  return p + r > 0 ? 2 * p * r / (p + r) : 0;
}

// Reference AP: rank of each item by pairwise comparison, no sorting.
std::optional<double> brute_ap(const std::vector<double>& s, const std::vector<int>& l) {
  auto before = [&](std::size_t j, std::size_t i) { return s[j] > s[i] || (s[j] == s[i] && j < i); };
  double sum = 0;
  int pos = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!l[i]) continue;
    ++pos;
    double rank = 1, hits = 1;
    for (std::size_t j = 0; j < s.size(); ++j)
      if (j != i && before(j, i)) {
        ++rank;
        hits += l[j];
      }
    sum += hits / rank;
  }
  if (pos == 0) return std::nullopt;
  return sum / pos;
}

struct SceneSet {
  std::vector<std::pair<Scene, LabeledCloud>> owned;
  std::vector<SceneRef> refs;
};

SceneSet scene_set(int n, std::uint64_t base) {
  SceneSet s;
  s.owned.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) s.owned.push_back(small_scene(base + static_cast<std::uint64_t>(i), 2, 256));
  for (auto& [sc, c] : s.owned) s.refs.push_back({&sc, &c});
  return s;
}

}  // namespace

TEST_CASE("f-score examples") {
  const std::vector<double> p{1, 1, 0, 0};
  const std::vector<int> l{1, 0, 1, 0};
  CHECK(f_score(p, l) == doctest::Approx(0.5));
  CHECK(f_score(std::vector<double>{1, 0, 1, 0}, l) == 1.0);
  CHECK(f_score(std::vector<double>{0, 0, 0, 0}, l) == 0.0);
  const Confusion c = confusion(p, l);
  CHECK(c.tp == 1);
  CHECK(c.fp == 1);
  CHECK(c.fn == 1);
  CHECK(c.tn == 1);
  CHECK_THROWS_AS(f_score(std::vector<double>{1}, l), LengthMismatch);
  CHECK_THROWS_AS(f_score(p, std::vector<int>{1, 2, 0, 0}), InvalidArgument);
}

TEST_CASE("average precision examples") {
  CHECK(average_precision(std::vector<double>{0.9, 0.1}, std::vector<int>{1, 0}) == 1.0);
  CHECK(average_precision(std::vector<double>{0.1, 0.9}, std::vector<int>{1, 0}) == 0.5);
  CHECK_FALSE(average_precision(std::vector<double>{0.1, 0.9}, std::vector<int>{0, 0}).has_value());
  CHECK_THROWS_AS(average_precision(std::vector<double>{0.1}, std::vector<int>{0, 1}), LengthMismatch);
  // Ties keep index order: the positive at index 0 ranks first.
  CHECK(average_precision(std::vector<double>{0.5, 0.5}, std::vector<int>{1, 0}) == 1.0);
  CHECK(average_precision(std::vector<double>{0.5, 0.5}, std::vector<int>{0, 1}) == 0.5);
}

TEST_CASE("metrics agree with brute-force references") {
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng.index(60);
    std::vector<double> s(n);
    std::vector<int> l(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse scores so ties occur.
      s[i] = t % 2 ? std::round(rng.uniform() * 8) / 8 : rng.uniform();
      l[i] = rng.bernoulli(0.4);
    }
    CHECK(std::abs(f_score(s, l) - brute_f(s, l, 0.5)) <= 1e-12);
    const auto ap = average_precision(s, l), ref = brute_ap(s, l);
    REQUIRE(ap.has_value() == ref.has_value());
    if (ap) CHECK(std::abs(*ap - *ref) <= 1e-12);
  }
}

TEST_CASE("oracle scorer achieves perfect sample accuracy") {
  SceneSet set = scene_set(12, 40);
  std::vector<SceneRef> usable;
  for (const auto& r : set.refs) {
    const auto v = census(*r.scene, *r.cloud, r.cloud->target_indices(), Action::Push, OracleConfig{});
    if (std::any_of(v.begin(), v.end(), [](const Verdict& x) { return x.label == 1; })) usable.push_back(r);
  }
  REQUIRE(usable.size() >= 3);
  ProposalPolicy pol;
  pol.max_proposals = 5;
  const SmaResult r = sample_manipulation_accuracy(oracle_scorer(Action::Push, {}), usable, Action::Push, pol, {});
  CHECK(r.sma == 1.0);
  CHECK(r.successes == r.proposals);
  CHECK(r.proposals > usable.size());
}

TEST_CASE("random scorer matches the census success rate") {
  SceneSet set = scene_set(30, 60);
  ProposalPolicy pol;
  pol.max_proposals = 8;
  pol.seed = 5;
  Scorer random = [](const Scene& s, const LabeledCloud&, std::span<const std::size_t> idx) {
    Rng rng(static_cast<std::uint64_t>(s.id) * 7 + 1);
    std::vector<double> out(idx.size());
    for (auto& v : out) v = rng.uniform();
    return out;
  };
  const SmaResult r = sample_manipulation_accuracy(random, set.refs, Action::Push, pol, {});
  const double base = random_proposal_rate(set.refs, Action::Push, {});
  const double sd = std::sqrt(base * (1 - base) / static_cast<double>(r.proposals));
  CHECK(std::abs(r.sma - base) <= 4 * sd + 1e-9);
  CHECK(r.sma == static_cast<double>(r.successes) / static_cast<double>(r.proposals));

  // Deterministic per seed.
  CHECK(sample_manipulation_accuracy(random, set.refs, Action::Push, pol, {}).successes == r.successes);
}

TEST_CASE("proposal policy and empty scenes") {
  SceneSet set = scene_set(1, 80);
  ProposalPolicy pol;
  pol.tau = 1.0;
  CHECK_THROWS_AS(sample_manipulation_accuracy(oracle_scorer(Action::Push, {}), set.refs, Action::Push, pol, {}),
                  InvalidArgument);
  pol.tau = 0.5;
  LabeledCloud empty = set.owned[0].second;
  for (auto& s : empty.seg) s = {SegLabel::Kind::Body, 0};
  const std::vector<SceneRef> bad{{set.refs[0].scene, &empty}};
  CHECK_THROWS_AS(sample_manipulation_accuracy(oracle_scorer(Action::Push, {}), bad, Action::Push, pol, {}),
                  EmptyScene);
  CHECK_THROWS_AS(random_proposal_rate({}, Action::Push, {}), EmptyScene);
}

TEST_CASE("heatmap export") {
  const auto [scene, cloud] = small_scene(3, 2, 256);
  const Model m = Model::init(ModelConfig{}, Action::Push, 2);
  TempDir dir("heatmap");
  export_heatmap(m, cloud, scene.robot, dir / "h.ply", dir / "h.csv");
  const std::string ply = read_file(dir / "h.ply");
  CHECK(ply.find("element vertex 256\n") != std::string::npos);
  const std::size_t body = ply.find("end_header\n") + 11;
  REQUIRE(ply.size() - body == 256 * 15);
  std::size_t gray = 0;
  for (std::size_t i = 0; i < 256; ++i) {
    const auto* c = reinterpret_cast<const unsigned char*>(ply.data() + body + i * 15 + 12);
    gray += c[0] == 128 && c[1] == 128 && c[2] == 128;
  }
  const std::size_t targets = cloud.target_indices().size();
  CHECK(gray == 256 - targets);

  std::istringstream csv(read_file(dir / "h.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "index,score");
  std::size_t rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == targets);

  export_heatmap(m, cloud, scene.robot, dir / "g.ply", dir / "g.csv");
  CHECK(read_file(dir / "g.ply") == ply);
  CHECK_THROWS_AS(export_heatmap(m, cloud, scene.robot, dir / "no/such/dir.ply", dir / "x.csv"), IoFailure);
}

TEST_CASE("a tiny protocol run reports every cell") {
  ProtocolSpec ps;
  ps.seeds = {0};
  ps.collect.num_scenes = 16;
  ps.collect.push = {3, 3};
  ps.collect.pull = {2, 2};
  ps.collect.cloud = {1024, 256};
  ps.test.num_scenes = 3;
  ps.test.points_per_action = 6;
  ps.test.cloud = {1024, 256};
  ps.model.feature = 8;
  ps.model.pred_hidden = 8;
  ps.model.robot_hidden = ps.model.point_hidden = ps.model.scene_hidden = 8;
  ps.train.epochs = 1;
  ps.heldout_triplets = 3;
  const ProtocolResult r = run_protocol(ps);
  CHECK(r.cells.size() == 12);
  CHECK(r.baselines.size() == 4);
  CHECK(r.ordering.size() == 2);
  for (const auto& c : r.cells) {
    CHECK(c.report.records == 18);
    CHECK(c.report.f_score >= 0.0);
    CHECK(c.report.f_score <= 1.0);
    const auto j = report_to_json(c.report);
    CHECK(j.at("records") == 18);
    CHECK(j.at("counts").at("tp").get<std::size_t>() + j.at("counts").at("fn").get<std::size_t>() ==
          c.report.positives);
  }
}
