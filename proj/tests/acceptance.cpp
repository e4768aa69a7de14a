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

// Acceptance runner: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>
#include <string>

#include "envaff/dataset.hpp"
#include "envaff/field.hpp"
#include "envaff/harness.hpp"
#include "envaff/scene_io.hpp"
#include "support.hpp"

using namespace envaff;
using namespace envaff::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// Twice the triangle area via Kahan's stable Heron formula in extended precision.
long double twice_area(const Vec3& p, const Vec3& r, const Vec3& t) {
  auto len = [](const Vec3& a, const Vec3& b) {
    const long double x = (long double)a.x - b.x, y = (long double)a.y - b.y, z = (long double)a.z - b.z;
    return std::sqrt(x * x + y * y + z * z);
  };
  long double s[3] = {len(p, r), len(p, t), len(r, t)};
  std::sort(s, s + 3);
  const long double c = s[0], b = s[1], a = s[2];
  const long double q = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
  return q > 0 ? std::sqrt(q) / 2 : 0.0L;
}

Outcome field_suite() {
  const auto t0 = Clock::now();
  Rng rng(101);
  double worst_eq = 0, worst_zero = 0, worst_area = 0;
  for (int i = 0; i < 10000; ++i) {
    const Vec3 p = random_vec(rng), r = random_vec(rng), t = random_vec(rng), shift = random_vec(rng, 5);
    const Mat3 q = random_rotation(rng);
    const double scale = distance(p, r) * distance(p, t) + 1e-300;
    const Vec3 f = field_value(p, r, t);
    const Vec3 g = field_value(q * p + shift, q * r + shift, q * t + shift);
    worst_eq = std::max(worst_eq, norm(g - q * f) / scale);
    worst_eq = std::max(worst_eq, std::abs(norm(g) - norm(f)) / scale);

    const double line_scale = distance(r, t) * distance(r, t) + 1e-300;
    const double u = rng.uniform(-2, 3);
    worst_zero = std::max({worst_zero, norm(field_value(r, r, t)), norm(field_value(t, r, t)),
                           norm(field_value(r + (t - r) * u, r, t)) / (line_scale * (std::abs(u) + 1))});

    const long double ref = twice_area(p, r, t);
    worst_area = std::max(worst_area, static_cast<double>(std::abs(norm(f) - ref) / std::max(ref, 1e-300L)));
  }
  const double secs = seconds_since(t0);
  const bool pass = worst_eq <= 1e-9 && worst_zero <= 1e-9 && worst_area <= 1e-9 && secs < 5.0;
  return {pass, fmt("equivariance %.1e, zero set %.1e, area %.1e, %.2fs", worst_eq, worst_zero, worst_area, secs)};
}

Outcome gradient_checks() {
  const auto t0 = Clock::now();
  std::vector<std::pair<Scene, LabeledCloud>> scenes;
  for (std::uint64_t s = 0; s < 10; ++s) scenes.push_back(small_scene(200 + s, 1 + static_cast<int>(s % 3), 160));
  std::string detail;
  bool pass = true;
  for (GradModule mod :
       {GradModule::Robot, GradModule::Target, GradModule::Scene, GradModule::Predictor, GradModule::Loss}) {
    double worst = 0;
    std::size_t checked = 0, kinks = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto& [scene, cloud] = scenes[seed % scenes.size()];
      const GradCheck g = gradient_case(mod, 1000 + seed, scene, cloud);
      worst = std::max(worst, g.max_rel_error);
      checked += g.checked;
      kinks += g.kinks;
    }
    pass = pass && worst < 1e-4;
    detail += std::string(to_string(mod)) + fmt(" %.1e", worst) + fmt(" (%.0f coords", double(checked)) +
              fmt(", %.0f at kinks), ", double(kinks));
  }
  const double secs = seconds_since(t0);
  pass = pass && secs < 120;
  return {pass, detail + fmt("%.1fs", secs)};
}

Outcome monotonicity() {
  const auto t0 = Clock::now();
  const OracleConfig cfg;
  std::size_t flips = 0, checks = 0, drops = 0;
  for (std::uint64_t pair = 0; pair < 1000; ++pair) {
    SceneSpec ss;
    ss.id = static_cast<std::int64_t>(pair);
    ss.seed = derive_seed(77, {pair});
    ss.num_occluders = 1 + static_cast<int>(pair % 3);
    const Scene s = generate_scene(ss);
    ss.seed = derive_seed(78, {pair});
    ss.num_occluders = 1;
    const Scene extra = generate_scene(ss);
    Scene plus = s;
    plus.occluders.push_back(extra.occluders.back());
    const LabeledCloud c = sample_cloud(s, 256, 64, derive_seed(79, {pair}));
    const auto idx = c.target_indices();
    for (Action a : {Action::Push, Action::Pull}) {
      const auto before = census(s, c, idx, a, cfg), after = census(plus, c, idx, a, cfg);
      for (std::size_t i = 0; i < idx.size(); ++i) {
        flips += before[i].label == 0 && after[i].label == 1;
        drops += before[i].label == 1 && after[i].label == 0;
        ++checks;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {flips == 0 && secs < 120,
          fmt("%.0f label checks over 1000 pairs, %.0f flips 0->1, %.0f flips 1->0, %.1fs", double(checks),
              double(flips), double(drops), secs)};
}

Outcome triplet_validity() {
  const auto t0 = Clock::now();
  const Dataset ds = collect(CollectSpec{});
  const auto problems = check_triplets(ds, OracleConfig{});
  std::string detail = fmt("%.0f triplets, %.0f violations, %.1fs", double(ds.triplets.size()),
                           double(problems.size()), seconds_since(t0));
  if (!problems.empty()) detail += "; first: " + problems.front();
  return {problems.empty() && !ds.triplets.empty(), detail};
}

double brute_f(const std::vector<double>& s, const std::vector<int>& l) {
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    tp += s[i] >= 0.5 && l[i];
    fp += s[i] >= 0.5 && !l[i];
    fn += s[i] < 0.5 && l[i];
  }
  const double p = tp + fp > 0 ? tp / (tp + fp) : 0, r = tp + fn > 0 ? tp / (tp + fn) : 0;
  return p + r > 0 ? 2 * p * r / (p + r) : 0;
}

std::optional<double> brute_ap(const std::vector<double>& s, const std::vector<int>& l) {
  double sum = 0;
  int pos = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!l[i]) continue;
    ++pos;
    double rank = 1, hits = 1;
    for (std::size_t j = 0; j < s.size(); ++j)
      if (j != i && (s[j] > s[i] || (s[j] == s[i] && j < i))) {
        ++rank;
        hits += l[j];
      }
    sum += hits / rank;
  }
  if (pos == 0) return std::nullopt;
  return sum / pos;
}

Outcome metric_equivalence() {
  Rng rng(55);
  double worst = 0;
  int mismatched_undefined = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng.index(200);
    std::vector<double> s(n);
    std::vector<int> l(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = t % 3 == 0 ? std::round(rng.uniform() * 10) / 10 : rng.uniform();
      l[i] = rng.bernoulli(t % 5 == 0 ? 0.05 : 0.4);
    }
    worst = std::max(worst, std::abs(f_score(s, l) - brute_f(s, l)));
    const auto ap = average_precision(s, l), ref = brute_ap(s, l);
    if (ap.has_value() != ref.has_value()) ++mismatched_undefined;
    else if (ap) worst = std::max(worst, std::abs(*ap - *ref));
  }
  return {worst <= 1e-12 && mismatched_undefined == 0, fmt("max |diff| %.1e over 100 vectors", worst)};
}

struct ProtocolOutcomes {
  Outcome ordering_table, sma, heldout;
};

ProtocolOutcomes protocol() {
  const auto t0 = Clock::now();
  ProtocolSpec ps;
  const ProtocolResult r = run_protocol(ps, [&](const std::string& s) {
    std::printf("  [%5.0fs] %s\n", seconds_since(t0), s.c_str());
    std::fflush(stdout);
  });
  const double secs = seconds_since(t0);
  const double n_seeds = static_cast<double>(ps.seeds.size());

  // Mean AP per (variant, action, split).
  std::map<std::tuple<Variant, Action, std::string>, double> ap;
  std::map<std::pair<Action, std::string>, double> sma, base;
  for (const auto& c : r.cells) {
    ap[{c.variant, c.report.action, c.report.split}] += c.report.average_precision.value_or(0.0) / n_seeds;
    if (c.report.sma) sma[{c.report.action, c.report.split}] += *c.report.sma / n_seeds;
  }
  for (const auto& b : r.baselines) base[{b.action, b.split}] += b.rate / n_seeds;

  ProtocolOutcomes out;
  bool order_ok = true;
  std::string order_detail;
  for (Action a : {Action::Push, Action::Pull})
    for (const char* split : {"test-seen", "test-novel"}) {
      const double full = ap[{Variant::Full, a, split}], nof = ap[{Variant::NoField, a, split}],
                   ncl = ap[{Variant::NoCl, a, split}];
      std::printf("  AP %s %-10s full %.4f  no-of %.4f  no-cl %.4f\n", to_string(a), split, full, nof, ncl);
      const bool ok = full >= nof && full >= ncl;
      order_ok = order_ok && ok;
      order_detail += std::string(to_string(a)) + "/" + split + (ok ? " ok" : " reversed") +
                      fmt(" (%+.3f, %+.3f); ", full - nof, full - ncl);
    }
  out.ordering_table = {order_ok && secs < 1800, order_detail + fmt("%.0fs for 3 seeds", secs)};

  bool sma_ok = true;
  std::string sma_detail;
  for (Action a : {Action::Push, Action::Pull}) {
    double s = 0, b = 0;
    for (const char* split : {"test-seen", "test-novel"}) {
      std::printf("  sma %s %-10s %.4f  random %.4f\n", to_string(a), split, sma[{a, split}], base[{a, split}]);
      s += sma[{a, split}] / 2;
      b += base[{a, split}] / 2;
    }
    sma_ok = sma_ok && s > b;
    sma_detail += std::string(to_string(a)) + fmt(" %.3f vs random %.3f (x%.2f); ", s, b, b > 0 ? s / b : 0.0);
  }
  out.sma = {sma_ok, sma_detail};

  bool held_ok = true;
  std::string held_detail;
  for (Action a : {Action::Push, Action::Pull}) {
    double f = 0;
    for (const auto& o : r.ordering)
      if (o.action == a) f += o.fraction / n_seeds;
    held_ok = held_ok && f >= 0.7;
    held_detail += std::string(to_string(a)) + fmt(" %.3f; ", f);
  }
  out.heldout = {held_ok, held_detail + "threshold 0.700"};
  return out;
}

int run(const std::string& cmd) {
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

// File contents keyed by relative path, with the run's own directory masked
// wherever a tool echoes it.
std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  const std::string self = root.string();
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::string bytes = read_file(e.path().string());
    for (std::size_t at = bytes.find(self); at != std::string::npos; at = bytes.find(self, at + 5))
      bytes.replace(at, self.size(), "<run>");
    files[fs::relative(e.path(), root).string()] = std::move(bytes);
  }
  return files;
}

Outcome cli_determinism() {
  const fs::path base = fs::temp_directory_path() / "envaff_acceptance_cli";
  fs::remove_all(base);
  fs::create_directories(base);
  write_file((base / "config.json").string(), R"({
  "seed": 11,
  "cloud": {"n_raw": 2048, "n_out": 512},
  "gen": {"num_scenes": 3, "min_occluders": 1, "max_occluders": 3},
  "collect": {"num_scenes": 30, "push": {"success": 6, "failure": 6}, "pull": {"success": 3, "failure": 6}},
  "test": {"num_scenes": 4, "points_per_action": 8},
  "train": {"epochs": 2},
  "eval": {"with_sma": true}
})");
  const std::string cli = std::string(ENVAFF_CLI_PATH) + " ";
  const std::string cfg = " --config " + (base / "config.json").string();
  std::map<std::string, std::string> runs[2];
  std::string failed;
  for (int k = 0; k < 2; ++k) {
    const fs::path d = base / ("run" + std::to_string(k));
    const std::string log = " >>" + (d / "stdout.log").string() + " 2>>" + (d / "stderr.log").string();
    fs::create_directories(d);
    const std::string stages[] = {
        "gen-scenes" + cfg + " --out " + (d / "scenes").string(),
        "build-dataset" + cfg + " --out " + (d / "train").string(),
        "build-dataset" + cfg + " --split test-seen --out " + (d / "test").string(),
        "train" + cfg + " --action push --data " + (d / "train").string() + " --out " + (d / "model").string(),
        "eval" + cfg + " --model " + (d / "model/model.ckpt").string() + " --data " + (d / "test").string() +
            " --out " + (d / "eval").string(),
    };
    for (const auto& s : stages)
      if (run(cli + s + log) != 0 && failed.empty()) failed = s.substr(0, s.find(' '));
    runs[k] = snapshot(d);
  }
  if (!failed.empty()) return {false, "stage " + failed + " exited non-zero"};
  std::size_t differing = 0;
  std::string first;
  for (const auto& [name, bytes] : runs[0]) {
    const auto it = runs[1].find(name);
    if (it == runs[1].end() || it->second != bytes) {
      ++differing;
      if (first.empty()) first = name;
    }
  }
  const bool same = differing == 0 && runs[0].size() == runs[1].size();
  fs::remove_all(base);
  return {same, fmt("%.0f files compared across 5 stages, %.0f differ", double(runs[0].size()), double(differing)) +
                    (first.empty() ? "" : " (first: " + first + ")")};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  auto wanted = [&](int n) { return only.empty() || only.count(n) > 0; };

  std::map<int, Outcome> results;
  auto report = [&](int n, const char* name, const Outcome& o) {
    results[n] = o;
    std::printf("criterion %d %s: %s  %s\n", n, o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  };
  if (wanted(1)) report(1, "occlusion field properties", field_suite());
  if (wanted(2)) report(2, "finite-difference gradients", gradient_checks());
  if (wanted(3)) report(3, "oracle monotonicity", monotonicity());
  if (wanted(4)) report(4, "triplet validity", triplet_validity());
  if (wanted(5)) report(5, "metric equivalence", metric_equivalence());
  if (wanted(6) || wanted(7) || wanted(8)) {
    const ProtocolOutcomes p = protocol();
    if (wanted(6)) report(6, "AP ordering full >= ablations", p.ordering_table);
    if (wanted(7)) report(7, "guided proposals beat random", p.sma);
    if (wanted(8)) report(8, "held-out triplet ordering", p.heldout);
  }
  if (wanted(9)) report(9, "pipeline determinism", cli_determinism());

  int failed = 0;
  for (const auto& [n, o] : results) failed += !o.pass;
  std::printf("%zu criteria, %d failed\n", results.size(), failed);
  return failed == 0 ? 0 : 1;
}
