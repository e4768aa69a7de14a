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

#include "envaff/dataset.hpp"

#include <algorithm>
#include <cstring>
#include <exception>
#include <filesystem>
#include <set>

#include "envaff/error.hpp"
#include "envaff/scene_io.hpp"

namespace envaff {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::TestSeen: return "test-seen";
    case Split::TestNovel: return "test-novel";
  }
  return "unknown";
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "test-seen") return Split::TestSeen;
  if (s == "test-novel") return Split::TestNovel;
  throw InvalidArgument("unknown split '" + s + "' (expected train, test-seen or test-novel)");
}

const Scene& Dataset::scene(std::int64_t id) const {
  auto it = scenes.find(id);
  if (it == scenes.end()) throw CorruptData("dataset has no scene " + std::to_string(id));
  return it->second;
}

const LabeledCloud& Dataset::cloud(std::int64_t id) const {
  auto it = clouds.find(id);
  if (it == clouds.end()) throw CorruptData("dataset has no cloud " + std::to_string(id));
  return it->second;
}

bool Dataset::operator==(const Dataset& o) const {
  if (!(manifest == o.manifest && clouds == o.clouds && records == o.records && triplets == o.triplets)) return false;
  if (scenes.size() != o.scenes.size()) return false;
  for (auto a = scenes.begin(), b = o.scenes.begin(); a != scenes.end(); ++a, ++b)
    if (a->first != b->first || scene_to_json(a->second) != scene_to_json(b->second)) return false;
  return true;
}

namespace {

/// Runs fn(i) for i in [0, n) across OpenMP threads; the first exception (by
/// index) is rethrown afterwards.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t s = 0; s < count; ++s) {
    const auto i = static_cast<std::size_t>(s);
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::uint64_t scene_seed(std::uint64_t master, std::int64_t id) {
  return derive_seed(master, {0x5ce0e, static_cast<std::uint64_t>(id)});
}

std::uint64_t cloud_seed(std::uint64_t master, std::int64_t id) {
  return derive_seed(master, {0xc1011d, static_cast<std::uint64_t>(id)});
}

InteractionRecord make_record(const Scene& s, std::int64_t cloud_ref, std::size_t idx, Action a, const Verdict& v) {
  InteractionRecord r;
  r.scene_ref = s.id;
  r.cloud_ref = cloud_ref;
  r.robot = s.robot;
  r.point_index = static_cast<std::uint32_t>(idx);
  r.action = a;
  r.label = static_cast<std::uint8_t>(v.label);
  r.reason = v.reason;
  return r;
}

void split_handles(const LabeledCloud& c, std::vector<std::size_t>& handle, std::vector<std::size_t>& plain) {
  for (std::size_t i : c.target_indices()) (c.handle[i] ? handle : plain).push_back(i);
}

}  // namespace

Dataset collect(const CollectSpec& spec) {
  if (spec.num_scenes < 1) throw InvalidArgument("collect: num_scenes must be >= 1");
  if (!(spec.handle_fraction >= 0.0 && spec.handle_fraction <= 1.0))
    throw InvalidArgument("collect: handle_fraction must lie in [0, 1]");
  spec.oracle.validate();
  const auto n = static_cast<std::size_t>(spec.num_scenes);

  std::vector<Scene> scenes(n);
  std::vector<LabeledCloud> clouds(n);
  parallel_for(n, [&](std::size_t i) {
    SceneSpec ss;
    ss.id = spec.id_base + static_cast<std::int64_t>(i);
    ss.num_occluders = 1;
    ss.pool = spec.pool;
    ss.seed = scene_seed(spec.seed, ss.id);
    scenes[i] = generate_scene(ss);
    clouds[i] = sample_cloud(scenes[i], spec.cloud.n_raw, spec.cloud.n_out, cloud_seed(spec.seed, ss.id));
  });
  std::vector<std::vector<std::size_t>> handle_pts(n), plain_pts(n), all_pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    split_handles(clouds[i], handle_pts[i], plain_pts[i]);
    all_pts[i] = clouds[i].target_indices();
  }

  Dataset ds;
  ds.manifest.split = Split::Train;
  ds.manifest.seed = spec.seed;
  ds.manifest.n_points = spec.cloud.n_out;
  for (const auto& f : spec.pool) ds.manifest.families.push_back(f.name);
  for (std::size_t i = 0; i < n; ++i) {
    ds.scenes.emplace(scenes[i].id, scenes[i]);
    ds.clouds.emplace(scenes[i].id, clouds[i]);
    ds.manifest.occluder_histogram[static_cast<int>(scenes[i].occluders.size())]++;
  }

  std::int64_t next_positive = spec.positive_id_base;
  for (Action action : {Action::Push, Action::Pull}) {
    const Quota quota = action == Action::Push ? spec.push : spec.pull;
    int need[2] = {quota.failure, quota.success};
    Rng rng(derive_seed(spec.seed, {0xa7c4, static_cast<std::uint64_t>(action)}));
    std::set<std::pair<std::size_t, std::size_t>> used;
    ActionCounts& counts = ds.manifest.counts(action);

    for (int draw = 0; draw < spec.sample_budget && (need[0] > 0 || need[1] > 0); ++draw) {
      const std::size_t si = rng.index(n);
      const std::vector<std::size_t>* pool = &all_pts[si];
      if (action == Action::Pull) pool = rng.bernoulli(spec.handle_fraction) ? &handle_pts[si] : &plain_pts[si];
      if (pool->empty()) continue;
      const std::size_t idx = (*pool)[rng.index(pool->size())];
      if (!used.insert({si, idx}).second) continue;

      const Scene& scene = scenes[si];
      const LabeledCloud& cloud = clouds[si];
      const Contact contact = contact_at(cloud, idx);
      const Verdict verdict = evaluate(scene, contact, action, spec.oracle);
      if (need[verdict.label] <= 0) continue;

      // Positive: same point, one more label-preserving peripheral occluder.
      const std::int64_t pos_id = next_positive;
      AugmentOptions ao;
      ao.pool = spec.pool;
      ao.seed = derive_seed(spec.seed, {0xa5, static_cast<std::uint64_t>(pos_id)});
      ao.new_id = pos_id;
      Scene positive;
      try {
        positive = augment_positive(
            scene, contact.point,
            [&](const Scene& s) { return evaluate(s, contact, action, spec.oracle).label; }, ao);
      } catch (const AugmentFailure&) {
        continue;
      }
      ++next_positive;
      LabeledCloud pos_cloud = augment_cloud(cloud, scene, positive, static_cast<int>(positive.occluders.size()) - 1,
                                             cloud_seed(spec.seed, pos_id));
      const Verdict pos_verdict = evaluate(positive, pos_cloud, idx, action, spec.oracle);

      const std::size_t neg_idx =
          sample_negative_point(cloud, idx, derive_seed(spec.seed, {0x4e, static_cast<std::uint64_t>(pos_id)}));
      const Verdict neg_verdict = evaluate(scene, cloud, neg_idx, action, spec.oracle);

      Triplet t;
      t.anchor = ds.records.size();
      ds.records.push_back(make_record(scene, scene.id, idx, action, verdict));
      t.positive = ds.records.size();
      ds.records.push_back(make_record(positive, positive.id, idx, action, pos_verdict));
      t.negative = ds.records.size();
      ds.records.push_back(make_record(scene, scene.id, neg_idx, action, neg_verdict));
      ds.triplets.push_back(t);
      ds.scenes.emplace(positive.id, std::move(positive));
      ds.clouds.emplace(pos_id, std::move(pos_cloud));

      --need[verdict.label];
      (verdict.label ? counts.anchor_success : counts.anchor_failure)++;
      counts.records += 3;
    }
    for (int cls : {1, 0}) {
      if (need[cls] > 0) {
        const int want = cls ? quota.success : quota.failure;
        throw QuotaFailure(std::string(to_string(action)) + (cls ? " success" : " failure") + " quota: filled " +
                           std::to_string(want - need[cls]) + " of " + std::to_string(want) + " within " +
                           std::to_string(spec.sample_budget) + " draws");
      }
    }
  }
  ds.manifest.num_records = ds.records.size();
  ds.manifest.num_triplets = ds.triplets.size();
  for (const auto& [id, s] : ds.scenes) ds.manifest.scene_ids.push_back(id);
  return ds;
}

Dataset build_test_set(const TestSpec& spec, Split split) {
  if (split == Split::Train) throw InvalidArgument("build_test_set: split must be test-seen or test-novel");
  if (spec.num_scenes < 1 || spec.min_occluders < 0 || spec.max_occluders < spec.min_occluders)
    throw InvalidArgument("build_test_set: bad scene or occluder counts");
  spec.oracle.validate();
  const bool novel = split == Split::TestNovel;
  const std::int64_t base = novel ? IdRange::kTestNovel : IdRange::kTestSeen;
  const auto pool = novel ? OccluderFamily::novel() : OccluderFamily::seen();
  const auto n = static_cast<std::size_t>(spec.num_scenes);

  std::vector<Scene> scenes(n);
  std::vector<LabeledCloud> clouds(n);
  std::vector<std::vector<InteractionRecord>> recs(n);
  parallel_for(n, [&](std::size_t i) {
    const std::int64_t id = base + static_cast<std::int64_t>(i);
    Rng rng(derive_seed(spec.seed, {0x7e57, static_cast<std::uint64_t>(id)}));
    SceneSpec ss;
    ss.id = id;
    ss.num_occluders =
        spec.min_occluders + static_cast<int>(rng.index(static_cast<std::uint64_t>(spec.max_occluders - spec.min_occluders + 1)));
    ss.pool = pool;
    ss.seed = scene_seed(spec.seed, id);
    scenes[i] = generate_scene(ss);
    clouds[i] = sample_cloud(scenes[i], spec.cloud.n_raw, spec.cloud.n_out, cloud_seed(spec.seed, id));

    std::vector<std::size_t> handle, plain, all = clouds[i].target_indices();
    split_handles(clouds[i], handle, plain);
    auto draw = [&rng](std::vector<std::size_t> from, std::size_t k) {
      // Partial Fisher-Yates: first k entries become the sample.
      k = std::min(k, from.size());
      for (std::size_t j = 0; j < k; ++j) std::swap(from[j], from[j + rng.index(from.size() - j)]);
      from.resize(k);
      return from;
    };
    const auto m = static_cast<std::size_t>(spec.points_per_action);
    for (Action a : {Action::Push, Action::Pull}) {
      std::vector<std::size_t> pts;
      if (a == Action::Push) {
        pts = draw(all, m);
      } else {
        const auto nh = static_cast<std::size_t>(std::llround(spec.handle_fraction * static_cast<double>(m)));
        pts = draw(handle, nh);
        auto rest = draw(plain, m - pts.size());
        pts.insert(pts.end(), rest.begin(), rest.end());
      }
      for (std::size_t idx : pts) recs[i].push_back(make_record(scenes[i], id, idx, a, evaluate(scenes[i], clouds[i], idx, a, spec.oracle)));
    }
  });

  Dataset ds;
  ds.manifest.split = split;
  ds.manifest.seed = spec.seed;
  ds.manifest.n_points = spec.cloud.n_out;
  for (const auto& f : pool) ds.manifest.families.push_back(f.name);
  for (std::size_t i = 0; i < n; ++i) {
    ds.manifest.occluder_histogram[static_cast<int>(scenes[i].occluders.size())]++;
    for (const auto& r : recs[i]) {
      ActionCounts& c = ds.manifest.counts(r.action);
      (r.label ? c.anchor_success : c.anchor_failure)++;
      c.records++;
      ds.records.push_back(r);
    }
    ds.manifest.scene_ids.push_back(scenes[i].id);
    ds.clouds.emplace(scenes[i].id, std::move(clouds[i]));
    ds.scenes.emplace(scenes[i].id, std::move(scenes[i]));
  }
  ds.manifest.num_records = ds.records.size();
  return ds;
}

std::vector<std::string> check_triplets(const Dataset& ds, const OracleConfig& cfg) {
  std::vector<std::string> bad;
  for (std::size_t k = 0; k < ds.triplets.size(); ++k) {
    const Triplet& t = ds.triplets[k];
    const std::string tag = "triplet " + std::to_string(k) + ": ";
    if (t.anchor >= ds.records.size() || t.positive >= ds.records.size() || t.negative >= ds.records.size()) {
      bad.push_back(tag + "record index out of range");
      continue;
    }
    const auto& a = ds.records[t.anchor];
    const auto& p = ds.records[t.positive];
    const auto& n = ds.records[t.negative];
    if (p.point_index != a.point_index) bad.push_back(tag + "positive point differs from anchor");
    if (p.label != a.label) bad.push_back(tag + "positive label differs from anchor");
    if (n.point_index == a.point_index) bad.push_back(tag + "negative reuses the anchor point");
    if (n.scene_ref != a.scene_ref) bad.push_back(tag + "negative scene differs from anchor");
    if (p.scene_ref == a.scene_ref) bad.push_back(tag + "positive scene equals anchor scene");
    if (!(p.robot == a.robot && n.robot == a.robot)) bad.push_back(tag + "robot differs within triplet");
    if (p.action != a.action || n.action != a.action) bad.push_back(tag + "action differs within triplet");
    const Scene& ps = ds.scene(p.scene_ref);
    const Scene& as = ds.scene(a.scene_ref);
    if (ps.occluders.size() != as.occluders.size() + 1) bad.push_back(tag + "positive does not add one occluder");
    if (ds.cloud(p.cloud_ref).points.at(p.point_index) != ds.cloud(a.cloud_ref).points.at(a.point_index))
      bad.push_back(tag + "positive target point moved");
    for (const auto* r : {&a, &p, &n}) {
      const int v = evaluate(ds.scene(r->scene_ref), ds.cloud(r->cloud_ref), r->point_index, r->action, cfg).label;
      if (v != r->label) bad.push_back(tag + "stored label disagrees with the oracle");
    }
  }
  return bad;
}

// ---------------------------------------------------------------------------
// On-disk format

namespace {

constexpr char kMagic[4] = {'E', 'A', 'F', 'R'};
constexpr std::uint32_t kRecordBytes = 8 + 8 + 24 + 4 + 3;
constexpr std::uint32_t kTripletBytes = 24;
constexpr std::uint8_t kNoReason = 0xff;

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T take(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw CorruptData("records.bin: truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

std::string encode_records(const std::vector<InteractionRecord>& records, const std::vector<Triplet>& triplets) {
  std::string out(kMagic, 4);
  put(out, kDatasetFormatVersion);
  put(out, static_cast<std::uint64_t>(records.size()));
  for (const auto& r : records) {
    put(out, kRecordBytes);
    put(out, r.scene_ref);
    put(out, r.cloud_ref);
    for (double v : {r.robot.x, r.robot.y, r.robot.z}) put(out, v);
    put(out, r.point_index);
    put(out, static_cast<std::uint8_t>(r.action));
    put(out, r.label);
    put(out, r.reason ? static_cast<std::uint8_t>(*r.reason) : kNoReason);
  }
  put(out, static_cast<std::uint64_t>(triplets.size()));
  for (const auto& t : triplets) {
    put(out, kTripletBytes);
    for (std::size_t v : {t.anchor, t.positive, t.negative}) put(out, static_cast<std::uint64_t>(v));
  }
  return out;
}

void decode_records(const std::string& in, std::vector<InteractionRecord>& records, std::vector<Triplet>& triplets) {
  if (in.size() < 5 || std::memcmp(in.data(), kMagic, 4) != 0) throw CorruptData("records.bin: bad magic");
  std::size_t pos = 4;
  const auto version = take<std::uint8_t>(in, pos);
  if (version != kDatasetFormatVersion)
    throw VersionMismatch("records.bin version " + std::to_string(version) + ", expected " +
                          std::to_string(kDatasetFormatVersion));
  const auto count = take<std::uint64_t>(in, pos);
  if (count > in.size() / kRecordBytes) throw CorruptData("records.bin: record count exceeds file size");
  records.clear();
  records.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    if (take<std::uint32_t>(in, pos) != kRecordBytes) throw CorruptData("records.bin: bad record length");
    InteractionRecord r;
    r.scene_ref = take<std::int64_t>(in, pos);
    r.cloud_ref = take<std::int64_t>(in, pos);
    r.robot.x = take<double>(in, pos);
    r.robot.y = take<double>(in, pos);
    r.robot.z = take<double>(in, pos);
    r.point_index = take<std::uint32_t>(in, pos);
    const auto action = take<std::uint8_t>(in, pos);
    r.label = take<std::uint8_t>(in, pos);
    const auto reason = take<std::uint8_t>(in, pos);
    if (action > 1) throw CorruptData("records.bin: bad action");
    if (r.label > 1) throw CorruptData("records.bin: bad label");
    if (reason != kNoReason && reason > static_cast<std::uint8_t>(FailureReason::InsufficientMotion))
      throw CorruptData("records.bin: bad failure reason");
    r.action = static_cast<Action>(action);
    if (reason != kNoReason) r.reason = static_cast<FailureReason>(reason);
    if ((r.label == 1) != !r.reason) throw CorruptData("records.bin: label and failure reason disagree");
    records.push_back(r);
  }
  const auto tcount = take<std::uint64_t>(in, pos);
  if (tcount > in.size() / kTripletBytes) throw CorruptData("records.bin: triplet count exceeds file size");
  triplets.clear();
  triplets.reserve(tcount);
  for (std::uint64_t k = 0; k < tcount; ++k) {
    if (take<std::uint32_t>(in, pos) != kTripletBytes) throw CorruptData("records.bin: bad triplet length");
    Triplet t;
    t.anchor = take<std::uint64_t>(in, pos);
    t.positive = take<std::uint64_t>(in, pos);
    t.negative = take<std::uint64_t>(in, pos);
    if (t.anchor >= records.size() || t.positive >= records.size() || t.negative >= records.size())
      throw CorruptData("records.bin: triplet refers to a missing record");
    triplets.push_back(t);
  }
  if (pos != in.size()) throw CorruptData("records.bin: trailing bytes");
}

json manifest_to_json(const DatasetManifest& m) {
  json j;
  j["format_version"] = m.format_version;
  j["split"] = to_string(m.split);
  j["seed"] = m.seed;
  j["n_points"] = m.n_points;
  j["families"] = m.families;
  json hist = json::object();
  for (const auto& [k, v] : m.occluder_histogram) hist[std::to_string(k)] = v;
  j["occluder_histogram"] = hist;
  for (Action a : {Action::Push, Action::Pull}) {
    const ActionCounts& c = m.counts(a);
    j["counts"][to_string(a)] = {
        {"anchor_success", c.anchor_success}, {"anchor_failure", c.anchor_failure}, {"records", c.records}};
  }
  j["num_records"] = m.num_records;
  j["num_triplets"] = m.num_triplets;
  j["scene_ids"] = m.scene_ids;
  return j;
}

DatasetManifest manifest_from_json(const json& j) {
  try {
    DatasetManifest m;
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != kDatasetFormatVersion)
      throw VersionMismatch("manifest version " + std::to_string(m.format_version) + ", expected " +
                            std::to_string(kDatasetFormatVersion));
    try {
      m.split = parse_split(j.at("split").get<std::string>());
    } catch (const InvalidArgument& e) {
      throw CorruptData(e.what());
    }
    m.seed = j.at("seed").get<std::uint64_t>();
    m.n_points = j.at("n_points").get<std::size_t>();
    m.families = j.at("families").get<std::vector<std::string>>();
    for (const auto& [k, v] : j.at("occluder_histogram").items()) m.occluder_histogram[std::stoi(k)] = v.get<int>();
    for (Action a : {Action::Push, Action::Pull}) {
      const json& c = j.at("counts").at(to_string(a));
      m.counts(a) = {c.at("anchor_success").get<int>(), c.at("anchor_failure").get<int>(), c.at("records").get<int>()};
    }
    m.num_records = j.at("num_records").get<std::size_t>();
    m.num_triplets = j.at("num_triplets").get<std::size_t>();
    m.scene_ids = j.at("scene_ids").get<std::vector<std::int64_t>>();
    return m;
  } catch (const json::exception& e) {
    throw CorruptData(std::string("manifest: ") + e.what());
  }
}

void save_dataset(const std::string& dir, const Dataset& ds) {
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "scenes", ec);
  fs::create_directories(fs::path(dir) / "clouds", ec);
  if (ec) throw IoFailure("cannot create dataset directory " + dir + ": " + ec.message());
  write_file((fs::path(dir) / "manifest.json").string(), manifest_to_json(ds.manifest).dump(2) + "\n");
  write_file((fs::path(dir) / "records.bin").string(), encode_records(ds.records, ds.triplets));
  for (const auto& [id, s] : ds.scenes) save_scene((fs::path(dir) / "scenes" / (std::to_string(id) + ".json")).string(), s);
  for (const auto& [id, c] : ds.clouds) save_cloud_ply((fs::path(dir) / "clouds" / (std::to_string(id) + ".ply")).string(), c);
}

Dataset load_dataset(const std::string& dir) {
  Dataset ds;
  json mj;
  try {
    mj = json::parse(read_file((fs::path(dir) / "manifest.json").string()));
  } catch (const json::exception& e) {
    throw CorruptData(std::string("manifest: ") + e.what());
  }
  ds.manifest = manifest_from_json(mj);
  decode_records(read_file((fs::path(dir) / "records.bin").string()), ds.records, ds.triplets);
  for (std::int64_t id : ds.manifest.scene_ids) {
    ds.scenes.emplace(id, load_scene((fs::path(dir) / "scenes" / (std::to_string(id) + ".json")).string()));
    LabeledCloud c = load_cloud_ply((fs::path(dir) / "clouds" / (std::to_string(id) + ".ply")).string());
    if (c.size() != ds.manifest.n_points) throw CorruptData("cloud " + std::to_string(id) + " has the wrong size");
    auto problems = validate_cloud(c, ds.scenes.at(id));
    if (!problems.empty()) throw CorruptData("cloud " + std::to_string(id) + ": " + problems.front());
    ds.clouds.emplace(id, std::move(c));
  }

  // Cross-checks: references resolve and manifest counts match the records.
  if (ds.records.size() != ds.manifest.num_records || ds.triplets.size() != ds.manifest.num_triplets)
    throw CorruptData("manifest counts disagree with records.bin");
  ActionCounts seen[2];
  std::set<std::size_t> anchors;
  for (const auto& t : ds.triplets) anchors.insert(t.anchor);
  const bool paired = !ds.triplets.empty();
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const auto& r = ds.records[i];
    if (!ds.scenes.count(r.scene_ref) || !ds.clouds.count(r.cloud_ref))
      throw CorruptData("record " + std::to_string(i) + " refers to a missing scene or cloud");
    const LabeledCloud& c = ds.clouds.at(r.cloud_ref);
    if (r.point_index >= c.size() || !c.seg[r.point_index].is_part())
      throw CorruptData("record " + std::to_string(i) + " does not name a target point");
    ActionCounts& a = seen[static_cast<int>(r.action)];
    a.records++;
    if (!paired || anchors.count(i)) (r.label ? a.anchor_success : a.anchor_failure)++;
  }
  if (!(seen[0] == ds.manifest.push && seen[1] == ds.manifest.pull))
    throw CorruptData("manifest per-action counts disagree with records.bin");
  return ds;
}

}  // namespace envaff
