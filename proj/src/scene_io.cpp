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

#include "envaff/scene_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "envaff/error.hpp"

static_assert(std::endian::native == std::endian::little, "on-disk formats assume a little-endian host");

namespace envaff {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoFailure("write failed: " + path);
}

namespace {

json vec(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec(const json& j) {
  if (!j.is_array() || j.size() != 3) throw CorruptData("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

UnitVec3 unit(const json& j) {
  const Vec3 v = vec(j);
  if (std::abs(norm(v) - 1.0) > 1e-9) throw CorruptData("axis is not unit length");
  return UnitVec3::trusted(v);
}

json mat(const Mat3& m) { return json(m.m); }

Mat3 rotation(const json& j) {
  if (!j.is_array() || j.size() != 9) throw CorruptData("expected a 3x3 matrix");
  Mat3 m;
  for (std::size_t i = 0; i < 9; ++i) m.m[i] = j[i].get<double>();
  if (!is_rotation(m)) throw CorruptData("matrix is not a proper rotation");
  return m;
}

json pose(const RigidTransform& t) { return {{"rotation", mat(t.rotation)}, {"translation", vec(t.translation)}}; }

RigidTransform pose(const json& j) { return {rotation(j.at("rotation")), vec(j.at("translation"))}; }

json box(const OrientedBox& b) {
  return {{"type", "box"}, {"center", vec(b.center)}, {"half_extents", vec(b.half_extents)},
          {"rotation", mat(b.rotation)}};
}

OrientedBox box(const json& j) {
  OrientedBox b{vec(j.at("center")), vec(j.at("half_extents")), rotation(j.at("rotation"))};
  return b;
}

json prim(const Primitive& p) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, OrientedBox>) {
          return box(s);
        } else if constexpr (std::is_same_v<T, Sphere>) {
          return {{"type", "sphere"}, {"center", vec(s.center)}, {"radius", s.radius}};
        } else {
          return {{"type", "cylinder"}, {"base", vec(s.base)}, {"axis", vec(s.axis)},
                  {"half_length", s.half_length}, {"radius", s.radius}};
        }
      },
      p);
}

Primitive prim(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  Primitive p;
  if (type == "box") {
    p = box(j);
  } else if (type == "sphere") {
    p = Sphere{vec(j.at("center")), j.at("radius").get<double>()};
  } else if (type == "cylinder") {
    p = Cylinder{vec(j.at("base")), unit(j.at("axis")), j.at("half_length").get<double>(), j.at("radius").get<double>()};
  } else {
    throw CorruptData("unknown primitive type '" + type + "'");
  }
  try {
    validate(p);
  } catch (const InvalidArgument& e) {
    throw CorruptData(e.what());
  }
  return p;
}

}  // namespace

json scene_to_json(const Scene& scene) {
  json j;
  j["schema_version"] = kSceneSchemaVersion;
  j["id"] = scene.id;
  j["rng_seed"] = scene.rng_seed;
  j["robot"] = vec(scene.robot);
  json& t = j["target"];
  t["base_pose"] = pose(scene.target.base_pose);
  t["body"] = json::array();
  for (const auto& b : scene.target.body) t["body"].push_back(box(b));
  t["parts"] = json::array();
  for (const auto& p : scene.target.parts) {
    const Joint& jt = p.joint;
    t["parts"].push_back({{"shape", box(p.shape)},
                          {"joint",
                           {{"kind", jt.kind == JointKind::Prismatic ? "prismatic" : "revolute"},
                            {"axis", vec(jt.axis)},
                            {"anchor", vec(jt.anchor)},
                            {"lo", jt.lo},
                            {"hi", jt.hi},
                            {"state", jt.state}}},
                          {"handle", p.handle ? box(*p.handle) : json(nullptr)}});
  }
  j["occluders"] = json::array();
  for (const auto& o : scene.occluders)
    j["occluders"].push_back({{"family", o.family}, {"shape", prim(o.shape)}, {"pose", pose(o.pose)}});
  return j;
}

Scene scene_from_json(const json& j) {
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kSceneSchemaVersion)
      throw VersionMismatch("scene schema version " + std::to_string(version) + ", expected " +
                            std::to_string(kSceneSchemaVersion));
    Scene s;
    s.id = j.at("id").get<std::int64_t>();
    s.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    s.robot = vec(j.at("robot"));
    const json& t = j.at("target");
    s.target.base_pose = pose(t.at("base_pose"));
    for (const auto& b : t.at("body")) s.target.body.push_back(box(b));
    for (const auto& pj : t.at("parts")) {
      Part p;
      p.shape = box(pj.at("shape"));
      const json& jt = pj.at("joint");
      const std::string kind = jt.at("kind").get<std::string>();
      if (kind != "prismatic" && kind != "revolute") throw CorruptData("unknown joint kind '" + kind + "'");
      p.joint.kind = kind == "prismatic" ? JointKind::Prismatic : JointKind::Revolute;
      p.joint.axis = unit(jt.at("axis"));
      p.joint.anchor = vec(jt.at("anchor"));
      p.joint.lo = jt.at("lo").get<double>();
      p.joint.hi = jt.at("hi").get<double>();
      p.joint.state = jt.at("state").get<double>();
      if (!(p.joint.lo <= p.joint.state && p.joint.state <= p.joint.hi)) throw CorruptData("joint state outside range");
      if (!pj.at("handle").is_null()) p.handle = box(pj.at("handle"));
      s.target.parts.push_back(std::move(p));
    }
    for (const auto& oj : j.at("occluders")) {
      Occluder o;
      o.family = oj.at("family").get<std::string>();
      o.shape = prim(oj.at("shape"));
      o.pose = pose(oj.at("pose"));
      s.occluders.push_back(std::move(o));
    }
    return s;
  } catch (const json::exception& e) {
    throw CorruptData(std::string("scene json: ") + e.what());
  }
}

void save_scene(const std::string& path, const Scene& scene) { write_file(path, scene_to_json(scene).dump(1) + "\n"); }

Scene load_scene(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw CorruptData(path + ": " + e.what());
  }
  return scene_from_json(j);
}

namespace {

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T take(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw CorruptData("ply: truncated vertex data");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

constexpr const char* kCloudHeaderTail =
    "property double x\nproperty double y\nproperty double z\n"
    "property double nx\nproperty double ny\nproperty double nz\n"
    "property int seg\nproperty uchar handle\nend_header\n";

}  // namespace

void save_cloud_ply(const std::string& path, const LabeledCloud& cloud) {
  std::string out = "ply\nformat binary_little_endian 1.0\nelement vertex " + std::to_string(cloud.size()) + "\n";
  out += kCloudHeaderTail;
  out.reserve(out.size() + cloud.size() * 53);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    const Vec3& n = cloud.normals[i];
    for (double v : {p.x, p.y, p.z, n.x, n.y, n.z}) put(out, v);
    put(out, cloud.seg[i].encode());
    put(out, cloud.handle[i]);
  }
  write_file(path, out);
}

LabeledCloud load_cloud_ply(const std::string& path) {
  const std::string in = read_file(path);
  const std::string head = "ply\nformat binary_little_endian 1.0\nelement vertex ";
  if (in.compare(0, head.size(), head) != 0) throw CorruptData(path + ": not a binary little-endian ply cloud");
  std::size_t pos = head.size();
  const std::size_t eol = in.find('\n', pos);
  if (eol == std::string::npos) throw CorruptData(path + ": truncated header");
  std::size_t count = 0;
  try {
    count = std::stoull(in.substr(pos, eol - pos));
  } catch (const std::exception&) {
    throw CorruptData(path + ": bad vertex count");
  }
  pos = eol + 1;
  const std::string tail = kCloudHeaderTail;
  if (in.compare(pos, tail.size(), tail) != 0) throw CorruptData(path + ": unexpected vertex properties");
  pos += tail.size();
  if (in.size() - pos != count * 53) throw CorruptData(path + ": vertex data size mismatch");
  LabeledCloud c;
  c.points.resize(count);
  c.normals.resize(count);
  c.seg.resize(count);
  c.handle.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    double v[6];
    for (double& x : v) x = take<double>(in, pos);
    c.points[i] = {v[0], v[1], v[2]};
    c.normals[i] = {v[3], v[4], v[5]};
    if (std::abs(norm(c.normals[i]) - 1.0) > 1e-6) throw CorruptData(path + ": normal not unit length");
    c.seg[i] = SegLabel::decode(take<std::int32_t>(in, pos));
    c.handle[i] = take<std::uint8_t>(in, pos);
  }
  return c;
}

void save_colored_ply(const std::string& path, const std::vector<Vec3>& points,
                      const std::vector<std::array<std::uint8_t, 3>>& colors) {
  if (points.size() != colors.size()) throw LengthMismatch("save_colored_ply: points and colors differ in length");
  std::string out = "ply\nformat binary_little_endian 1.0\nelement vertex " + std::to_string(points.size()) +
                    "\nproperty float x\nproperty float y\nproperty float z\n"
                    "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (double v : {points[i].x, points[i].y, points[i].z}) put(out, static_cast<float>(v));
    for (std::uint8_t c : colors[i]) put(out, c);
  }
  write_file(path, out);
}

}  // namespace envaff
