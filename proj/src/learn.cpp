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

#include "envaff/learn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "envaff/error.hpp"

namespace envaff {

namespace {

double relu(double x) { return x > 0.0 ? x : 0.0; }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// y = W x + b.
void affine(const std::vector<double>& p, const Dense& l, const double* x, double* y) {
  for (std::size_t o = 0; o < l.out; ++o) {
    const double* w = p.data() + l.w + o * l.in;
    double acc = p[l.b + o];
    for (std::size_t i = 0; i < l.in; ++i) acc += w[i] * x[i];
    y[o] = acc;
  }
}

/// Accumulates ∂/∂W, ∂/∂b for upstream dy and, when dx is given, adds Wᵀdy.
void affine_back(const std::vector<double>& p, const Dense& l, const double* x, const double* dy, double* grad,
                 double* dx) {
  for (std::size_t o = 0; o < l.out; ++o) {
    const double d = dy[o];
    if (d == 0.0) continue;
    double* gw = grad + l.w + o * l.in;
    for (std::size_t i = 0; i < l.in; ++i) gw[i] += d * x[i];
    grad[l.b + o] += d;
    if (dx) {
      const double* w = p.data() + l.w + o * l.in;
      for (std::size_t i = 0; i < l.in; ++i) dx[i] += w[i] * d;
    }
  }
}

void check_grad_size(const Model& m, std::span<double> grad) {
  if (grad.size() != m.params.size()) throw ShapeMismatch("gradient buffer does not match parameter count");
}

// Column layout of the point layer.
constexpr std::size_t kColSame = 10;
constexpr std::size_t kColRel = 11;
constexpr std::size_t kStaticCols = 13;
constexpr double kNormEps = 1e-12;  // everything except `same`, with p repeated for the rel block

}  // namespace

void Model::layout() {
  std::size_t off = 0;
  auto place = [&off](Dense& d, std::size_t in, std::size_t out) {
    d.in = in;
    d.out = out;
    d.w = off;
    d.b = off + in * out;
    off += d.size();
  };
  place(robot1, 3, cfg.robot_hidden);
  place(robot2, cfg.robot_hidden, cfg.feature);
  place(point, kPointFeatures, cfg.point_hidden);
  place(fuse, 2 * cfg.point_hidden, cfg.feature);
  place(scene1, cfg.scene_in_dim(), cfg.scene_hidden);
  place(scene2, cfg.scene_hidden, cfg.feature);
  place(pred1, 3 * cfg.feature, cfg.pred_hidden);
  place(pred2, cfg.pred_hidden, 1);
  if (!params.empty() && params.size() != off) throw ShapeMismatch("parameter vector does not match the model layout");
  if (params.empty()) params.assign(off, 0.0);
}

Model Model::init(const ModelConfig& cfg, Action action, std::uint64_t seed) {
  if (cfg.robot_hidden == 0 || cfg.point_hidden == 0 || cfg.scene_hidden == 0 || cfg.feature == 0 ||
      cfg.pred_hidden == 0 || cfg.k_significant == 0)
    throw InvalidArgument("ModelConfig: all widths must be positive");
  Model m;
  m.cfg = cfg;
  m.action = action;
  m.layout();
  Rng rng(derive_seed(seed, {0x1417, static_cast<std::uint64_t>(action)}));
  for (const Dense* d : {&m.robot1, &m.robot2, &m.point, &m.fuse, &m.scene1, &m.scene2, &m.pred1, &m.pred2}) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(d->in));
    for (std::size_t i = 0; i < d->in * d->out; ++i) m.params[d->w + i] = rng.uniform(-bound, bound);
  }
  return m;
}

// -- robot encoder ----------------------------------------------------------

void robot_forward(const Model& m, const Vec3& robot, RobotCache& c) {
  c.x[0] = robot.x;
  c.x[1] = robot.y;
  c.x[2] = robot.z;
  c.pre1.resize(m.robot1.out);
  c.h1.resize(m.robot1.out);
  c.out.resize(m.robot2.out);
  affine(m.params, m.robot1, c.x, c.pre1.data());
  for (std::size_t i = 0; i < c.h1.size(); ++i) c.h1[i] = relu(c.pre1[i]);
  affine(m.params, m.robot2, c.h1.data(), c.out.data());
}

void robot_backward(const Model& m, const RobotCache& c, std::span<const double> dout, std::span<double> grad) {
  check_grad_size(m, grad);
  std::vector<double> dh(m.robot1.out, 0.0);
  affine_back(m.params, m.robot2, c.h1.data(), dout.data(), grad.data(), dh.data());
  for (std::size_t i = 0; i < dh.size(); ++i)
    if (c.pre1[i] <= 0.0) dh[i] = 0.0;
  affine_back(m.params, m.robot1, c.x, dh.data(), grad.data(), nullptr);
}

// -- target encoder ---------------------------------------------------------

void point_features(const LabeledCloud& cloud, std::size_t i, std::size_t t, double* out) {
  const Vec3& p = cloud.points[i];
  const Vec3& n = cloud.normals[i];
  const Vec3 rel = p - cloud.points[t];
  const SegLabel s = cloud.seg[i];
  const SegLabel st = cloud.seg[t];
  const bool same = s.is_part() && st.is_part() && s.index == st.index;
  const double f[kPointFeatures] = {p.x,
                                    p.y,
                                    p.z,
                                    n.x,
                                    n.y,
                                    n.z,
                                    s.kind == SegLabel::Kind::Part ? 1.0 : 0.0,
                                    s.kind == SegLabel::Kind::Body ? 1.0 : 0.0,
                                    s.kind == SegLabel::Kind::Occluder ? 1.0 : 0.0,
                                    cloud.handle[i] ? 1.0 : 0.0,
                                    same ? 1.0 : 0.0,
                                    rel.x,
                                    rel.y,
                                    rel.z};
  std::copy(f, f + kPointFeatures, out);
}

CloudActivations target_prepare(const Model& m, const LabeledCloud& cloud, kernels::Exec exec) {
  // Preactivation split: W x_i = W_static s_i + W_same same_i − W_rel T, with
  // s_i = (p, n, one-hot, handle, p). Only the last two terms depend on T.
  const std::size_t n = cloud.size();
  const std::size_t h = m.point.out;
  std::vector<double> in(n * kStaticCols);
  for (std::size_t i = 0; i < n; ++i) {
    double f[kPointFeatures];
    point_features(cloud, i, i, f);
    double* row = in.data() + i * kStaticCols;
    std::copy(f, f + kColSame, row);
    row[10] = cloud.points[i].x;
    row[11] = cloud.points[i].y;
    row[12] = cloud.points[i].z;
  }
  std::vector<double> w(h * kStaticCols), b(h);
  for (std::size_t c = 0; c < h; ++c) {
    const double* wc = m.params.data() + m.point.w + c * kPointFeatures;
    double* dst = w.data() + c * kStaticCols;
    std::copy(wc, wc + kColSame, dst);
    std::copy(wc + kColRel, wc + kPointFeatures, dst + kColSame);
    b[c] = m.params[m.point.b + c];
  }
  CloudActivations act;
  act.n = n;
  act.a.resize(n * h);
  kernels::dense_rows(in, n, kStaticCols, w, b, h, act.a, exec);
  return act;
}

void target_forward(const Model& m, const LabeledCloud& cloud, const CloudActivations& act, std::size_t point,
                    TargetCache& c) {
  const std::size_t n = cloud.size();
  const std::size_t h = m.point.out;
  if (act.n != n || act.a.size() != n * h) throw ShapeMismatch("target_forward: activations do not match the cloud");
  if (point >= n) throw ShapeMismatch("target_forward: point index out of range");
  const Vec3 t = cloud.points[point];
  const SegLabel st = cloud.seg[point];

  std::vector<double> shift(h), w_same(h);
  for (std::size_t ch = 0; ch < h; ++ch) {
    const double* wc = m.params.data() + m.point.w + ch * kPointFeatures;
    shift[ch] = -(wc[kColRel] * t.x + wc[kColRel + 1] * t.y + wc[kColRel + 2] * t.z);
    w_same[ch] = wc[kColSame];
  }
  c.point = point;
  c.argmax.assign(h, 0);
  c.pre_max.assign(h, -std::numeric_limits<double>::infinity());
  c.pre_t.resize(h);
  for (std::size_t i = 0; i < n; ++i) {
    const SegLabel s = cloud.seg[i];
    const bool same = s.is_part() && st.is_part() && s.index == st.index;
    const double* a = act.a.data() + i * h;
    for (std::size_t ch = 0; ch < h; ++ch) {
      const double pre = a[ch] + shift[ch] + (same ? w_same[ch] : 0.0);
      if (pre > c.pre_max[ch]) {
        c.pre_max[ch] = pre;
        c.argmax[ch] = i;
      }
      if (i == point) c.pre_t[ch] = pre;
    }
  }
  c.fuse_in.resize(2 * h);
  for (std::size_t ch = 0; ch < h; ++ch) {
    c.fuse_in[ch] = relu(c.pre_t[ch]);
    c.fuse_in[h + ch] = relu(c.pre_max[ch]);
  }
  c.out.resize(m.fuse.out);
  affine(m.params, m.fuse, c.fuse_in.data(), c.out.data());
}

void target_backward(const Model& m, const LabeledCloud& cloud, const TargetCache& c, std::span<const double> dout,
                     std::span<double> grad) {
  check_grad_size(m, grad);
  const std::size_t h = m.point.out;
  std::vector<double> din(2 * h, 0.0);
  affine_back(m.params, m.fuse, c.fuse_in.data(), dout.data(), grad.data(), din.data());
  double f[kPointFeatures];
  auto route = [&](std::size_t ch, std::size_t row, double d) {
    point_features(cloud, row, c.point, f);
    double* gw = grad.data() + m.point.w + ch * kPointFeatures;
    for (std::size_t j = 0; j < kPointFeatures; ++j) gw[j] += d * f[j];
    grad[m.point.b + ch] += d;
  };
  for (std::size_t ch = 0; ch < h; ++ch) {
    if (c.pre_t[ch] > 0.0 && din[ch] != 0.0) route(ch, c.point, din[ch]);
    if (c.pre_max[ch] > 0.0 && din[h + ch] != 0.0) route(ch, c.argmax[ch], din[h + ch]);
  }
}

// -- scene encoder ----------------------------------------------------------

std::vector<double> scene_inputs(const ModelConfig& cfg, const LabeledCloud& cloud, const Vec3& robot,
                                 std::size_t point, kernels::Exec exec) {
  SelectOptions opt;
  opt.k = cfg.k_significant;
  opt.include_target_points = cfg.include_target_points;
  opt.exec = exec;
  const SignificantSet sel = select_significant(cloud, robot, point, opt);
  const std::size_t d = cfg.scene_in_dim();
  const Vec3 t = cloud.points[point];
  std::vector<double> rows;
  rows.reserve(sel.samples.size() * d);
  for (const auto& s : sel.samples) {
    rows.push_back(s.value.x * cfg.field_scale);
    rows.push_back(s.value.y * cfg.field_scale);
    rows.push_back(s.value.z * cfg.field_scale);
    if (cfg.scene_input == SceneInput::FieldOffset) {
      const Vec3 rel = cloud.points[s.point_index] - t;
      rows.push_back(rel.x);
      rows.push_back(rel.y);
      rows.push_back(rel.z);
    }
  }
  return rows;
}

void scene_forward(const Model& m, std::span<const double> inputs, SceneCache& c) {
  const std::size_t d = m.scene1.in, h = m.scene1.out;
  if (inputs.empty() || inputs.size() % d != 0) throw ShapeMismatch("scene_forward: input is not a non-empty k × d block");
  c.rows = inputs.size() / d;
  c.pre.resize(c.rows * h);
  std::vector<double> w(m.params.begin() + static_cast<std::ptrdiff_t>(m.scene1.w),
                        m.params.begin() + static_cast<std::ptrdiff_t>(m.scene1.w + d * h));
  std::vector<double> b(m.params.begin() + static_cast<std::ptrdiff_t>(m.scene1.b),
                        m.params.begin() + static_cast<std::ptrdiff_t>(m.scene1.b + h));
  kernels::dense_rows(inputs, c.rows, d, w, b, h, c.pre, kernels::Exec::Serial);
  c.argmax.assign(h, 0);
  c.g.assign(h, 0.0);
  std::vector<double> best(h, -std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r < c.rows; ++r)
    for (std::size_t ch = 0; ch < h; ++ch)
      if (c.pre[r * h + ch] > best[ch]) {
        best[ch] = c.pre[r * h + ch];
        c.argmax[ch] = r;
      }
  for (std::size_t ch = 0; ch < h; ++ch) c.g[ch] = relu(best[ch]);
  c.raw.resize(m.scene2.out);
  affine(m.params, m.scene2, c.g.data(), c.raw.data());
  double sq = kNormEps;
  for (double v : c.raw) sq += v * v;
  c.raw_norm = std::sqrt(sq);
  c.out.resize(c.raw.size());
  for (std::size_t i = 0; i < c.raw.size(); ++i) c.out[i] = c.raw[i] / c.raw_norm;
}

void scene_backward(const Model& m, std::span<const double> inputs, const SceneCache& c,
                    std::span<const double> dout, std::span<double> grad) {
  check_grad_size(m, grad);
  const std::size_t d = m.scene1.in, h = m.scene1.out;
  double proj = 0.0;
  for (std::size_t i = 0; i < c.out.size(); ++i) proj += c.out[i] * dout[i];
  std::vector<double> draw(c.out.size());
  for (std::size_t i = 0; i < draw.size(); ++i) draw[i] = (dout[i] - c.out[i] * proj) / c.raw_norm;
  std::vector<double> dg(h, 0.0);
  affine_back(m.params, m.scene2, c.g.data(), draw.data(), grad.data(), dg.data());
  for (std::size_t ch = 0; ch < h; ++ch) {
    const std::size_t r = c.argmax[ch];
    if (dg[ch] == 0.0 || c.pre[r * h + ch] <= 0.0) continue;
    double* gw = grad.data() + m.scene1.w + ch * d;
    for (std::size_t j = 0; j < d; ++j) gw[j] += dg[ch] * inputs[r * d + j];
    grad[m.scene1.b + ch] += dg[ch];
  }
}

// -- predictor --------------------------------------------------------------

void predictor_forward(const Model& m, std::span<const double> z, PredictorCache& c) {
  if (z.size() != m.pred1.in) throw ShapeMismatch("predictor_forward: input width");
  c.z.assign(z.begin(), z.end());
  c.pre1.resize(m.pred1.out);
  c.h1.resize(m.pred1.out);
  affine(m.params, m.pred1, c.z.data(), c.pre1.data());
  for (std::size_t i = 0; i < c.h1.size(); ++i) c.h1[i] = relu(c.pre1[i]);
  affine(m.params, m.pred2, c.h1.data(), &c.logit);
  c.score = sigmoid(c.logit);
}

void predictor_backward(const Model& m, const PredictorCache& c, double dscore, std::span<double> grad,
                        std::span<double> dz) {
  check_grad_size(m, grad);
  if (dz.size() != m.pred1.in) throw ShapeMismatch("predictor_backward: dz width");
  const double dlogit = dscore * c.score * (1.0 - c.score);
  std::vector<double> dh(m.pred1.out, 0.0);
  affine_back(m.params, m.pred2, c.h1.data(), &dlogit, grad.data(), dh.data());
  for (std::size_t i = 0; i < dh.size(); ++i)
    if (c.pre1[i] <= 0.0) dh[i] = 0.0;
  affine_back(m.params, m.pred1, c.z.data(), dh.data(), grad.data(), dz.data());
}

// -- whole model ------------------------------------------------------------

Example make_example(const ModelConfig& cfg, const LabeledCloud& cloud, const Vec3& robot, std::size_t point,
                     double label) {
  Example ex;
  ex.cloud = &cloud;
  ex.robot = robot;
  ex.point = point;
  ex.label = label;
  if (!cfg.no_field) ex.scene_in = scene_inputs(cfg, cloud, robot, point);
  return ex;
}

void record_forward(const Model& m, const Example& ex, const CloudActivations& act, RecordCache& c) {
  const std::size_t f = m.cfg.feature;
  robot_forward(m, ex.robot, c.robot);
  target_forward(m, *ex.cloud, act, ex.point, c.target);
  std::vector<double> z(3 * f, 0.0);
  std::copy(c.robot.out.begin(), c.robot.out.end(), z.begin());
  std::copy(c.target.out.begin(), c.target.out.end(), z.begin() + static_cast<std::ptrdiff_t>(f));
  if (m.cfg.no_field) {
    c.scene.out.assign(f, 0.0);
  } else {
    scene_forward(m, ex.scene_in, c.scene);
    std::copy(c.scene.out.begin(), c.scene.out.end(), z.begin() + static_cast<std::ptrdiff_t>(2 * f));
  }
  predictor_forward(m, z, c.pred);
}

void record_backward(const Model& m, const Example& ex, const RecordCache& c, double dscore,
                     std::span<const double> dembed, std::span<double> grad) {
  const std::size_t f = m.cfg.feature;
  std::vector<double> dz(3 * f, 0.0);
  predictor_backward(m, c.pred, dscore, grad, dz);
  robot_backward(m, c.robot, std::span<const double>(dz).subspan(0, f), grad);
  target_backward(m, *ex.cloud, c.target, std::span<const double>(dz).subspan(f, f), grad);
  if (m.cfg.no_field) return;
  std::vector<double> ds(dz.begin() + static_cast<std::ptrdiff_t>(2 * f), dz.end());
  if (!dembed.empty())
    for (std::size_t i = 0; i < f; ++i) ds[i] += dembed[i];
  scene_backward(m, ex.scene_in, c.scene, ds, grad);
}

double predict(const Model& m, const LabeledCloud& cloud, const Vec3& robot, std::size_t point) {
  const std::size_t idx[] = {point};
  return predict_points(m, cloud, robot, idx).front();
}

std::vector<double> predict_points(const Model& m, const LabeledCloud& cloud, const Vec3& robot,
                                   std::span<const std::size_t> points, kernels::Exec exec) {
  for (std::size_t p : points)
    if (p >= cloud.size()) throw ShapeMismatch("predict_points: point index out of range");
  const CloudActivations act = target_prepare(m, cloud, exec);
  std::vector<double> out(points.size());
  auto one = [&](std::size_t i) {
    Example ex = make_example(m.cfg, cloud, robot, points[i], 0.0);
    RecordCache c;
    record_forward(m, ex, act, c);
    out[i] = c.score();
  };
  if (exec == kernels::Exec::Serial) {
    for (std::size_t i = 0; i < points.size(); ++i) one(i);
  } else {
    const auto n = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t i = 0; i < n; ++i) one(static_cast<std::size_t>(i));
  }
  return out;
}

std::vector<double> scene_embedding(const Model& m, const LabeledCloud& cloud, const Vec3& robot, std::size_t point) {
  if (m.cfg.no_field) return std::vector<double>(m.cfg.feature, 0.0);
  SceneCache c;
  scene_forward(m, scene_inputs(m.cfg, cloud, robot, point), c);
  return c.out;
}

// -- losses -----------------------------------------------------------------

double triplet_loss(std::span<const double> a, std::span<const double> p, std::span<const double> n, double alpha) {
  if (a.size() != p.size() || a.size() != n.size()) throw ShapeMismatch("triplet_loss: embedding widths differ");
  double dp = 0.0, dn = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dp += (a[i] - p[i]) * (a[i] - p[i]);
    dn += (a[i] - n[i]) * (a[i] - n[i]);
  }
  return std::max(0.0, dp - dn + alpha);
}

double affordance_loss(double pred, double label) { return std::abs(pred - label); }

LossParts batch_loss(const Model& m, std::span<const TripletExample> batch, const LossWeights& w,
                     std::span<double> grad) {
  if (batch.empty()) throw InvalidArgument("batch_loss: empty batch");
  const bool want_grad = !grad.empty();
  if (want_grad) {
    check_grad_size(m, grad);
    std::fill(grad.begin(), grad.end(), 0.0);
  }
  // Target-independent activations are shared by records on the same cloud.
  std::map<const LabeledCloud*, CloudActivations> acts;
  auto act_of = [&](const Example& ex) -> const CloudActivations& {
    auto it = acts.find(ex.cloud);
    if (it == acts.end()) it = acts.emplace(ex.cloud, target_prepare(m, *ex.cloud)).first;
    return it->second;
  };

  const double n_rec = 3.0 * static_cast<double>(batch.size());
  const double n_trip = static_cast<double>(batch.size());
  double class_w[2] = {1.0, 1.0};
  if (w.balance_classes) {
    double pos = 0.0;
    for (const auto& t : batch)
      for (const Example* e : {&t.anchor, &t.positive, &t.negative}) pos += e->label > 0.5 ? 1.0 : 0.0;
    if (pos > 0.0 && pos < n_rec) {
      class_w[0] = n_rec / (2.0 * (n_rec - pos));
      class_w[1] = n_rec / (2.0 * pos);
    }
  }
  LossParts parts;
  const std::size_t f = m.cfg.feature;
  for (const auto& t : batch) {
    const Example* ex[3] = {&t.anchor, &t.positive, &t.negative};
    RecordCache c[3];
    for (int r = 0; r < 3; ++r) record_forward(m, *ex[r], act_of(*ex[r]), c[r]);
    double dscore[3];
    for (int r = 0; r < 3; ++r) {
      const double cw = class_w[ex[r]->label > 0.5 ? 1 : 0] / n_rec;
      parts.affordance += cw * affordance_loss(c[r].score(), ex[r]->label);
      const double diff = c[r].score() - ex[r]->label;
      dscore[r] = (diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0)) * cw;
    }
    const auto ea = c[0].embedding(), ep = c[1].embedding(), en = c[2].embedding();
    const double hinge = triplet_loss(ea, ep, en, w.alpha);
    parts.contrastive += hinge / n_trip;
    if (!want_grad) continue;

    std::vector<double> de[3];
    if (hinge > 0.0 && w.lambda_cl != 0.0 && !m.cfg.no_field) {
      const double s = 2.0 * w.lambda_cl / n_trip;
      for (auto& v : de) v.assign(f, 0.0);
      for (std::size_t i = 0; i < f; ++i) {
        de[0][i] = s * (en[i] - ep[i]);
        de[1][i] = -s * (ea[i] - ep[i]);
        de[2][i] = s * (ea[i] - en[i]);
      }
    }
    for (int r = 0; r < 3; ++r) record_backward(m, *ex[r], c[r], dscore[r], de[r], grad);
  }
  parts.total = parts.affordance + w.lambda_cl * parts.contrastive;
  return parts;
}

// -- optimizer ---------------------------------------------------------------

void adam_step(std::vector<double>& params, AdamState& st, std::span<const double> grad, const AdamConfig& cfg) {
  if (grad.size() != params.size()) throw ShapeMismatch("adam_step: gradient size");
  for (std::size_t i = 0; i < grad.size(); ++i)
    if (!std::isfinite(grad[i])) throw NonFiniteGradient("non-finite gradient at parameter " + std::to_string(i));
  if (st.m.empty()) {
    st.m.assign(params.size(), 0.0);
    st.v.assign(params.size(), 0.0);
  }
  ++st.t;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    st.m[i] = cfg.beta1 * st.m[i] + (1.0 - cfg.beta1) * grad[i];
    st.v[i] = cfg.beta2 * st.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
    params[i] -= cfg.lr * (st.m[i] / c1) / (std::sqrt(st.v[i] / c2) + cfg.eps);
  }
}

// -- gradient checking -------------------------------------------------------

GradCheck check_gradient(const std::function<double(std::span<const double>)>& f, std::vector<double> x,
                         std::span<const double> analytic, std::span<const std::size_t> coords, double h,
                         double floor, double kink_tol) {
  GradCheck out;
  const double f0 = f(x);
  auto rel = [floor](double num, double a) {
    return std::abs(num - a) / std::max({std::abs(num), std::abs(a), floor});
  };
  for (std::size_t i : coords) {
    const double saved = x[i];
    x[i] = saved + h;
    const double fp = f(x);
    x[i] = saved - h;
    const double fm = f(x);
    x[i] = saved;
    double err = rel((fp - fm) / (2.0 * h), analytic[i]);
    const double fwd = (fp - f0) / h, bwd = (f0 - fm) / h;
    if (rel(fwd, bwd) > kink_tol) {
      err = std::min({err, rel(fwd, analytic[i]), rel(bwd, analytic[i])});
      ++out.kinks;
    }
    if (err > out.max_rel_error) {
      out.max_rel_error = err;
      out.worst = i;
    }
    ++out.checked;
  }
  return out;
}

}  // namespace envaff
