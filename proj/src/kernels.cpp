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

#include "envaff/kernels.hpp"

#include <omp.h>

#include <limits>

#include "envaff/error.hpp"

namespace envaff::kernels {

void field_values_serial(std::span<const Vec3> points, const Vec3& robot, const Vec3& target, std::span<Vec3> out) {
  if (out.size() != points.size()) throw ShapeMismatch("field_values: output size");
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = cross(points[i] - robot, points[i] - target);
}

void field_values_omp(std::span<const Vec3> points, const Vec3& robot, const Vec3& target, std::span<Vec3> out) {
  if (out.size() != points.size()) throw ShapeMismatch("field_values: output size");
  const auto n = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    out[u] = cross(points[u] - robot, points[u] - target);
  }
}

namespace {

void check_fps_args(std::span<const Vec3> points, std::size_t k, std::size_t first) {
  if (k > points.size()) throw InvalidArgument("fps: k exceeds point count");
  if (k > 0 && first >= points.size()) throw InvalidArgument("fps: first index out of range");
}

}  // namespace

std::vector<std::size_t> fps_serial(std::span<const Vec3> points, std::size_t k, std::size_t first) {
  check_fps_args(points, k, first);
  std::vector<std::size_t> picked;
  if (k == 0) return picked;
  picked.reserve(k);
  std::vector<double> dist(points.size(), std::numeric_limits<double>::infinity());
  std::size_t last = first;
  picked.push_back(last);
  while (picked.size() < k) {
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double d = norm_sq(points[i] - points[last]);
      if (d < dist[i]) dist[i] = d;
      if (dist[i] > best_d) {
        best_d = dist[i];
        best = i;
      }
    }
    last = best;
    picked.push_back(last);
  }
  return picked;
}

std::vector<std::size_t> fps_omp(std::span<const Vec3> points, std::size_t k, std::size_t first) {
  check_fps_args(points, k, first);
  std::vector<std::size_t> picked;
  if (k == 0) return picked;
  picked.reserve(k);
  std::vector<double> dist(points.size(), std::numeric_limits<double>::infinity());
  const auto n = static_cast<std::ptrdiff_t>(points.size());
  std::size_t last = first;
  picked.push_back(last);
  while (picked.size() < k) {
    std::size_t best = 0;
    double best_d = -1.0;
#pragma omp parallel
    {
      std::size_t local_best = 0;
      double local_d = -1.0;
#pragma omp for schedule(static) nowait
      for (std::ptrdiff_t s = 0; s < n; ++s) {
        const auto i = static_cast<std::size_t>(s);
        const double d = norm_sq(points[i] - points[last]);
        if (d < dist[i]) dist[i] = d;
        if (dist[i] > local_d) {
          local_d = dist[i];
          local_best = i;
        }
      }
#pragma omp critical(envaff_fps_argmax)
      {
        if (local_d > best_d || (local_d == best_d && local_best < best)) {
          best_d = local_d;
          best = local_best;
        }
      }
    }
    last = best;
    picked.push_back(last);
  }
  return picked;
}

namespace {

void check_dense_args(std::span<const double> in, std::size_t rows, std::size_t in_dim,
                      std::span<const double> weight, std::span<const double> bias, std::size_t out_dim,
                      std::span<double> out) {
  if (in.size() != rows * in_dim || weight.size() != out_dim * in_dim || bias.size() != out_dim ||
      out.size() != rows * out_dim)
    throw ShapeMismatch("dense_rows: inconsistent shapes");
}

inline void dense_row(const double* x, std::size_t in_dim, const double* w, const double* b, std::size_t out_dim,
                      double* y) {
  for (std::size_t o = 0; o < out_dim; ++o) {
    const double* wo = w + o * in_dim;
    double acc = b[o];
    for (std::size_t i = 0; i < in_dim; ++i) acc += wo[i] * x[i];
    y[o] = acc;
  }
}

}  // namespace

void dense_rows_serial(std::span<const double> in, std::size_t rows, std::size_t in_dim,
                       std::span<const double> weight, std::span<const double> bias, std::size_t out_dim,
                       std::span<double> out) {
  check_dense_args(in, rows, in_dim, weight, bias, out_dim, out);
  for (std::size_t r = 0; r < rows; ++r)
    dense_row(in.data() + r * in_dim, in_dim, weight.data(), bias.data(), out_dim, out.data() + r * out_dim);
}

void dense_rows_omp(std::span<const double> in, std::size_t rows, std::size_t in_dim,
                    std::span<const double> weight, std::span<const double> bias, std::size_t out_dim,
                    std::span<double> out) {
  check_dense_args(in, rows, in_dim, weight, bias, out_dim, out);
  const auto n = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t s = 0; s < n; ++s) {
    const auto r = static_cast<std::size_t>(s);
    dense_row(in.data() + r * in_dim, in_dim, weight.data(), bias.data(), out_dim, out.data() + r * out_dim);
  }
}

}  // namespace envaff::kernels
