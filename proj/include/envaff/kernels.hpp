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

// Data-parallel inner loops. Each kernel has a serial reference and an OpenMP
// variant; the two produce bit-identical results for any thread count
// (per-element work is independent and reductions break ties by index).

#ifndef ENVAFF_KERNELS_HPP
#define ENVAFF_KERNELS_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "envaff/geometry.hpp"

namespace envaff::kernels {

enum class Exec { Serial, Parallel };

/// out[i] = (p_i − robot) × (p_i − target)
void field_values_serial(std::span<const Vec3> points, const Vec3& robot, const Vec3& target, std::span<Vec3> out);
void field_values_omp(std::span<const Vec3> points, const Vec3& robot, const Vec3& target, std::span<Vec3> out);

std::vector<std::size_t> fps_serial(std::span<const Vec3> points, std::size_t k, std::size_t first);
std::vector<std::size_t> fps_omp(std::span<const Vec3> points, std::size_t k, std::size_t first);

/// Row-wise affine map: out[r, o] = bias[o] + Σ_i weight[o, i] · in[r, i].
/// `weight` is row-major (out_dim × in_dim).
void dense_rows_serial(std::span<const double> in, std::size_t rows, std::size_t in_dim,
                       std::span<const double> weight, std::span<const double> bias, std::size_t out_dim,
                       std::span<double> out);
void dense_rows_omp(std::span<const double> in, std::size_t rows, std::size_t in_dim,
                    std::span<const double> weight, std::span<const double> bias, std::size_t out_dim,
                    std::span<double> out);

inline void field_values(std::span<const Vec3> points, const Vec3& robot, const Vec3& target, std::span<Vec3> out,
                         Exec exec = Exec::Parallel) {
  exec == Exec::Serial ? field_values_serial(points, robot, target, out)
                       : field_values_omp(points, robot, target, out);
}

inline std::vector<std::size_t> fps(std::span<const Vec3> points, std::size_t k, std::size_t first,
                                    Exec exec = Exec::Parallel) {
  return exec == Exec::Serial ? fps_serial(points, k, first) : fps_omp(points, k, first);
}

inline void dense_rows(std::span<const double> in, std::size_t rows, std::size_t in_dim,
                       std::span<const double> weight, std::span<const double> bias, std::size_t out_dim,
                       std::span<double> out, Exec exec = Exec::Parallel) {
  exec == Exec::Serial ? dense_rows_serial(in, rows, in_dim, weight, bias, out_dim, out)
                       : dense_rows_omp(in, rows, in_dim, weight, bias, out_dim, out);
}

}  // namespace envaff::kernels

#endif  // ENVAFF_KERNELS_HPP
