// Copyright 2026 The ami-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef AMI_DATA_HPP_
#define AMI_DATA_HPP_

#include <string>
#include <utility>
#include <vector>

#include "ami/common.hpp"
#include "ami/rng.hpp"

namespace ami {

// A data point is a d_x x n_x matrix whose columns are patterns.
struct Dataset {
  std::vector<Matrix> points;

  int n() const { return static_cast<int>(points.size()); }
  int d_x() const { return points.empty() ? 0 : static_cast<int>(points[0].rows()); }
  int n_x() const { return points.empty() ? 0 : static_cast<int>(points[0].cols()); }
};

struct SeparationStats {
  double delta;  // min pattern separation; +inf when no point has >= 2 patterns
  double m;      // max pattern L2 norm
  double m_max;  // max distance of a pattern to its point's arithmetic mean
};

struct AlphabetStats {
  double delta_x;      // half the minimum pairwise L1 distance
  double cardinality;
};

// Exact equality on the 1e-9 quantization grid, so "X not in D" is
// well-defined on reals.
bool points_equal(const Matrix& a, const Matrix& b);

bool dataset_contains(const Dataset& d, const Matrix& x);

// Does any pattern (column) of any point equal the given pattern?
bool dataset_contains_pattern(const Dataset& d, const Vector& v);

// Patterns drawn uniformly i.i.d. from the d_x one-hot vectors; points are
// deduplicated by rejection.
Dataset gen_onehot(int d_x, int n_x, int n, RngStream& stream);

// Patterns drawn as normalized standard-normal vectors (uniform on the unit
// sphere).
Dataset gen_spherical(int d_x, int n_x, int n, RngStream& stream);

// Per-pattern separation delta_i = x_i'x_i - max_{j != i} x_i'x_j and the
// minimum over the point. Requires n_x >= 2.
std::pair<Vector, double> separation(const Matrix& x);

SeparationStats pattern_stats(const Dataset& d);

// Norm cap after adding noise of L2 budget r_eps: sqrt(m^2 + r_eps^2).
double m_with_noise(double m, double r_eps);

// Exhaustive statistics of an explicit small alphabet.
AlphabetStats alphabet_stats(const std::vector<Vector>& alphabet);

// Non-overlapping patch embedding: channels are H x W matrices, every
// patch x patch block is flattened (row-major within the patch,
// channel-major across channels) and mapped through w_embed, then shifted
// by its positional column.
Matrix patch_embed(const std::vector<Matrix>& channels, int patch,
                   const Matrix& w_embed, const Matrix& positions);

// Random embedding matrix scaled by 1/sqrt(fan_in).
Matrix random_w_embed(int fan_in, int d_x, RngStream& stream);

// CSV interchange, long format: header `point_id,pattern_id,f0..f{d-1}`,
// one row per pattern.
Dataset load_embeddings(const std::string& path);
void save_dataset(const Dataset& d, const std::string& path);

}  // namespace ami

#endif  // AMI_DATA_HPP_
