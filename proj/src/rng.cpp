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

#include "ami/rng.hpp"

#include <cmath>

#include "ami/common.hpp"

namespace ami {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// stafford mix13 finalizer of splitmix64.
std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed), stream_id_(stream_id) {
  state_ = mix64(master_seed + kGolden * mix64(stream_id + kGolden));
  gamma_ = mix64(stream_id ^ mix64(master_seed + 0x6A09E667F3BCC909ULL)) | 1ULL;
}

RngStream RngStream::substream(std::uint64_t child_id) const {
  return RngStream(master_seed_,
                   mix64(stream_id_ + kGolden * (child_id + 1)) ^ child_id);
}

std::uint64_t RngStream::next_u64() {
  state_ += gamma_;
  return mix64(state_);
}

double RngStream::uniform01() {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double RngStream::standard_normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  double u1 = uniform01();
  double u2 = uniform01();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  cached_normal_ = r * std::sin(theta);
  has_cached_normal_ = true;
  return r * std::cos(theta);
}

bool RngStream::bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InvalidParamError("bernoulli: probability outside [0, 1]");
  }
  return uniform01() <= p;
}

std::size_t RngStream::uniform_index(std::size_t n) {
  if (n == 0) {
    throw InvalidParamError("uniform_index: empty range");
  }
  return static_cast<std::size_t>(
      (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

std::size_t RngStream::categorical(const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) {
      throw InvalidParamError("categorical: negative weight");
    }
    total += w;
  }
  if (!(total > 0.0)) {
    throw InvalidParamError("categorical: weights sum to zero");
  }
  double r = uniform01() * total;
  double cum = 0.0;
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    cum += weights[i];
    if (r <= cum) return i;
  }
  return weights.empty() ? 0 : weights.size() - 1;
}

}  // namespace ami
