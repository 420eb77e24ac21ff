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

#ifndef AMI_RNG_HPP_
#define AMI_RNG_HPP_

#include <cstdint>
#include <vector>

namespace ami {

// Splittable counter-based stream in the SplittableRandom style: the state
// walks by a stream-specific odd increment and every output is a strong
// 64-bit mix of the state. Any (master_seed, stream_id) pair can be opened
// in O(1), so per-trial streams are derivable without sequential skipping,
// and results are schedule-independent under parallel execution.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  // Derives an independent child stream. Children with distinct ids are
  // statistically independent of each other and of the parent's own draws.
  RngStream substream(std::uint64_t child_id) const;

  std::uint64_t next_u64();

  // Uniform on (0, 1]; the half-open side is chosen so bernoulli(0) and
  // bernoulli(1) are exact and log(uniform01()) is finite.
  double uniform01();

  double standard_normal();

  bool bernoulli(double p);

  // Uniform index in [0, n); n >= 1.
  std::size_t uniform_index(std::size_t n);

  // Index drawn proportionally to non-negative weights with positive sum.
  std::size_t categorical(const std::vector<double>& weights);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::uint64_t state_;
  std::uint64_t gamma_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace ami

#endif  // AMI_RNG_HPP_
