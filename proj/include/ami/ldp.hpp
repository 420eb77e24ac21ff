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

#ifndef AMI_LDP_HPP_
#define AMI_LDP_HPP_

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ami/common.hpp"
#include "ami/rng.hpp"

namespace ami {

enum class MechanismKind {
  kIdentity,
  kGrr,
  kRappor,
  kDBitFlipPm,
  kBitRand,
  kOme,
  // Additive noise with a hard L2 budget (uniform direction, exact norm).
  // Not an LDP mechanism; used for noise-budget experiments.
  kSphereNoise,
};

std::string mechanism_name(MechanismKind kind);
MechanismKind mechanism_from_name(const std::string& name);

// How a mechanism sees a pattern: a single categorical symbol drawn from the
// one-hot alphabet of its dimension, or a vector of independently quantized
// features.
enum class AlphabetMode { kPatternOneHot, kFeatureGrid };

// Fixed-point binary codec: r features, l bits each, uniform quantization of
// the clipping range into 2^l levels. Decoding returns level midpoints.
struct BinaryCodec {
  int features = 1;
  int bits_per_feature = 8;
  double v_min = -1.0;
  double v_max = 1.0;

  int levels() const { return 1 << bits_per_feature; }
  int quantize(double v) const;
  double midpoint(int level) const;
  // Bit layout: feature-major, least significant bit of the level index
  // first, so global bit i belongs to feature i / l at significance i % l.
  std::vector<std::uint8_t> encode(const Vector& x) const;
  Vector decode(const std::vector<std::uint8_t>& bits) const;

  void validate() const;
};

struct MechanismConfig {
  MechanismKind kind = MechanismKind::kIdentity;
  double epsilon = std::numeric_limits<double>::infinity();
  AlphabetMode alphabet = AlphabetMode::kPatternOneHot;
  double alpha = 1.0;
  int bits_per_feature = 8;
  double clip_min = -1.0;
  double clip_max = 1.0;
  // RAPPOR flip mass; derived from epsilon when unset.
  std::optional<double> rappor_f;
  // dBitFlipPM bucket draw count; 0 means all buckets.
  int dbit_d = 0;
  // Swaps the two per-bit response probabilities of the bit-aware flip rule
  // (the printed rule keeps 1-bits with a probability that decreases in
  // epsilon; this flag restores the conventional orientation).
  bool bitrand_invert = false;
  // SphereNoise L2 budget.
  double noise_radius = 0.0;

  BinaryCodec codec(int d_x) const;
  void validate() const;
};

// ---- Mechanism primitives ----

// Keeps the input level with probability e^eps / (e^eps + k - 1), else
// resamples uniformly among the other k - 1 levels.
std::size_t grr_perturb(std::size_t level, std::size_t k, double epsilon,
                        RngStream& stream);

double grr_keep_probability(std::size_t k, double epsilon);

// Permanent randomized response on a bit vector: each bit goes to 1 with
// probability f/2, to 0 with probability f/2, and is kept with 1 - f.
std::vector<std::uint8_t> rappor_perturb(const std::vector<std::uint8_t>& bits,
                                         double f, RngStream& stream);

// f such that eps = 2h ln((1 - f/2) / (f/2)) with h = 1 hash.
double rappor_f_from_epsilon(double epsilon);

struct DBitReport {
  std::vector<std::size_t> buckets;  // d draws without replacement
  std::vector<std::uint8_t> bits;    // response bit per drawn bucket
};

// Draws d of k buckets without replacement; a drawn bucket responds 1 with
// probability e^{eps/2}/(e^{eps/2}+1) when it holds the value, else with
// probability 1/(e^{eps/2}+1).
DBitReport dbitflip_perturb(std::size_t value, std::size_t k, std::size_t d,
                            double epsilon, RngStream& stream);

// Single-report decode: unreported buckets are imputed as 0-bits, bucket
// scores are debiased with the histogram rule at n = 1, and the value is the
// first argmax.
std::size_t dbitflip_decode(const DBitReport& report, std::size_t k,
                            double epsilon);

// Bit-aware flip rule on an r*l bit string. For global bit i the bit-position
// term is exp((i mod l)/l * eps); a 1-bit stays 1 with probability
// 1/(1 + alpha * term) and a 0-bit becomes 1 with the complementary mass
// alpha * term / (1 + alpha * term). `invert` swaps the two cases.
std::vector<std::uint8_t> bitrand_perturb(const std::vector<std::uint8_t>& bits,
                                          int l, double epsilon, double alpha,
                                          bool invert, RngStream& stream);

// Odd-even flip rule: even-position 1-bits stay 1 with alpha/(1+alpha),
// odd-position 1-bits with 1/(1+alpha^3), and 0-bits become 1 with
// 1/(1 + alpha * exp(eps / (r*l))).
std::vector<std::uint8_t> ome_perturb(const std::vector<std::uint8_t>& bits,
                                      int l, double epsilon, double alpha,
                                      RngStream& stream);

// ---- Data-point interface ----

// Applies the configured mechanism independently per pattern (column), using
// one substream per column so that permuting columns together with their
// substream indices permutes the outputs identically. epsilon = inf is the
// identity for every kind (unprotected baseline).
Matrix perturb_datapoint(const Matrix& x, const MechanismConfig& config,
                         RngStream& stream);

// Delta^X and cardinality of the mechanism's per-pattern output alphabet.
// Cardinality is a double and may overflow to infinity for wide grids.
struct PatternAlphabet {
  double delta_x;
  double cardinality;
};

PatternAlphabet output_alphabet(const MechanismConfig& config, int d_x);

}  // namespace ami

#endif  // AMI_LDP_HPP_
