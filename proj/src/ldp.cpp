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

#include "ami/ldp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ami {
namespace {

bool is_inf(double x) { return std::isinf(x); }

Vector unit_vector(int d, std::size_t index) {
  Vector v = Vector::Zero(d);
  v(static_cast<EIndex>(index)) = 1.0;
  return v;
}

std::size_t argmax_index(const Vector& v) {
  EIndex i;
  v.maxCoeff(&i);
  return static_cast<std::size_t>(i);
}

}  // namespace

std::string mechanism_name(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::kIdentity:
      return "identity";
    case MechanismKind::kGrr:
      return "grr";
    case MechanismKind::kRappor:
      return "rappor";
    case MechanismKind::kDBitFlipPm:
      return "dbitflippm";
    case MechanismKind::kBitRand:
      return "bitrand";
    case MechanismKind::kOme:
      return "ome";
    case MechanismKind::kSphereNoise:
      return "sphere_noise";
  }
  throw InvalidParamError("mechanism_name: unknown kind");
}

MechanismKind mechanism_from_name(const std::string& name) {
  if (name == "identity") return MechanismKind::kIdentity;
  if (name == "grr") return MechanismKind::kGrr;
  if (name == "rappor") return MechanismKind::kRappor;
  if (name == "dbitflippm") return MechanismKind::kDBitFlipPm;
  if (name == "bitrand") return MechanismKind::kBitRand;
  if (name == "ome") return MechanismKind::kOme;
  if (name == "sphere_noise") return MechanismKind::kSphereNoise;
  throw InvalidParamError("unknown mechanism: " + name);
}

// ---- BinaryCodec ----

void BinaryCodec::validate() const {
  if (features < 1) throw InvalidParamError("codec: features < 1");
  if (bits_per_feature < 1 || bits_per_feature > 30) {
    throw InvalidParamError("codec: bits_per_feature out of range");
  }
  if (!(v_min < v_max)) throw InvalidParamError("codec: v_min >= v_max");
}

int BinaryCodec::quantize(double v) const {
  const double step = (v_max - v_min) / levels();
  const double clipped = std::clamp(v, v_min, v_max);
  int level = static_cast<int>(std::floor((clipped - v_min) / step));
  return std::clamp(level, 0, levels() - 1);
}

double BinaryCodec::midpoint(int level) const {
  const double step = (v_max - v_min) / levels();
  return v_min + (level + 0.5) * step;
}

std::vector<std::uint8_t> BinaryCodec::encode(const Vector& x) const {
  if (x.size() != features) throw ShapeError("codec encode: feature count");
  std::vector<std::uint8_t> bits(
      static_cast<std::size_t>(features) * bits_per_feature);
  for (int j = 0; j < features; ++j) {
    int level = quantize(x(j));
    for (int b = 0; b < bits_per_feature; ++b) {
      bits[static_cast<std::size_t>(j) * bits_per_feature + b] =
          static_cast<std::uint8_t>((level >> b) & 1);
    }
  }
  return bits;
}

Vector BinaryCodec::decode(const std::vector<std::uint8_t>& bits) const {
  if (bits.size() != static_cast<std::size_t>(features) * bits_per_feature) {
    throw ShapeError("codec decode: bit count");
  }
  Vector x(features);
  for (int j = 0; j < features; ++j) {
    int level = 0;
    for (int b = 0; b < bits_per_feature; ++b) {
      level |= bits[static_cast<std::size_t>(j) * bits_per_feature + b] << b;
    }
    x(j) = midpoint(level);
  }
  return x;
}

// ---- MechanismConfig ----

BinaryCodec MechanismConfig::codec(int d_x) const {
  BinaryCodec c;
  c.features = d_x;
  c.bits_per_feature = bits_per_feature;
  c.v_min = clip_min;
  c.v_max = clip_max;
  c.validate();
  return c;
}

void MechanismConfig::validate() const {
  if (!(epsilon >= 0.0)) throw InvalidParamError("mechanism: epsilon < 0");
  if (!(alpha > 0.0)) throw InvalidParamError("mechanism: alpha <= 0");
  if (rappor_f && !(*rappor_f >= 0.0 && *rappor_f <= 1.0)) {
    throw InvalidParamError("mechanism: rappor_f outside [0, 1]");
  }
  if (dbit_d < 0) throw InvalidParamError("mechanism: dbit_d < 0");
  if (!(noise_radius >= 0.0)) {
    throw InvalidParamError("mechanism: noise_radius < 0");
  }
  if (kind != MechanismKind::kIdentity && kind != MechanismKind::kGrr &&
      kind != MechanismKind::kSphereNoise) {
    BinaryCodec c;
    c.bits_per_feature = bits_per_feature;
    c.v_min = clip_min;
    c.v_max = clip_max;
    c.validate();
  }
}

// ---- Primitives ----

double grr_keep_probability(std::size_t k, double epsilon) {
  if (k < 2) throw InvalidParamError("grr: alphabet size k < 2");
  if (is_inf(epsilon)) return 1.0;
  const double e = std::exp(epsilon);
  return e / (e + static_cast<double>(k) - 1.0);
}

std::size_t grr_perturb(std::size_t level, std::size_t k, double epsilon,
                        RngStream& stream) {
  if (k < 2) throw InvalidParamError("grr: alphabet size k < 2");
  if (level >= k) throw InvalidParamError("grr: level out of range");
  if (is_inf(epsilon)) return level;
  if (stream.bernoulli(grr_keep_probability(k, epsilon))) return level;
  std::size_t other = stream.uniform_index(k - 1);
  return other >= level ? other + 1 : other;
}

double rappor_f_from_epsilon(double epsilon) {
  if (!(epsilon >= 0.0)) throw InvalidParamError("rappor: epsilon < 0");
  if (is_inf(epsilon)) return 0.0;
  return 2.0 / (std::exp(epsilon / 2.0) + 1.0);
}

std::vector<std::uint8_t> rappor_perturb(const std::vector<std::uint8_t>& bits,
                                         double f, RngStream& stream) {
  if (!(f >= 0.0 && f <= 1.0)) throw InvalidParamError("rappor: f not in [0,1]");
  std::vector<std::uint8_t> out(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const double u = stream.uniform01();
    if (u <= f / 2.0) {
      out[i] = 1;
    } else if (u <= f) {
      out[i] = 0;
    } else {
      out[i] = bits[i];
    }
  }
  return out;
}

DBitReport dbitflip_perturb(std::size_t value, std::size_t k, std::size_t d,
                            double epsilon, RngStream& stream) {
  if (k < 2) throw InvalidParamError("dbitflip: k < 2");
  if (d < 1 || d > k) throw InvalidParamError("dbitflip: d out of [1, k]");
  if (value >= k) throw InvalidParamError("dbitflip: value out of range");

  std::vector<std::size_t> pool(k);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  DBitReport report;
  report.buckets.reserve(d);
  report.bits.reserve(d);
  const double p_match =
      is_inf(epsilon) ? 1.0
                      : std::exp(epsilon / 2.0) / (std::exp(epsilon / 2.0) + 1.0);
  for (std::size_t i = 0; i < d; ++i) {
    const std::size_t pick = i + stream.uniform_index(k - i);
    std::swap(pool[i], pool[pick]);
    const std::size_t bucket = pool[i];
    const double p_one = bucket == value ? p_match : 1.0 - p_match;
    report.buckets.push_back(bucket);
    report.bits.push_back(stream.bernoulli(p_one) ? 1 : 0);
  }
  return report;
}

std::size_t dbitflip_decode(const DBitReport& report, std::size_t k,
                            double epsilon) {
  std::vector<double> score(k, 0.0);
  const std::size_t d = report.buckets.size();
  if (d == 0) throw InvalidParamError("dbitflip decode: empty report");
  for (std::size_t i = 0; i < d; ++i) {
    const double b = report.bits[i];
    double s;
    if (is_inf(epsilon)) {
      s = b;
    } else {
      const double e = std::exp(epsilon / 2.0);
      // Histogram debias rule applied to a single report (n = 1); the
      // unreported buckets keep the imputed-zero score of 0.
      s = (static_cast<double>(k) / static_cast<double>(d)) *
          (b * (e + 1.0) - 1.0) / (e - 1.0);
    }
    score[report.buckets[i]] = s;
  }
  return static_cast<std::size_t>(
      std::distance(score.begin(), std::max_element(score.begin(), score.end())));
}

std::vector<std::uint8_t> bitrand_perturb(const std::vector<std::uint8_t>& bits,
                                          int l, double epsilon, double alpha,
                                          bool invert, RngStream& stream) {
  if (!(alpha > 0.0)) throw InvalidParamError("bitrand: alpha <= 0");
  if (l < 1 || bits.size() % static_cast<std::size_t>(l) != 0) {
    throw InvalidParamError("bitrand: length not divisible by l");
  }
  std::vector<std::uint8_t> out(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const double frac = static_cast<double>(i % static_cast<std::size_t>(l)) / l;
    const double term = alpha * std::exp(frac * epsilon);
    double p_one_if_one, p_one_if_zero;
    if (std::isinf(term)) {
      p_one_if_one = 0.0;
      p_one_if_zero = 1.0;
    } else {
      p_one_if_one = 1.0 / (1.0 + term);
      p_one_if_zero = term / (1.0 + term);
    }
    if (invert) std::swap(p_one_if_one, p_one_if_zero);
    out[i] = stream.bernoulli(bits[i] ? p_one_if_one : p_one_if_zero) ? 1 : 0;
  }
  return out;
}

std::vector<std::uint8_t> ome_perturb(const std::vector<std::uint8_t>& bits,
                                      int l, double epsilon, double alpha,
                                      RngStream& stream) {
  if (!(alpha > 0.0)) throw InvalidParamError("ome: alpha <= 0");
  if (l < 1 || bits.size() % static_cast<std::size_t>(l) != 0) {
    throw InvalidParamError("ome: length not divisible by l");
  }
  const double total_bits = static_cast<double>(bits.size());
  const double zero_term = alpha * std::exp(epsilon / total_bits);
  const double p_zero_to_one =
      std::isinf(zero_term) ? 0.0 : 1.0 / (1.0 + zero_term);
  std::vector<std::uint8_t> out(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    double p_one;
    if (bits[i]) {
      p_one = (i % 2 == 0) ? alpha / (1.0 + alpha)
                           : 1.0 / (1.0 + alpha * alpha * alpha);
    } else {
      p_one = p_zero_to_one;
    }
    out[i] = stream.bernoulli(p_one) ? 1 : 0;
  }
  return out;
}

// ---- Data-point interface ----

namespace {

Vector perturb_column(const Vector& col, const MechanismConfig& config,
                      RngStream& stream) {
  const int d_x = static_cast<int>(col.size());
  switch (config.kind) {
    case MechanismKind::kIdentity:
      return col;
    case MechanismKind::kSphereNoise: {
      if (config.noise_radius == 0.0) return col;
      Vector g(d_x);
      for (int i = 0; i < d_x; ++i) g(i) = stream.standard_normal();
      const double n = g.norm();
      if (n == 0.0) return col;
      return col + (config.noise_radius / n) * g;
    }
    case MechanismKind::kGrr: {
      if (config.alphabet == AlphabetMode::kPatternOneHot) {
        const std::size_t level = argmax_index(col);
        const std::size_t out =
            grr_perturb(level, static_cast<std::size_t>(d_x), config.epsilon,
                        stream);
        return unit_vector(d_x, out);
      }
      const BinaryCodec c = config.codec(d_x);
      Vector out(d_x);
      for (int j = 0; j < d_x; ++j) {
        const std::size_t level = static_cast<std::size_t>(c.quantize(col(j)));
        out(j) = c.midpoint(static_cast<int>(grr_perturb(
            level, static_cast<std::size_t>(c.levels()), config.epsilon,
            stream)));
      }
      return out;
    }
    case MechanismKind::kRappor: {
      const double f = config.rappor_f.value_or(
          rappor_f_from_epsilon(config.epsilon));
      if (config.alphabet == AlphabetMode::kPatternOneHot) {
        std::vector<std::uint8_t> bits(d_x);
        for (int j = 0; j < d_x; ++j) bits[j] = col(j) > 0.5 ? 1 : 0;
        const auto out_bits = rappor_perturb(bits, f, stream);
        Vector out(d_x);
        for (int j = 0; j < d_x; ++j) out(j) = out_bits[j];
        return out;
      }
      const BinaryCodec c = config.codec(d_x);
      return c.decode(rappor_perturb(c.encode(col), f, stream));
    }
    case MechanismKind::kDBitFlipPm: {
      const std::size_t k = config.alphabet == AlphabetMode::kPatternOneHot
                                ? static_cast<std::size_t>(d_x)
                                : static_cast<std::size_t>(1)
                                      << config.bits_per_feature;
      const std::size_t d =
          config.dbit_d == 0 ? k : static_cast<std::size_t>(config.dbit_d);
      if (config.alphabet == AlphabetMode::kPatternOneHot) {
        const auto report =
            dbitflip_perturb(argmax_index(col), k, d, config.epsilon, stream);
        return unit_vector(d_x, dbitflip_decode(report, k, config.epsilon));
      }
      const BinaryCodec c = config.codec(d_x);
      Vector out(d_x);
      for (int j = 0; j < d_x; ++j) {
        const auto report = dbitflip_perturb(
            static_cast<std::size_t>(c.quantize(col(j))), k, d, config.epsilon,
            stream);
        out(j) = c.midpoint(
            static_cast<int>(dbitflip_decode(report, k, config.epsilon)));
      }
      return out;
    }
    case MechanismKind::kBitRand: {
      const BinaryCodec c = config.codec(d_x);
      return c.decode(bitrand_perturb(c.encode(col), c.bits_per_feature,
                                      config.epsilon, config.alpha,
                                      config.bitrand_invert, stream));
    }
    case MechanismKind::kOme: {
      const BinaryCodec c = config.codec(d_x);
      return c.decode(ome_perturb(c.encode(col), c.bits_per_feature,
                                  config.epsilon, config.alpha, stream));
    }
  }
  throw InvalidParamError("perturb: unknown mechanism kind");
}

}  // namespace

Matrix perturb_datapoint(const Matrix& x, const MechanismConfig& config,
                         RngStream& stream) {
  config.validate();
  if (config.kind == MechanismKind::kIdentity) return x;
  if (std::isinf(config.epsilon) &&
      config.kind != MechanismKind::kSphereNoise) {
    // Infinite budget means no protection for every mechanism, even those
    // whose printed per-bit rules do not degenerate to the identity.
    return x;
  }
  Matrix out(x.rows(), x.cols());
  for (EIndex j = 0; j < x.cols(); ++j) {
    RngStream col_stream = stream.substream(static_cast<std::uint64_t>(j));
    out.col(j) = perturb_column(x.col(j), config, col_stream);
  }
  return out;
}

PatternAlphabet output_alphabet(const MechanismConfig& config, int d_x) {
  if (d_x < 1) throw InvalidParamError("output_alphabet: d_x < 1");
  const bool onehot = config.alphabet == AlphabetMode::kPatternOneHot;
  const double grid_levels = std::pow(2.0, config.bits_per_feature);
  const double grid_step =
      (config.clip_max - config.clip_min) / grid_levels;
  const double grid_card = std::pow(grid_levels, d_x);
  switch (config.kind) {
    case MechanismKind::kIdentity:
    case MechanismKind::kGrr:
    case MechanismKind::kDBitFlipPm:
      if (onehot) return {1.0, static_cast<double>(d_x)};
      return {grid_step / 2.0, grid_card};
    case MechanismKind::kRappor:
      if (onehot) return {0.5, std::pow(2.0, d_x)};
      return {grid_step / 2.0, grid_card};
    case MechanismKind::kBitRand:
    case MechanismKind::kOme:
      return {grid_step / 2.0, grid_card};
    case MechanismKind::kSphereNoise:
      // Continuous output; no positive minimum distance exists.
      return {0.0, std::numeric_limits<double>::infinity()};
  }
  throw InvalidParamError("output_alphabet: unknown mechanism kind");
}

}  // namespace ami
