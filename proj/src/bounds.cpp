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

#include "ami/bounds.hpp"

#include <algorithm>
#include <cmath>

namespace ami {
namespace {

double binomial_se(double p, long trials) {
  return std::sqrt(std::max(p * (1.0 - p), 0.0) / trials);
}

}  // namespace

BoundEstimate make_bound(const std::string& kind, double advantage,
                         double mc_std_error) {
  BoundEstimate b;
  b.kind = kind;
  b.advantage = advantage;
  b.success_rate = std::clamp((1.0 + advantage) / 2.0, 0.0, 1.0);
  b.mc_std_error = mc_std_error;
  return b;
}

BoundEstimate fc_upper_bound(double epsilon) {
  if (!(epsilon >= 0.0)) throw InvalidParamError("fc_upper_bound: epsilon < 0");
  const double e = std::exp(epsilon);
  const double adv = std::isinf(e) ? 1.0 : (e - 1.0) / (e + 1.0);
  return make_bound("fc_upper", adv, 0.0);
}

BoundEstimate fc_lower_bound(double n, double cardinality, double p_jump,
                             double p_jump_se) {
  if (!(cardinality >= 2.0)) {
    throw InvalidParamError("fc_lower_bound: cardinality < 2");
  }
  if (!(p_jump >= 0.0 && p_jump <= 1.0)) {
    throw InvalidParamError("fc_lower_bound: p_jump outside [0, 1]");
  }
  const double factor =
      std::isinf(cardinality) ? 1.0
                              : (n + cardinality - 1.0) / (cardinality - 1.0);
  return make_bound("fc_lower", 1.0 - factor * p_jump, factor * p_jump_se);
}

BoundEstimate fc_lower_bound_grr(double epsilon, double n, double k) {
  if (!(k >= 2.0)) throw InvalidParamError("fc_lower_bound_grr: k < 2");
  if (!(n >= 1.0)) throw InvalidParamError("fc_lower_bound_grr: n < 1");
  const double e = std::exp(epsilon);
  const double adv = std::isinf(e) ? 1.0 : (e - n) / (e + k - 1.0);
  return make_bound("fc_lower_grr", adv, 0.0);
}

std::pair<double, double> estimate_p_jump(const MechanismConfig& config,
                                          int d_x, double delta_x, long trials,
                                          RngStream& stream) {
  if (trials < 1) throw InvalidParamError("estimate_p_jump: trials < 1");
  config.validate();
  long jumps = 0;
  for (long t = 0; t < trials; ++t) {
    RngStream trial = stream.substream(static_cast<std::uint64_t>(t));
    Vector x;
    if (config.alphabet == AlphabetMode::kPatternOneHot) {
      x = Vector::Zero(d_x);
      x(static_cast<EIndex>(trial.uniform_index(d_x))) = 1.0;
    } else {
      const BinaryCodec c = config.codec(d_x);
      x.resize(d_x);
      for (int i = 0; i < d_x; ++i) {
        x(i) = c.midpoint(
            static_cast<int>(trial.uniform_index(c.levels())));
      }
    }
    const Matrix out = perturb_datapoint(x, config, trial);
    if ((out.col(0) - x).cwiseAbs().sum() > delta_x) ++jumps;
  }
  const double p = static_cast<double>(jumps) / trials;
  return {p, binomial_se(p, trials)};
}

double delta_bar(double m_eps, int n_x, double beta_eff, double delta_eps) {
  if (n_x < 1) throw InvalidParamError("delta_bar: n_x < 1");
  if (n_x == 1) return 0.0;
  return 2.0 * m_eps * (n_x - 1) *
         std::exp(2.0 / n_x - beta_eff * delta_eps);
}

bool check_separation_condition(double delta_eps, double beta_eff, int n_x,
                                double m_eps) {
  if (n_x < 1) throw InvalidParamError("check_separation_condition: n_x < 1");
  if (n_x == 1) return true;
  const double rhs =
      2.0 / (beta_eff * n_x) +
      std::log(2.0 * (n_x - 1) * n_x * beta_eff * m_eps * m_eps) / beta_eff;
  return delta_eps >= rhs;
}

std::pair<double, double> estimate_p_proj(const PatternPairSampler& pairs,
                                          double delta, long trials,
                                          RngStream& stream) {
  if (trials < 1) throw InvalidParamError("estimate_p_proj: trials < 1");
  if (!(delta >= 0.0)) throw InvalidParamError("estimate_p_proj: delta < 0");
  long hits = 0;
  for (long t = 0; t < trials; ++t) {
    RngStream trial = stream.substream(static_cast<std::uint64_t>(t));
    const auto [x, y] = pairs(trial);
    const double ny = y.norm();
    const double proj = ny == 0.0 ? 0.0 : std::abs(x.dot(y)) / ny;
    if (proj <= delta) ++hits;
  }
  const double p = static_cast<double>(hits) / trials;
  return {p, binomial_se(p, trials)};
}

std::pair<double, double> estimate_p_box(const PatternSampler& sampler,
                                         const Vector& mean, double delta,
                                         long trials, RngStream& stream) {
  if (trials < 1) throw InvalidParamError("estimate_p_box: trials < 1");
  if (!(delta >= 0.0)) throw InvalidParamError("estimate_p_box: delta < 0");
  long hits = 0;
  for (long t = 0; t < trials; ++t) {
    RngStream trial = stream.substream(static_cast<std::uint64_t>(t));
    const Vector x = sampler(trial);
    if ((x - mean).cwiseAbs().maxCoeff() <= delta) ++hits;
  }
  const double p = static_cast<double>(hits) / trials;
  return {p, binomial_se(p, trials)};
}

double attn_box_half_width(double delta_bar_value, double beta_eff,
                           double m_max_eps, double r_eps) {
  return 3.0 * delta_bar_value + beta_eff * m_max_eps * m_max_eps * r_eps;
}

BoundEstimate attn_lower_bound(double p_proj, double p_proj_se, double p_box,
                               double p_box_se, long n, int n_x) {
  if (!(p_proj >= 0.0 && p_proj <= 1.0) || !(p_box >= 0.0 && p_box <= 1.0)) {
    throw InvalidParamError("attn_lower_bound: probabilities outside [0, 1]");
  }
  if (n < 1 || n_x < 1) throw InvalidParamError("attn_lower_bound: n, n_x < 1");
  const double power = 2.0 * static_cast<double>(n) * n_x;
  const double adv = p_proj + std::pow(p_proj, power) - p_box - 1.0;
  // First-order error propagation through the power term.
  const double d_proj =
      1.0 + (p_proj > 0.0 ? power * std::pow(p_proj, power - 1.0) : 0.0);
  const double se =
      std::sqrt(d_proj * d_proj * p_proj_se * p_proj_se + p_box_se * p_box_se);
  return make_bound("attn_lower", adv, se);
}

}  // namespace ami
