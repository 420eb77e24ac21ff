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

#ifndef AMI_BOUNDS_HPP_
#define AMI_BOUNDS_HPP_

#include <functional>
#include <string>
#include <utility>

#include "ami/common.hpp"
#include "ami/data.hpp"
#include "ami/ldp.hpp"
#include "ami/rng.hpp"

namespace ami {

struct BoundEstimate {
  std::string kind;       // fc_lower | fc_upper | fc_lower_grr | attn_lower
  double advantage;       // raw, may be negative
  double success_rate;    // (1 + advantage) / 2, clamped to [0, 1]
  double mc_std_error;    // 0 for closed forms
};

BoundEstimate make_bound(const std::string& kind, double advantage,
                         double mc_std_error);

// Advantage upper bound for any adversary against an eps-LDP mechanism:
// (e^eps - 1) / (e^eps + 1).
BoundEstimate fc_upper_bound(double epsilon);

// Advantage lower bound of the FC adversary:
// 1 - ((n + |X| - 1) / (|X| - 1)) * p_jump, where p_jump is the probability
// the mechanism pushes a point outside its own Delta^X ball.
BoundEstimate fc_lower_bound(double n, double cardinality, double p_jump,
                             double p_jump_se = 0.0);

// Closed form for GRR on a k-level alphabet: (e^eps - n) / (e^eps + k - 1).
BoundEstimate fc_lower_bound_grr(double epsilon, double n, double k);

// Monte Carlo estimate of p_jump = Pr[M(X) outside the L1 ball of radius
// delta_x around X], with X uniform over the mechanism's input alphabet
// (one-hot levels or per-feature grid levels, depending on config).
std::pair<double, double> estimate_p_jump(const MechanismConfig& config,
                                          int d_x, double delta_x, long trials,
                                          RngStream& stream);

// Retrieval-error scale: 2 m_eps (n_x - 1) exp(2/n_x - beta_eff * delta_eps).
double delta_bar(double m_eps, int n_x, double beta_eff, double delta_eps);

// Separation condition:
// delta_eps >= 2/(beta_eff n_x) + ln(2 (n_x - 1) n_x beta_eff m_eps^2)/beta_eff.
// Vacuously true at n_x = 1 (the log argument degenerates and delta_bar = 0).
bool check_separation_condition(double delta_eps, double beta_eff, int n_x,
                                double m_eps);

using PatternSampler = std::function<Vector(RngStream&)>;
using PatternPairSampler =
    std::function<std::pair<Vector, Vector>(RngStream&)>;

// Frequency of ||Proj_y(x)|| <= delta over sampled pattern pairs. Pairs are
// supplied by the sampler so discrete alphabets can draw distinct patterns
// (patterns of one data point never coincide with the fresh target).
std::pair<double, double> estimate_p_proj(const PatternPairSampler& pairs,
                                          double delta, long trials,
                                          RngStream& stream);

// Frequency of x inside the L-inf cube of half-width delta around mean.
std::pair<double, double> estimate_p_box(const PatternSampler& sampler,
                                         const Vector& mean, double delta,
                                         long trials, RngStream& stream);

// Half-width of the cube event: 3 delta_bar + beta_eff * m_max_eps^2 * r_eps.
double attn_box_half_width(double delta_bar_value, double beta_eff,
                           double m_max_eps, double r_eps);

// Attention advantage lower bound:
// p_proj + p_proj^(2 n n_x) - p_box - 1, with p_box already evaluated at the
// derived half-width.
BoundEstimate attn_lower_bound(double p_proj, double p_proj_se, double p_box,
                               double p_box_se, long n, int n_x);

}  // namespace ami

#endif  // AMI_BOUNDS_HPP_
