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

#ifndef AMI_ATTACK_ATTN_HPP_
#define AMI_ATTACK_ATTN_HPP_

#include <array>
#include <optional>
#include <vector>

#include "ami/common.hpp"
#include "ami/data.hpp"
#include "ami/rng.hpp"

namespace ami {

// Crafted four-head self-attention layer. Heads 1 and 2 are the two distinct
// filters (head 1 memorizes everything orthogonal to the target v, head 2 a
// random hyperplane); heads 3 and 4 are exact copies of 1 and 2, consumed by
// the lower half of the output combiner.
struct AttnAttackParams {
  std::array<Matrix, 2> w_q;  // (d_x - 1) x d_x
  std::array<Matrix, 2> w_k;  // (d_x - 1) x d_x, beta * pinv(w_q)'
  Matrix w_o;                 // 2d_x x 4d_x, [[I, -I, 0, 0], [0, 0, -I, I]]
  Vector b_o;                 // 2d_x, all -gamma
  double beta;                // raw scale baked into w_k
  double beta_eff;            // beta / sqrt(d_x - 1), the analysis quantity
  double gamma;
  Vector v;

  const Matrix& head_w_q(int h) const { return w_q[h % 2]; }
  const Matrix& head_w_k(int h) const { return w_k[h % 2]; }
};

struct AttnGradientReport {
  double grad_wo_inf;  // Linf norm of dL/dW_O
  double max_gap;      // max over batch and columns of ||z1 - z2||_inf
};

// beta here is the raw scale; the forward divides scores by sqrt(d_x - 1).
AttnAttackParams attn_craft(const Vector& v, double beta, double gamma,
                            RngStream& stream);

// Z^h = X softmax((X' W_k' W_q X) / sqrt(d_x - 1)) for head h in [0, 4).
Matrix attn_head_forward(const AttnAttackParams& params, int h,
                         const Matrix& x_eps);

// Y = ReLU(W_O stack(Z^1..Z^4) + b_O 1') =
// [max{0, Z1 - Z2 - gamma}; max{0, Z2 - Z1 - gamma}].
Matrix attn_combined_forward(const AttnAttackParams& params,
                             const Matrix& x_eps);

// Full dL/dW_O for loss = sum of all Y entries over the batch.
Matrix attn_wo_gradient(const AttnAttackParams& params,
                        const std::vector<Matrix>& batch);

AttnGradientReport attn_client_gradients(const AttnAttackParams& params,
                                         const std::vector<Matrix>& batch);

int attn_guess(const AttnGradientReport& report);

enum class HyperMode { kTheorem, kDefault };

struct AttnHyperparams {
  double beta_eff;
  // NaN in default mode: the caller calibrates gamma by simulation.
  double gamma;
  bool condition_holds;
};

// theorem mode: smallest beta_eff on a log grid satisfying the separation
// condition (or the provided override), gamma = 2 delta_bar + margin.
// default mode: beta_eff = 0.01 and gamma left to calibration.
AttnHyperparams attn_select_hyperparams(
    const SeparationStats& stats, int n_x, double r_eps, HyperMode mode,
    std::optional<double> beta_eff_override = std::nullopt,
    double gamma_margin = 1e-9);

}  // namespace ami

#endif  // AMI_ATTACK_ATTN_HPP_
