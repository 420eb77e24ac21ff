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

#ifndef AMI_ATTACK_FC_HPP_
#define AMI_ATTACK_FC_HPP_

#include <vector>

#include "ami/common.hpp"
#include "ami/data.hpp"

namespace ami {

// Crafted weights of the two fully-connected layers. The composition
// computes z0 = max{tau - ||X - T||_1, 0}, so the b2[1] gradient is the
// batch frequency of inputs within L1 distance tau of the target.
struct FcAttackParams {
  Matrix w1;       // 2d x d, stacked [I; -I]
  Vector b1;       // 2d, stacked [-T; T]
  Vector w2_row;   // 2d, all -1
  double b2_1;     // tau
  Vector target;
};

struct FcGradientReport {
  double grad_b2_1;      // activated_count / batch_size, an exact rational
  int activated_count;
  int batch_size;
};

FcAttackParams fc_craft(const Vector& target, double tau);

// The actual two-layer ReLU composition (not the closed form).
double fc_forward_z0(const FcAttackParams& params, const Vector& x);

// Client loss is the batch mean of z0, so dL/db2[1] is the activation
// frequency.
FcGradientReport fc_client_gradients(const FcAttackParams& params,
                                     const std::vector<Vector>& batch);

// 1 iff the b2[1] gradient is non-zero (exact test on the rational value).
int fc_guess(const FcGradientReport& report);

// Detection radius: tau = Delta^X of the (output) alphabet.
double fc_select_tau(const AlphabetStats& stats);

}  // namespace ami

#endif  // AMI_ATTACK_FC_HPP_
