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

#include "ami/attack_fc.hpp"

namespace ami {

FcAttackParams fc_craft(const Vector& target, double tau) {
  if (!(tau > 0.0)) throw InvalidParamError("fc_craft: tau must be positive");
  const EIndex d = target.size();
  if (d < 1) throw ShapeError("fc_craft: empty target");
  FcAttackParams p;
  p.w1 = Matrix::Zero(2 * d, d);
  p.w1.topRows(d) = Matrix::Identity(d, d);
  p.w1.bottomRows(d) = -Matrix::Identity(d, d);
  p.b1.resize(2 * d);
  p.b1.head(d) = -target;
  p.b1.tail(d) = target;
  p.w2_row = Vector::Constant(2 * d, -1.0);
  p.b2_1 = tau;
  p.target = target;
  return p;
}

double fc_forward_z0(const FcAttackParams& params, const Vector& x) {
  if (x.size() != params.target.size()) {
    throw ShapeError("fc_forward_z0: input dimension mismatch");
  }
  const Vector hidden = (params.w1 * x + params.b1).cwiseMax(0.0);
  const double pre = params.w2_row.dot(hidden) + params.b2_1;
  return pre > 0.0 ? pre : 0.0;
}

FcGradientReport fc_client_gradients(const FcAttackParams& params,
                                     const std::vector<Vector>& batch) {
  if (batch.empty()) throw InvalidParamError("fc_client_gradients: empty batch");
  int activated = 0;
  for (const Vector& x : batch) {
    if (fc_forward_z0(params, x) > 0.0) ++activated;
  }
  FcGradientReport r;
  r.activated_count = activated;
  r.batch_size = static_cast<int>(batch.size());
  r.grad_b2_1 = static_cast<double>(activated) / r.batch_size;
  return r;
}

int fc_guess(const FcGradientReport& report) {
  return report.grad_b2_1 != 0.0 ? 1 : 0;
}

double fc_select_tau(const AlphabetStats& stats) {
  if (!(stats.delta_x > 0.0)) {
    throw DegenerateError("fc_select_tau: alphabet has no positive Delta^X");
  }
  return stats.delta_x;
}

}  // namespace ami
