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

#include "ami/attack_attn.hpp"

#include <cmath>

#include "ami/bounds.hpp"
#include "ami/numerics.hpp"

namespace ami {
namespace {

constexpr int kCraftRetries = 16;

Matrix random_matrix(int rows, int cols, RngStream& stream) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = stream.standard_normal();
  }
  return m;
}

}  // namespace

AttnAttackParams attn_craft(const Vector& v, double beta, double gamma,
                            RngStream& stream) {
  const int d_x = static_cast<int>(v.size());
  if (d_x < 2) throw InvalidParamError("attn_craft: d_x < 2");
  if (!(beta > 0.0)) throw InvalidParamError("attn_craft: beta <= 0");
  if (!(gamma > 0.0)) throw InvalidParamError("attn_craft: gamma <= 0");
  if (!(v.norm() > 0.0)) throw InvalidParamError("attn_craft: zero target");

  AttnAttackParams p;
  p.beta = beta;
  p.beta_eff = beta / std::sqrt(static_cast<double>(d_x - 1));
  p.gamma = gamma;
  p.v = v;

  // Head 1: memorization mode restricted to the complement of v. Random
  // matrices can be rank deficient; re-randomize a bounded number of times.
  for (int attempt = 0;; ++attempt) {
    try {
      Matrix w = random_matrix(d_x, d_x, stream);
      w.col(0) = v;
      const auto qr = qr_factorize(w);
      p.w_q[0] = qr.q.rightCols(d_x - 1).transpose();
      p.w_k[0] = beta * pseudo_inverse(p.w_q[0]).transpose();
      break;
    } catch (const RankDeficientError&) {
      if (attempt + 1 >= kCraftRetries) throw;
    }
  }

  // Head 2: memorization mode on a random (d_x - 1)-dim subspace.
  for (int attempt = 0;; ++attempt) {
    try {
      p.w_q[1] = random_matrix(d_x - 1, d_x, stream);
      p.w_k[1] = beta * pseudo_inverse(p.w_q[1]).transpose();
      break;
    } catch (const RankDeficientError&) {
      if (attempt + 1 >= kCraftRetries) throw;
    }
  }

  p.w_o = Matrix::Zero(2 * d_x, 4 * d_x);
  p.w_o.block(0, 0, d_x, d_x) = Matrix::Identity(d_x, d_x);
  p.w_o.block(0, d_x, d_x, d_x) = -Matrix::Identity(d_x, d_x);
  p.w_o.block(d_x, 2 * d_x, d_x, d_x) = -Matrix::Identity(d_x, d_x);
  p.w_o.block(d_x, 3 * d_x, d_x, d_x) = Matrix::Identity(d_x, d_x);
  p.b_o = Vector::Constant(2 * d_x, -gamma);
  return p;
}

Matrix attn_head_forward(const AttnAttackParams& params, int h,
                         const Matrix& x_eps) {
  if (h < 0 || h > 3) throw InvalidParamError("attn_head_forward: head index");
  const EIndex d_x = params.v.size();
  if (x_eps.rows() != d_x) {
    throw ShapeError("attn_head_forward: pattern dimension mismatch");
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(d_x - 1));
  const Matrix scores = scale * (x_eps.transpose() *
                                 params.head_w_k(h).transpose() *
                                 (params.head_w_q(h) * x_eps));
  return x_eps * softmax_columns(scores);
}

Matrix attn_combined_forward(const AttnAttackParams& params,
                             const Matrix& x_eps) {
  const EIndex d_x = params.v.size();
  const EIndex n_x = x_eps.cols();
  Matrix stacked(4 * d_x, n_x);
  for (int h = 0; h < 4; ++h) {
    stacked.middleRows(h * d_x, d_x) = attn_head_forward(params, h, x_eps);
  }
  Matrix pre = params.w_o * stacked;
  pre.colwise() += params.b_o;
  return pre.cwiseMax(0.0);
}

Matrix attn_wo_gradient(const AttnAttackParams& params,
                        const std::vector<Matrix>& batch) {
  if (batch.empty()) {
    throw InvalidParamError("attn_wo_gradient: empty batch");
  }
  const EIndex d_x = params.v.size();
  Matrix grad = Matrix::Zero(2 * d_x, 4 * d_x);
  for (const Matrix& x : batch) {
    Matrix stacked(4 * d_x, x.cols());
    for (int h = 0; h < 4; ++h) {
      stacked.middleRows(h * d_x, d_x) = attn_head_forward(params, h, x);
    }
    Matrix pre = params.w_o * stacked;
    pre.colwise() += params.b_o;
    const Matrix mask = (pre.array() > 0.0).cast<double>();
    grad += mask * stacked.transpose();
  }
  return grad;
}

AttnGradientReport attn_client_gradients(const AttnAttackParams& params,
                                         const std::vector<Matrix>& batch) {
  if (batch.empty()) {
    throw InvalidParamError("attn_client_gradients: empty batch");
  }
  AttnGradientReport r{0.0, 0.0};
  const EIndex d_x = params.v.size();
  for (const Matrix& x : batch) {
    const Matrix z1 = attn_head_forward(params, 0, x);
    const Matrix z2 = attn_head_forward(params, 1, x);
    const double gap = (z1 - z2).cwiseAbs().maxCoeff();
    r.max_gap = std::max(r.max_gap, gap);
  }
  const Matrix grad = attn_wo_gradient(params, batch);
  r.grad_wo_inf = grad.cwiseAbs().maxCoeff();
  return r;
}

int attn_guess(const AttnGradientReport& report) {
  return report.grad_wo_inf > 0.0 ? 1 : 0;
}

AttnHyperparams attn_select_hyperparams(
    const SeparationStats& stats, int n_x, double r_eps, HyperMode mode,
    std::optional<double> beta_eff_override, double gamma_margin) {
  if (n_x < 1) throw InvalidParamError("attn_select_hyperparams: n_x < 1");
  const double m_eps = m_with_noise(stats.m, r_eps);

  if (mode == HyperMode::kDefault) {
    const double beta_eff = beta_eff_override.value_or(0.01);
    return {beta_eff, std::nan(""),
            check_separation_condition(stats.delta, beta_eff, n_x, m_eps)};
  }

  double beta_eff;
  if (beta_eff_override) {
    beta_eff = *beta_eff_override;
  } else {
    // Smallest feasible effective temperature on a log grid.
    bool found = false;
    beta_eff = 0.0;
    for (int i = 0; i <= 360; ++i) {
      const double candidate = std::pow(10.0, -3.0 + i * 0.025);
      if (check_separation_condition(stats.delta, candidate, n_x, m_eps)) {
        beta_eff = candidate;
        found = true;
        break;
      }
    }
    if (!found) {
      throw DegenerateError(
          "attn_select_hyperparams: no feasible beta on the search grid");
    }
  }
  const bool holds =
      check_separation_condition(stats.delta, beta_eff, n_x, m_eps);
  const double gamma =
      2.0 * delta_bar(m_eps, n_x, beta_eff, stats.delta) + gamma_margin;
  return {beta_eff, gamma, holds};
}

}  // namespace ami
