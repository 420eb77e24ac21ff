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

#ifndef AMI_NUMERICS_HPP_
#define AMI_NUMERICS_HPP_

#include <Eigen/Dense>
#include <cmath>

#include "ami/common.hpp"

namespace ami {

template <typename Scalar>
using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
struct QrFactors {
  Dense<Scalar> q;
  Dense<Scalar> r;
};

// Householder QR of a square full-rank matrix. Rank deficiency is flagged
// through the relative size of R's diagonal so callers can re-randomize.
template <typename Scalar>
QrFactors<Scalar> qr_factorize(const Dense<Scalar>& w) {
  if (w.rows() != w.cols()) {
    throw ShapeError("qr_factorize: matrix must be square");
  }
  Eigen::HouseholderQR<Dense<Scalar>> qr(w);
  QrFactors<Scalar> out;
  out.q = qr.householderQ() * Dense<Scalar>::Identity(w.rows(), w.cols());
  out.r = qr.matrixQR().template triangularView<Eigen::Upper>();
  const Scalar scale = w.cwiseAbs().maxCoeff();
  if (!(scale > Scalar(0))) {
    throw RankDeficientError("qr_factorize: zero matrix");
  }
  const Scalar cutoff = kRankTol * scale;
  for (EIndex i = 0; i < out.r.rows(); ++i) {
    if (std::abs(out.r(i, i)) < cutoff) {
      throw RankDeficientError("qr_factorize: R diagonal below cutoff");
    }
  }
  return out;
}

// Pseudo-inverse of a full-row-rank matrix via the Gram route
// A+ = A^T (A A^T)^-1, solved with a Householder QR of the Gram matrix.
template <typename Scalar>
Dense<Scalar> pseudo_inverse(const Dense<Scalar>& a) {
  if (a.rows() > a.cols()) {
    throw RankDeficientError("pseudo_inverse: more rows than columns");
  }
  const Dense<Scalar> gram = a * a.transpose();
  Eigen::HouseholderQR<Dense<Scalar>> qr(gram);
  const Dense<Scalar> r =
      qr.matrixQR().template triangularView<Eigen::Upper>();
  const Scalar scale = gram.cwiseAbs().maxCoeff();
  if (!(scale > Scalar(0))) {
    throw RankDeficientError("pseudo_inverse: zero matrix");
  }
  const Scalar cutoff = kRankTol * scale;
  for (EIndex i = 0; i < r.rows(); ++i) {
    if (std::abs(r(i, i)) < cutoff) {
      throw RankDeficientError("pseudo_inverse: Gram pivot below cutoff");
    }
  }
  // A+ = (G^-1 A)^T since the Gram matrix is symmetric.
  return qr.solve(a).transpose();
}

// Column-wise softmax with per-column max shift.
template <typename Scalar>
Dense<Scalar> softmax_columns(const Dense<Scalar>& logits) {
  Dense<Scalar> out(logits.rows(), logits.cols());
  for (EIndex j = 0; j < logits.cols(); ++j) {
    const Scalar shift = logits.col(j).maxCoeff();
    out.col(j) = (logits.col(j).array() - shift).exp();
    out.col(j) /= out.col(j).sum();
  }
  return out;
}

enum class NormKind { kL1, kL2, kLinf };

// Vector norms; for matrices L2 is Frobenius and Linf the largest
// absolute entry.
inline double norm(const Matrix& x, NormKind kind) {
  switch (kind) {
    case NormKind::kL1:
      return x.cwiseAbs().sum();
    case NormKind::kL2:
      return x.norm();
    case NormKind::kLinf:
      return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
  }
  throw InvalidParamError("norm: unknown kind");
}

}  // namespace ami

#endif  // AMI_NUMERICS_HPP_
