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

#ifndef AMI_COMMON_HPP_
#define AMI_COMMON_HPP_

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace ami {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using EIndex = Eigen::Index;

// Repo-wide numeric tolerances. Reconstruction-grade identities (QR,
// pseudo-inverse, projectors) use kReconstructTol; probability simplex
// checks use kSimplexTol; relative rank cutoffs use kRankTol.
inline constexpr double kReconstructTol = 1e-8;
inline constexpr double kOrthonormalTol = 1e-10;
inline constexpr double kSimplexTol = 1e-12;
inline constexpr double kRankTol = 1e-12;

// Grid used to decide exact equality of real-valued points ("X not in D"
// must be well-defined on reals).
inline constexpr double kDedupGrid = 1e-9;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A matrix that is supposed to be full rank is not (QR diagonal or Gram
// pivot under the relative cutoff). Callers that own randomness may retry.
class RankDeficientError : public Error {
 public:
  using Error::Error;
};

// Parameter outside its documented domain (probabilities, alphabet sizes,
// privacy budgets, tau, beta, ...).
class InvalidParamError : public Error {
 public:
  using Error::Error;
};

// Incompatible matrix/vector dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Degenerate statistical situation: singleton alphabets, single-pattern
// separation, empty conditional cells, identical calibration classes.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// Malformed input file; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, long line = 0)
      : Error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

}  // namespace ami

#endif  // AMI_COMMON_HPP_
