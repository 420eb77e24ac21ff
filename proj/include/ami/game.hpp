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

#ifndef AMI_GAME_HPP_
#define AMI_GAME_HPP_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ami/attack_attn.hpp"
#include "ami/attack_fc.hpp"
#include "ami/data.hpp"
#include "ami/ldp.hpp"

namespace ami {

enum class AttackKind { kFc, kAttention };

enum class DataKind { kOneHot, kSpherical, kFile };

struct GameConfig {
  AttackKind attack = AttackKind::kFc;
  DataKind data = DataKind::kOneHot;
  std::string data_file;
  int d_x = 64;
  int n_x = 1;
  int n = 8;
  long trials = 1000;
  MechanismConfig mechanism;
  std::uint64_t master_seed = 0;
  HyperMode hyper_mode = HyperMode::kTheorem;
  std::optional<double> beta_eff;
  std::optional<double> gamma;
  double gamma_margin = 1e-9;
  long calibration_trials = 200;
  int threads = 1;
  bool keep_trials = false;

  void validate() const;
};

struct TrialRecord {
  int b;
  int b_prime;
  // FC: activation frequency; attention: max head-output gap.
  double diagnostic;
};

struct GameOutcome {
  long trials = 0;
  long n_pos = 0, n_neg = 0;
  long correct_pos = 0, correct_neg = 0;
  double tp_rate = 0, tn_rate = 0;
  double advantage = 0, success_rate = 0;
  double se = 0;  // binomial standard error of the success rate
  std::vector<TrialRecord> records;  // retained when keep_trials
};

// One-shot attack resolution shared by all trials of a game (Delta^X / tau
// for FC; beta and gamma for attention).
struct ResolvedAttack {
  double tau = 0.0;
  double beta_eff = 0.0;
  double beta_raw = 0.0;
  double gamma = 0.0;
  bool condition_holds = true;
  // Grid codec used to place targets on the mechanism's output alphabet;
  // unset when the alphabet is one-hot or continuous.
  std::optional<BinaryCodec> grid;
  std::shared_ptr<const Dataset> pool;  // file-backed data
};

ResolvedAttack resolve_attack(const GameConfig& config);

// Separation / norm statistics of the protected data distribution, used by
// theorem-mode hyperparameters. Separations are measured between patterns
// whose clean versions differ (a duplicated pattern retrieves its copy
// exactly, so it does not constrain the retrieval margin). r_eps is the
// 99.9% quantile of per-pattern noise L2 norms.
struct ProtectedStats {
  SeparationStats stats;  // delta of protected patterns, clean m, m_max
  double r_eps;
};

ProtectedStats estimate_protected_stats(const GameConfig& config, int samples,
                                        RngStream& stream);

// Draws one clean data point from the configured source (pool required for
// file-backed data).
Matrix sample_point(const GameConfig& config, RngStream& stream,
                    const Dataset* pool = nullptr);

TrialRecord run_trial(const GameConfig& config, const ResolvedAttack& attack,
                      long trial_index);

GameOutcome run_game(const GameConfig& config);

// Variant reusing an already-resolved attack (avoids repeating calibration
// when the caller also needs the resolved hyperparameters).
GameOutcome run_game(const GameConfig& config, const ResolvedAttack& attack);

GameOutcome aggregate_trials(const std::vector<TrialRecord>& records,
                             bool keep_records);

// Two-class threshold on calibration gap statistics: midpoint of the margin
// when the classes separate, otherwise the error-minimizing cut.
double gap_threshold(std::vector<double> positive, std::vector<double> negative);

// Simulates positive (v in D) and negative cases from the configured
// generator + mechanism and thresholds the resulting max_gap distributions.
double calibrate_gamma(const GameConfig& config, long calibration_trials,
                       RngStream& stream);

}  // namespace ami

#endif  // AMI_GAME_HPP_
