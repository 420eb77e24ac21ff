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

#ifndef AMI_CLI_HPP_
#define AMI_CLI_HPP_

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ami/bounds.hpp"
#include "ami/game.hpp"

namespace ami {

// One [job] section of an experiment file: a base game configuration plus
// sweep lists. Empty sweep lists mean "use the base value once".
struct JobSpec {
  GameConfig base;
  std::vector<double> epsilons;
  std::vector<double> betas;       // effective attention temperatures
  std::vector<double> radii;       // sphere-noise budgets
  std::vector<int> d_x_list;
  bool with_bounds = true;
  long bound_trials = 100000;      // Monte Carlo budget for bound estimators
  int stat_samples = 200;          // protected-distribution stat samples
};

struct ExperimentSpec {
  std::vector<JobSpec> jobs;
  std::uint64_t master_seed = 0;
  std::string out = "-";
  int threads = 1;
};

// Command-line overrides applied on top of a parsed experiment file.
struct CliOverrides {
  std::optional<double> epsilon;
  std::optional<long> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
};

// Flat key-value experiment file with [job] section markers; global keys
// (seed, out, threads) precede the first section. Throws ParseError /
// InvalidParamError on malformed input or missing referenced files.
ExperimentSpec parse_experiment_spec(const std::string& path);

extern const char kRunCsvHeader[];
extern const char kSimulateBoundCsvHeader[];

// Runs every (job, sweep point), emitting one empirical CSV row each plus
// lower/upper bound rows when enabled. Returns the process exit code:
// 0 ok, 2 config error, 3 runtime error (partial rows are still flushed,
// tagged via the status column).
int cmd_run(const std::string& spec_path, const CliOverrides& overrides,
            std::ostream& log);

struct SimulateBoundSpec {
  DataKind data = DataKind::kOneHot;  // onehot or spherical
  std::vector<int> d_x_list;
  int n_x = 5;
  long n = 1;
  std::vector<double> r_eps_grid;
  double beta_eff = 10.0;
  long trials = 20000;  // per probability estimator
  int stat_samples = 200;
  std::uint64_t seed = 0;
  std::string out = "-";
  int threads = 1;
};

struct SimBoundRow {
  std::string data;
  int d_x;
  double r_eps;
  double advantage;
  double se;
};

// Attention-attack advantage lower bound on noisy data, one row per
// (d_x, r_eps) grid point. Deterministic in spec.seed.
std::vector<SimBoundRow> simulate_bound_rows(const SimulateBoundSpec& spec);

int cmd_simulate_bound(const SimulateBoundSpec& spec, std::ostream& log);

// Theorem-style attention advantage lower bound for a game configuration:
// estimates the protected-distribution statistics, the projection
// probability at threshold 1/(beta_eff * n_x * M^eps), and the box
// probability at half-width 3*delta_bar + beta_eff * m_max^2 * R^eps.
BoundEstimate attn_theorem_bound(const GameConfig& config, double beta_eff,
                                 long trials, int stat_samples,
                                 RngStream& stream);

}  // namespace ami

#endif  // AMI_CLI_HPP_
