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

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ami/cli.hpp"

namespace {

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("AMI_LAB_SEED");
  if (v == nullptr) return std::nullopt;
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    std::cerr << "ignoring malformed AMI_LAB_SEED: " << v << "\n";
    return std::nullopt;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Membership-inference game and bound experiment runner"};
  app.require_subcommand(1);

  // run
  std::string spec_path;
  ami::CliOverrides overrides;
  double epsilon = 0.0;
  long trials = 0;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 0;
  CLI::App* run = app.add_subcommand("run", "Run an experiment spec file");
  run->add_option("spec", spec_path, "Experiment spec file")->required();
  CLI::Option* o_eps =
      run->add_option("--epsilon", epsilon, "Override every epsilon sweep");
  CLI::Option* o_trials =
      run->add_option("--trials", trials, "Override trial counts");
  CLI::Option* o_seed = run->add_option("--seed", seed, "Override master seed");
  CLI::Option* o_out =
      run->add_option("--out", out, "Output CSV path ('-' for stdout)");
  CLI::Option* o_threads =
      run->add_option("--threads", threads, "Worker thread cap");

  // simulate-bound
  ami::SimulateBoundSpec sim;
  std::string sim_data = "onehot";
  std::uint64_t sim_seed = 0;
  CLI::App* simulate = app.add_subcommand(
      "simulate-bound",
      "Monte Carlo attention advantage lower bound on noisy data");
  simulate->add_option("--data", sim_data, "onehot or spherical")
      ->check(CLI::IsMember({"onehot", "spherical"}));
  simulate->add_option("--d-x", sim.d_x_list, "Pattern dimensions")
      ->required()
      ->delimiter(',');
  simulate->add_option("--n-x", sim.n_x, "Patterns per point");
  simulate->add_option("--n", sim.n, "Dataset size");
  simulate->add_option("--r-eps", sim.r_eps_grid, "Noise budget grid")
      ->required()
      ->delimiter(',');
  simulate->add_option("--beta", sim.beta_eff, "Effective temperature");
  simulate->add_option("--trials", sim.trials, "Trials per estimator");
  simulate->add_option("--stat-samples", sim.stat_samples,
                       "Protected-distribution stat samples");
  CLI::Option* s_seed =
      simulate->add_option("--seed", sim_seed, "Master seed");
  simulate->add_option("--out", sim.out, "Output CSV path ('-' for stdout)");
  simulate->add_option("--threads", sim.threads, "Worker thread cap");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    if (o_eps->count()) overrides.epsilon = epsilon;
    if (o_trials->count()) overrides.trials = trials;
    if (o_seed->count()) {
      overrides.seed = seed;
    } else if (auto s = env_seed()) {
      overrides.seed = *s;
    }
    if (o_out->count()) overrides.out = out;
    if (o_threads->count()) overrides.threads = threads;
    return ami::cmd_run(spec_path, overrides, std::cerr);
  }

  sim.data = sim_data == "onehot" ? ami::DataKind::kOneHot
                                  : ami::DataKind::kSpherical;
  if (s_seed->count()) {
    sim.seed = sim_seed;
  } else if (auto s = env_seed()) {
    sim.seed = *s;
  }
  return ami::cmd_simulate_bound(sim, std::cerr);
}
