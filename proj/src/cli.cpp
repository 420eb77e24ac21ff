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

#include "ami/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace ami {
namespace {

constexpr std::uint64_t kBoundStream = 0xB111000000000000ULL;

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

[[noreturn]] void fail(int line, const std::string& message) {
  throw ParseError(message, line);
}

double to_double(const std::string& v, int line, const std::string& key) {
  if (v == "inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) fail(line, "trailing characters in " + key);
    return x;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    fail(line, "expected a number for " + key + ", got '" + v + "'");
  }
}

long to_long(const std::string& v, int line, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) fail(line, "trailing characters in " + key);
    return x;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    fail(line, "expected an integer for " + key + ", got '" + v + "'");
  }
}

bool to_bool(const std::string& v, int line, const std::string& key) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  fail(line, "expected a boolean for " + key + ", got '" + v + "'");
}

std::vector<double> to_double_list(const std::string& v, int line,
                                   const std::string& key) {
  std::vector<double> out;
  for (const std::string& item : split_list(v)) {
    out.push_back(to_double(item, line, key));
  }
  if (out.empty()) fail(line, "empty list for " + key);
  return out;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string sanitize(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return out;
}

std::string attack_name(AttackKind a) {
  return a == AttackKind::kFc ? "fc" : "attention";
}

void apply_job_key(JobSpec& job, const std::string& key,
                   const std::string& value, int line) {
  GameConfig& cfg = job.base;
  MechanismConfig& mech = cfg.mechanism;
  if (key == "attack") {
    if (value == "fc") {
      cfg.attack = AttackKind::kFc;
    } else if (value == "attention") {
      cfg.attack = AttackKind::kAttention;
    } else {
      fail(line, "unknown attack: " + value);
    }
  } else if (key == "data") {
    if (value == "onehot") {
      cfg.data = DataKind::kOneHot;
    } else if (value == "spherical") {
      cfg.data = DataKind::kSpherical;
    } else if (value == "file") {
      cfg.data = DataKind::kFile;
    } else {
      fail(line, "unknown data source: " + value);
    }
  } else if (key == "data_file") {
    if (!std::filesystem::exists(value)) {
      fail(line, "data_file does not exist: " + value);
    }
    cfg.data_file = value;
  } else if (key == "d_x") {
    for (double d : to_double_list(value, line, key)) {
      job.d_x_list.push_back(static_cast<int>(d));
    }
    cfg.d_x = job.d_x_list.front();
  } else if (key == "n_x") {
    cfg.n_x = static_cast<int>(to_long(value, line, key));
  } else if (key == "n") {
    cfg.n = static_cast<int>(to_long(value, line, key));
  } else if (key == "trials") {
    cfg.trials = to_long(value, line, key);
  } else if (key == "mechanism") {
    try {
      mech.kind = mechanism_from_name(value);
    } catch (const InvalidParamError& e) {
      fail(line, e.what());
    }
  } else if (key == "epsilon") {
    job.epsilons = to_double_list(value, line, key);
    mech.epsilon = job.epsilons.front();
  } else if (key == "alpha") {
    mech.alpha = to_double(value, line, key);
  } else if (key == "bits_per_feature") {
    mech.bits_per_feature = static_cast<int>(to_long(value, line, key));
  } else if (key == "clip_min") {
    mech.clip_min = to_double(value, line, key);
  } else if (key == "clip_max") {
    mech.clip_max = to_double(value, line, key);
  } else if (key == "rappor_f") {
    mech.rappor_f = to_double(value, line, key);
  } else if (key == "dbit_d") {
    mech.dbit_d = static_cast<int>(to_long(value, line, key));
  } else if (key == "bitrand_invert") {
    mech.bitrand_invert = to_bool(value, line, key);
  } else if (key == "noise_radius") {
    job.radii = to_double_list(value, line, key);
    mech.noise_radius = job.radii.front();
  } else if (key == "alphabet") {
    if (value == "onehot") {
      mech.alphabet = AlphabetMode::kPatternOneHot;
    } else if (value == "grid") {
      mech.alphabet = AlphabetMode::kFeatureGrid;
    } else {
      fail(line, "unknown alphabet: " + value);
    }
  } else if (key == "hyper_mode") {
    if (value == "theorem") {
      cfg.hyper_mode = HyperMode::kTheorem;
    } else if (value == "default") {
      cfg.hyper_mode = HyperMode::kDefault;
    } else {
      fail(line, "unknown hyper_mode: " + value);
    }
  } else if (key == "beta") {
    job.betas = to_double_list(value, line, key);
    cfg.beta_eff = job.betas.front();
  } else if (key == "gamma") {
    cfg.gamma = to_double(value, line, key);
  } else if (key == "gamma_margin") {
    cfg.gamma_margin = to_double(value, line, key);
  } else if (key == "calibration_trials") {
    cfg.calibration_trials = to_long(value, line, key);
  } else if (key == "bounds") {
    job.with_bounds = to_bool(value, line, key);
  } else if (key == "bound_trials") {
    job.bound_trials = to_long(value, line, key);
  } else if (key == "stat_samples") {
    job.stat_samples = static_cast<int>(to_long(value, line, key));
  } else {
    fail(line, "unknown job key: " + key);
  }
}

// One sweep point of a job, with the axes applied to a copy of the base
// configuration.
struct SweepPoint {
  GameConfig config;
  long bound_trials;
  int stat_samples;
  bool with_bounds;
};

std::vector<SweepPoint> expand_job(const JobSpec& job) {
  const std::vector<int> d_xs =
      job.d_x_list.empty() ? std::vector<int>{job.base.d_x} : job.d_x_list;
  const std::vector<double> radii =
      job.radii.empty() ? std::vector<double>{job.base.mechanism.noise_radius}
                        : job.radii;
  const std::vector<double> epsilons =
      job.epsilons.empty() ? std::vector<double>{job.base.mechanism.epsilon}
                           : job.epsilons;
  std::vector<SweepPoint> points;
  for (int d_x : d_xs) {
    for (std::size_t bi = 0; bi < std::max<std::size_t>(job.betas.size(), 1);
         ++bi) {
      for (double r : radii) {
        for (double eps : epsilons) {
          SweepPoint p{job.base, job.bound_trials, job.stat_samples,
                       job.with_bounds};
          p.config.d_x = d_x;
          if (!job.betas.empty()) p.config.beta_eff = job.betas[bi];
          p.config.mechanism.noise_radius = r;
          p.config.mechanism.epsilon = eps;
          points.push_back(std::move(p));
        }
      }
    }
  }
  return points;
}

struct OutputSink {
  std::ofstream file;
  std::ostream* stream = nullptr;

  bool open(const std::string& path, std::ostream& log) {
    if (path == "-") {
      stream = &std::cout;
      return true;
    }
    file.open(path);
    if (!file) {
      log << "cannot open output file: " << path << "\n";
      return false;
    }
    stream = &file;
    return true;
  }
  std::ostream& out() { return *stream; }
};

// Samples a clean point and its protected version with per-call substreams.
struct ProtectedSampler {
  const GameConfig& config;
  std::shared_ptr<const Dataset> pool;

  std::pair<Matrix, Matrix> draw(RngStream& stream, std::uint64_t which) const {
    RngStream sub = stream.substream(which);
    const Matrix clean = sample_point(config, sub, pool.get());
    RngStream mech = sub.substream(1);
    return {clean, perturb_datapoint(clean, config.mechanism, mech)};
  }
};

void write_row(std::ostream& out, const GameConfig& cfg, long trials,
               const std::string& success, const std::string& advantage,
               const std::string& se, const std::string& tp,
               const std::string& tn, const std::string& beta,
               const std::string& bound_kind, const std::string& status) {
  const bool sphere = cfg.mechanism.kind == MechanismKind::kSphereNoise;
  out << attack_name(cfg.attack) << ',' << mechanism_name(cfg.mechanism.kind)
      << ',' << fmt(cfg.mechanism.epsilon) << ',' << cfg.n << ',' << cfg.d_x
      << ',' << cfg.n_x << ',' << trials << ',' << success << ',' << advantage
      << ',' << se << ',' << tp << ',' << tn << ',' << cfg.master_seed << ','
      << beta << ',' << (sphere ? fmt(cfg.mechanism.noise_radius) : "") << ','
      << bound_kind << ',' << status << '\n';
}

void write_bound_row(std::ostream& out, const GameConfig& cfg, long trials,
                     const BoundEstimate& bound, const std::string& beta) {
  write_row(out, cfg, trials, fmt(bound.success_rate), fmt(bound.advantage),
            fmt(bound.mc_std_error), "", "", beta, bound.kind, "ok");
}

}  // namespace

const char kRunCsvHeader[] =
    "attack,mechanism,epsilon,n,d_x,n_x,trials,success_rate,advantage,se,"
    "tp_rate,tn_rate,seed,beta,r_eps,bound_kind,status";
const char kSimulateBoundCsvHeader[] = "data,d_x,r_eps,advantage,se";

ExperimentSpec parse_experiment_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open spec file: " + path, 0);
  ExperimentSpec spec;
  JobSpec* current = nullptr;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line == "[job]") {
      spec.jobs.emplace_back();
      current = &spec.jobs.back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(line_no, "expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      fail(line_no, "empty key or value");
    }
    if (current == nullptr) {
      if (key == "seed") {
        try {
          spec.master_seed = std::stoull(value);
        } catch (const std::exception&) {
          fail(line_no, "expected an unsigned integer for seed");
        }
      } else if (key == "out") {
        spec.out = value;
      } else if (key == "threads") {
        spec.threads = static_cast<int>(to_long(value, line_no, key));
      } else {
        fail(line_no, "unknown global key (before first [job]): " + key);
      }
      continue;
    }
    apply_job_key(*current, key, value, line_no);
  }
  if (spec.jobs.empty()) throw ParseError("no [job] section in spec", line_no);
  return spec;
}

BoundEstimate attn_theorem_bound(const GameConfig& config, double beta_eff,
                                 long trials, int stat_samples,
                                 RngStream& stream) {
  if (!(beta_eff > 0.0)) {
    throw InvalidParamError("attn_theorem_bound: beta_eff <= 0");
  }
  std::shared_ptr<const Dataset> pool;
  if (config.data == DataKind::kFile) {
    pool = std::make_shared<Dataset>(load_embeddings(config.data_file));
  }
  const ProtectedSampler sampler{config, pool};

  RngStream s_stats = stream.substream(0);
  const ProtectedStats ps =
      estimate_protected_stats(config, stat_samples, s_stats);
  const double m_eps = m_with_noise(ps.stats.m, ps.r_eps);
  const double bar = delta_bar(m_eps, config.n_x, beta_eff, ps.stats.delta);
  const double half =
      attn_box_half_width(bar, beta_eff, ps.stats.m_max, ps.r_eps);
  const double proj_delta = 1.0 / (beta_eff * config.n_x * m_eps);

  const PatternPairSampler pairs =
      [&sampler](RngStream& s) -> std::pair<Vector, Vector> {
    const auto a = sampler.draw(s, 0);
    for (std::uint64_t k = 1; k <= 64; ++k) {
      const auto b = sampler.draw(s, k);
      if (!points_equal(a.first.col(0), b.first.col(0))) {
        return {Vector(a.second.col(0)), Vector(b.second.col(0))};
      }
    }
    throw DegenerateError("attn_theorem_bound: cannot draw distinct patterns");
  };
  RngStream s_proj = stream.substream(1);
  const auto [p_proj, p_proj_se] =
      estimate_p_proj(pairs, proj_delta, trials, s_proj);

  // Box membership of an independent protected pattern relative to the
  // protected-pattern mean of another point.
  const PatternSampler box = [&sampler](RngStream& s) -> Vector {
    const auto a = sampler.draw(s, 0);
    const auto b = sampler.draw(s, 1);
    return Vector(b.second.col(0) - a.second.rowwise().mean());
  };
  RngStream s_box = stream.substream(2);
  const auto [p_box, p_box_se] = estimate_p_box(
      box, Vector::Zero(config.d_x), half, trials, s_box);

  return attn_lower_bound(p_proj, p_proj_se, p_box, p_box_se, config.n,
                          config.n_x);
}

namespace {

BoundEstimate lower_bound_for(const SweepPoint& point,
                              const ResolvedAttack& attack) {
  const GameConfig& cfg = point.config;
  RngStream stream(cfg.master_seed, kBoundStream);
  if (cfg.attack == AttackKind::kAttention) {
    const double beta =
        attack.beta_eff > 0.0 ? attack.beta_eff : cfg.beta_eff.value_or(0.01);
    return attn_theorem_bound(cfg, beta, point.bound_trials,
                              point.stat_samples, stream);
  }
  const MechanismConfig& mech = cfg.mechanism;
  if (mech.kind == MechanismKind::kGrr &&
      mech.alphabet == AlphabetMode::kPatternOneHot) {
    return fc_lower_bound_grr(mech.epsilon, cfg.n, cfg.d_x);
  }
  const PatternAlphabet pa = output_alphabet(mech, cfg.d_x);
  const auto [p_jump, se] =
      estimate_p_jump(mech, cfg.d_x, pa.delta_x, point.bound_trials, stream);
  return fc_lower_bound(cfg.n, pa.cardinality, p_jump, se);
}

}  // namespace

int cmd_run(const std::string& spec_path, const CliOverrides& overrides,
            std::ostream& log) {
  ExperimentSpec spec;
  std::vector<std::vector<SweepPoint>> job_points;
  try {
    spec = parse_experiment_spec(spec_path);
    if (overrides.seed) spec.master_seed = *overrides.seed;
    if (overrides.out) spec.out = *overrides.out;
    if (overrides.threads) spec.threads = *overrides.threads;
    for (std::size_t j = 0; j < spec.jobs.size(); ++j) {
      JobSpec& job = spec.jobs[j];
      if (overrides.epsilon) job.epsilons = {*overrides.epsilon};
      if (overrides.trials) job.base.trials = *overrides.trials;
      std::vector<SweepPoint> points = expand_job(job);
      RngStream job_stream(spec.master_seed, static_cast<std::uint64_t>(j));
      for (std::size_t s = 0; s < points.size(); ++s) {
        points[s].config.master_seed = job_stream.substream(s).next_u64();
        points[s].config.threads = std::max(1, spec.threads);
        points[s].config.validate();
      }
      job_points.push_back(std::move(points));
    }
  } catch (const std::exception& e) {
    log << "config error: " << e.what() << "\n";
    return 2;
  }

  OutputSink sink;
  if (!sink.open(spec.out, log)) return 2;
  sink.out() << kRunCsvHeader << '\n';

  int exit_code = 0;
  for (std::size_t j = 0; j < job_points.size(); ++j) {
    for (const SweepPoint& point : job_points[j]) {
      const GameConfig& cfg = point.config;
      try {
        const ResolvedAttack attack = resolve_attack(cfg);
        const GameOutcome outcome = run_game(cfg, attack);
        const std::string beta = cfg.attack == AttackKind::kAttention
                                     ? fmt(attack.beta_eff)
                                     : "";
        write_row(sink.out(), cfg, outcome.trials, fmt(outcome.success_rate),
                  fmt(outcome.advantage), fmt(outcome.se),
                  fmt(outcome.tp_rate), fmt(outcome.tn_rate), beta, "", "ok");
        if (point.with_bounds) {
          write_bound_row(sink.out(), cfg, point.bound_trials,
                          lower_bound_for(point, attack), beta);
          write_bound_row(sink.out(), cfg, 0,
                          fc_upper_bound(cfg.mechanism.epsilon), beta);
        }
      } catch (const std::exception& e) {
        log << "job " << j << " failed: " << e.what() << "\n";
        write_row(sink.out(), cfg, cfg.trials, "", "", "", "", "", "", "",
                  "error: " + sanitize(e.what()));
        exit_code = 3;
      }
      sink.out().flush();
    }
  }
  return exit_code;
}

std::vector<SimBoundRow> simulate_bound_rows(const SimulateBoundSpec& spec) {
  if (spec.d_x_list.empty() || spec.r_eps_grid.empty()) {
    throw InvalidParamError("simulate_bound: empty grid");
  }
  if (spec.data == DataKind::kFile) {
    throw InvalidParamError("simulate_bound: generator data required");
  }
  if (!(spec.beta_eff > 0.0)) {
    throw InvalidParamError("simulate_bound: beta <= 0");
  }
  const std::string data_name =
      spec.data == DataKind::kOneHot ? "onehot" : "spherical";

  std::vector<SimBoundRow> rows(spec.d_x_list.size() *
                                spec.r_eps_grid.size());
  const auto compute = [&](std::size_t index) {
    const int d_x = spec.d_x_list[index / spec.r_eps_grid.size()];
    const double r = spec.r_eps_grid[index % spec.r_eps_grid.size()];
    GameConfig cfg;
    cfg.attack = AttackKind::kAttention;
    cfg.data = spec.data;
    cfg.d_x = d_x;
    cfg.n_x = spec.n_x;
    cfg.n = static_cast<int>(spec.n);
    cfg.mechanism.kind = MechanismKind::kSphereNoise;
    cfg.mechanism.noise_radius = r;
    cfg.validate();
    RngStream stream(spec.seed, static_cast<std::uint64_t>(index));
    const BoundEstimate b = attn_theorem_bound(
        cfg, spec.beta_eff, spec.trials, spec.stat_samples, stream);
    rows[index] = {data_name, d_x, r, b.advantage, b.mc_std_error};
  };

  const int threads =
      std::max(1, std::min<int>(spec.threads, static_cast<int>(rows.size())));
  if (threads == 1) {
    for (std::size_t i = 0; i < rows.size(); ++i) compute(i);
  } else {
    std::vector<std::thread> workers;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int w = 0; w < threads; ++w) {
      workers.emplace_back([&, w]() {
        try {
          for (std::size_t i = static_cast<std::size_t>(w); i < rows.size();
               i += static_cast<std::size_t>(threads)) {
            compute(i);
          }
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
    }
    for (auto& t : workers) t.join();
    if (error) std::rethrow_exception(error);
  }
  return rows;
}

int cmd_simulate_bound(const SimulateBoundSpec& spec, std::ostream& log) {
  std::vector<SimBoundRow> rows;
  try {
    rows = simulate_bound_rows(spec);
  } catch (const InvalidParamError& e) {
    log << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return 3;
  }
  OutputSink sink;
  if (!sink.open(spec.out, log)) return 2;
  sink.out() << "# noise_model=uniform_direction_exact_norm\n"
             << "# delta_eps=min_over_mc_batch\n"
             << "# seed=" << spec.seed << " beta=" << fmt(spec.beta_eff)
             << " n_x=" << spec.n_x << " n=" << spec.n
             << " trials=" << spec.trials << "\n"
             << kSimulateBoundCsvHeader << '\n';
  for (const SimBoundRow& r : rows) {
    sink.out() << r.data << ',' << r.d_x << ',' << fmt(r.r_eps) << ','
               << fmt(r.advantage) << ',' << fmt(r.se) << '\n';
  }
  sink.out().flush();
  return 0;
}

}  // namespace ami
