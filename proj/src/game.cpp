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

#include "ami/game.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>

#include "ami/numerics.hpp"

namespace ami {
namespace {

constexpr long kFreshRetryCap = 1000000;
// Stream ids reserved for game-level (non-trial) randomness. Trial streams
// use the trial index directly, which stays far below these offsets.
constexpr std::uint64_t kStatsStream = 0xA111000000000000ULL;
constexpr std::uint64_t kCalibStream = 0xA222000000000000ULL;

bool uses_grid_alphabet(const MechanismConfig& m) {
  switch (m.kind) {
    case MechanismKind::kBitRand:
    case MechanismKind::kOme:
      return true;
    case MechanismKind::kGrr:
    case MechanismKind::kRappor:
    case MechanismKind::kDBitFlipPm:
      return m.alphabet == AlphabetMode::kFeatureGrid;
    default:
      return false;
  }
}

}  // namespace

Matrix sample_point(const GameConfig& config, RngStream& stream,
                    const Dataset* pool) {
  switch (config.data) {
    case DataKind::kOneHot: {
      Matrix p = Matrix::Zero(config.d_x, config.n_x);
      for (int j = 0; j < config.n_x; ++j) {
        p(static_cast<EIndex>(stream.uniform_index(config.d_x)), j) = 1.0;
      }
      return p;
    }
    case DataKind::kSpherical: {
      Matrix p(config.d_x, config.n_x);
      for (int j = 0; j < config.n_x; ++j) {
        for (int i = 0; i < config.d_x; ++i) {
          p(i, j) = stream.standard_normal();
        }
        const double n = p.col(j).norm();
        if (n > 0.0) p.col(j) /= n;
      }
      return p;
    }
    case DataKind::kFile:
      if (pool == nullptr) {
        throw InvalidParamError("sample_point: file data without a pool");
      }
      return pool->points[stream.uniform_index(pool->points.size())];
  }
  throw InvalidParamError("sample_point: unknown data kind");
}

namespace {

Matrix quantize_point(const Matrix& x, const BinaryCodec& codec) {
  Matrix out(x.rows(), x.cols());
  for (EIndex j = 0; j < x.cols(); ++j) {
    for (EIndex i = 0; i < x.rows(); ++i) {
      out(i, j) = codec.midpoint(codec.quantize(x(i, j)));
    }
  }
  return out;
}

Vector flatten(const Matrix& x) {
  return Eigen::Map<const Vector>(x.data(), x.size());
}

Dataset build_dataset(const GameConfig& config, const ResolvedAttack& attack,
                      RngStream& stream) {
  Dataset d;
  d.points.reserve(config.n);
  if (config.data == DataKind::kFile) {
    const Dataset& pool = *attack.pool;
    std::vector<std::size_t> idx(pool.points.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (int i = 0; i < config.n; ++i) {
      const std::size_t pick = i + stream.uniform_index(idx.size() - i);
      std::swap(idx[i], idx[pick]);
      d.points.push_back(pool.points[idx[i]]);
    }
    return d;
  }
  long attempts = 0;
  while (d.n() < config.n) {
    Matrix p = sample_point(config, stream, nullptr);
    if (!dataset_contains(d, p)) {
      d.points.push_back(std::move(p));
    } else if (++attempts > kFreshRetryCap) {
      throw DegenerateError("build_dataset: cannot draw n distinct points");
    }
  }
  return d;
}

// Fresh target for the b = 0 branch. For the FC attack freshness is
// point-level on the attack's alphabet representation; for the attention
// attack the target pattern itself must be absent from D's patterns.
Matrix draw_fresh_target(const GameConfig& config, const ResolvedAttack& attack,
                         const Dataset& d, RngStream& stream) {
  for (long tries = 0; tries < kFreshRetryCap; ++tries) {
    Matrix t = sample_point(config, stream,
                         attack.pool ? attack.pool.get() : nullptr);
    if (config.attack == AttackKind::kFc) {
      const Matrix rep = attack.grid ? quantize_point(t, *attack.grid) : t;
      bool clash = false;
      for (const Matrix& p : d.points) {
        const Matrix prep = attack.grid ? quantize_point(p, *attack.grid) : p;
        if (points_equal(prep, rep)) {
          clash = true;
          break;
        }
      }
      if (!clash) return t;
    } else {
      if (!dataset_contains_pattern(d, t.col(0))) return t;
    }
  }
  throw DegenerateError("draw_fresh_target: retry cap exhausted");
}

}  // namespace

void GameConfig::validate() const {
  if (d_x < 1 || n_x < 1 || n < 1) {
    throw InvalidParamError("game: dimensions must be positive");
  }
  if (trials < 1) throw InvalidParamError("game: trials < 1");
  mechanism.validate();
  if (attack == AttackKind::kAttention && d_x < 2) {
    throw InvalidParamError("game: attention attack needs d_x >= 2");
  }
  if (data == DataKind::kFile && data_file.empty()) {
    throw InvalidParamError("game: file data source without a path");
  }
  if (attack == AttackKind::kFc && data != DataKind::kOneHot &&
      !uses_grid_alphabet(mechanism)) {
    throw InvalidParamError(
        "game: FC attack on continuous data needs a grid-alphabet mechanism");
  }
}

ProtectedStats estimate_protected_stats(const GameConfig& config, int samples,
                                        RngStream& stream) {
  if (samples < 1) throw InvalidParamError("estimate_protected_stats: samples");
  std::shared_ptr<const Dataset> pool;
  if (config.data == DataKind::kFile) {
    pool = std::make_shared<Dataset>(load_embeddings(config.data_file));
  }
  SeparationStats s{std::numeric_limits<double>::infinity(), 0.0, 0.0};
  std::vector<double> noise_norms;
  noise_norms.reserve(static_cast<std::size_t>(samples) * config.n_x);
  for (int t = 0; t < samples; ++t) {
    RngStream sub = stream.substream(static_cast<std::uint64_t>(t));
    const Matrix clean = sample_point(config, sub, pool.get());
    RngStream mech_stream = sub.substream(1);
    const Matrix prot = perturb_datapoint(clean, config.mechanism, mech_stream);
    for (int j = 0; j < config.n_x; ++j) {
      s.m = std::max(s.m, clean.col(j).norm());
      noise_norms.push_back((prot.col(j) - clean.col(j)).norm());
    }
    const Vector mean = prot.rowwise().mean();
    for (int j = 0; j < config.n_x; ++j) {
      s.m_max = std::max(s.m_max, (prot.col(j) - mean).norm());
    }
    if (config.n_x >= 2) {
      const Matrix gram = prot.transpose() * prot;
      for (int i = 0; i < config.n_x; ++i) {
        double max_cross = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < config.n_x; ++j) {
          if (j == i || points_equal(clean.col(i), clean.col(j))) continue;
          max_cross = std::max(max_cross, gram(i, j));
        }
        if (std::isfinite(max_cross)) {
          s.delta = std::min(s.delta, gram(i, i) - max_cross);
        }
      }
    }
  }
  std::sort(noise_norms.begin(), noise_norms.end());
  const std::size_t q = std::min(
      noise_norms.size() - 1,
      static_cast<std::size_t>(0.999 * static_cast<double>(noise_norms.size())));
  return {s, noise_norms[q]};
}

ResolvedAttack resolve_attack(const GameConfig& config) {
  config.validate();
  ResolvedAttack out;
  if (config.data == DataKind::kFile) {
    out.pool = std::make_shared<Dataset>(load_embeddings(config.data_file));
    if (out.pool->n() <= config.n) {
      throw InvalidParamError("resolve_attack: file pool smaller than n + 1");
    }
    if (out.pool->d_x() != config.d_x || out.pool->n_x() != config.n_x) {
      throw ShapeError("resolve_attack: file dimensions disagree with config");
    }
  }
  if (uses_grid_alphabet(config.mechanism)) {
    out.grid = config.mechanism.codec(config.d_x);
  }

  if (config.attack == AttackKind::kFc) {
    const PatternAlphabet pa = output_alphabet(config.mechanism, config.d_x);
    out.tau = fc_select_tau({pa.delta_x, pa.cardinality});
    return out;
  }

  if (config.gamma && config.beta_eff) {
    out.beta_eff = *config.beta_eff;
    out.gamma = *config.gamma;
  } else if (config.hyper_mode == HyperMode::kTheorem) {
    RngStream stats_stream(config.master_seed, kStatsStream);
    const ProtectedStats ps =
        estimate_protected_stats(config, 200, stats_stream);
    const AttnHyperparams hp = attn_select_hyperparams(
        ps.stats, config.n_x, ps.r_eps, HyperMode::kTheorem, config.beta_eff,
        config.gamma_margin);
    out.beta_eff = hp.beta_eff;
    out.gamma = config.gamma.value_or(hp.gamma);
    out.condition_holds = hp.condition_holds;
  } else {
    out.beta_eff = config.beta_eff.value_or(0.01);
    if (config.gamma) {
      out.gamma = *config.gamma;
    } else {
      RngStream calib_stream(config.master_seed, kCalibStream);
      out.gamma =
          calibrate_gamma(config, config.calibration_trials, calib_stream);
    }
  }
  out.beta_raw = out.beta_eff * std::sqrt(static_cast<double>(config.d_x - 1));
  return out;
}

TrialRecord run_trial(const GameConfig& config, const ResolvedAttack& attack,
                      long trial_index) {
  RngStream stream(config.master_seed,
                   static_cast<std::uint64_t>(trial_index));
  RngStream s_data = stream.substream(1);
  RngStream s_bit = stream.substream(2);
  RngStream s_target = stream.substream(3);
  RngStream s_craft = stream.substream(4);
  RngStream s_mech = stream.substream(5);

  Dataset d = build_dataset(config, attack, s_data);
  const int b = s_bit.bernoulli(0.5) ? 1 : 0;
  const Matrix t = b == 1
                       ? d.points[s_target.uniform_index(d.points.size())]
                       : draw_fresh_target(config, attack, d, s_target);

  std::vector<Matrix> protected_points;
  protected_points.reserve(d.points.size());
  for (std::size_t i = 0; i < d.points.size(); ++i) {
    RngStream point_stream = s_mech.substream(i);
    protected_points.push_back(
        perturb_datapoint(d.points[i], config.mechanism, point_stream));
  }

  TrialRecord rec{b, 0, 0.0};
  if (config.attack == AttackKind::kFc) {
    const Matrix rep = attack.grid ? quantize_point(t, *attack.grid) : t;
    const FcAttackParams params = fc_craft(flatten(rep), attack.tau);
    std::vector<Vector> batch;
    batch.reserve(protected_points.size());
    for (const Matrix& p : protected_points) batch.push_back(flatten(p));
    const FcGradientReport report = fc_client_gradients(params, batch);
    rec.b_prime = fc_guess(report);
    rec.diagnostic = report.grad_b2_1;
  } else {
    const AttnAttackParams params =
        attn_craft(t.col(0), attack.beta_raw, attack.gamma, s_craft);
    const AttnGradientReport report =
        attn_client_gradients(params, protected_points);
    rec.b_prime = attn_guess(report);
    rec.diagnostic = report.max_gap;
  }
  return rec;
}

GameOutcome aggregate_trials(const std::vector<TrialRecord>& records,
                             bool keep_records) {
  GameOutcome out;
  out.trials = static_cast<long>(records.size());
  for (const TrialRecord& r : records) {
    if (r.b == 1) {
      ++out.n_pos;
      if (r.b_prime == 1) ++out.correct_pos;
    } else {
      ++out.n_neg;
      if (r.b_prime == 0) ++out.correct_neg;
    }
  }
  if (out.n_pos == 0 || out.n_neg == 0) {
    throw DegenerateError("aggregate_trials: a conditional cell is empty");
  }
  out.tp_rate = static_cast<double>(out.correct_pos) / out.n_pos;
  out.tn_rate = static_cast<double>(out.correct_neg) / out.n_neg;
  out.advantage = out.tp_rate + out.tn_rate - 1.0;
  out.success_rate = (out.tp_rate + out.tn_rate) / 2.0;
  out.se = 0.5 * std::sqrt(out.tp_rate * (1.0 - out.tp_rate) / out.n_pos +
                           out.tn_rate * (1.0 - out.tn_rate) / out.n_neg);
  if (keep_records) out.records = records;
  return out;
}

GameOutcome run_game(const GameConfig& config) {
  return run_game(config, resolve_attack(config));
}

GameOutcome run_game(const GameConfig& config, const ResolvedAttack& attack) {
  config.validate();
  std::vector<TrialRecord> records(static_cast<std::size_t>(config.trials));
  const int threads =
      std::max(1, std::min<int>(config.threads,
                                static_cast<int>(config.trials)));
  if (threads == 1) {
    for (long i = 0; i < config.trials; ++i) {
      records[static_cast<std::size_t>(i)] = run_trial(config, attack, i);
    }
  } else {
    std::vector<std::thread> workers;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int w = 0; w < threads; ++w) {
      workers.emplace_back([&, w]() {
        try {
          for (long i = w; i < config.trials; i += threads) {
            records[static_cast<std::size_t>(i)] = run_trial(config, attack, i);
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
  return aggregate_trials(records, config.keep_trials);
}

double gap_threshold(std::vector<double> positive,
                     std::vector<double> negative) {
  if (positive.empty() || negative.empty()) {
    throw InvalidParamError("gap_threshold: empty class");
  }
  std::sort(positive.begin(), positive.end());
  std::sort(negative.begin(), negative.end());
  if (positive == negative) {
    throw DegenerateError("gap_threshold: identical class distributions");
  }
  const double neg_max = negative.back();
  const double pos_min = positive.front();
  if (neg_max < pos_min) return (neg_max + pos_min) / 2.0;

  // Overlapping classes: pick the cut (guess "present" iff gap > cut)
  // minimizing calibration error over all candidate cuts.
  std::vector<double> values;
  values.reserve(positive.size() + negative.size() + 1);
  values.push_back(std::min(pos_min, negative.front()) / 2.0);
  values.insert(values.end(), positive.begin(), positive.end());
  values.insert(values.end(), negative.begin(), negative.end());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  double best_cut = values.front();
  long best_err = std::numeric_limits<long>::max();
  for (double cut : values) {
    const long miss =
        std::upper_bound(positive.begin(), positive.end(), cut) -
        positive.begin();
    const long false_alarm =
        negative.end() -
        std::upper_bound(negative.begin(), negative.end(), cut);
    const long err = miss + false_alarm;
    if (err < best_err) {
      best_err = err;
      best_cut = cut;
    }
  }
  // Place the threshold in the middle of the gap above the chosen cut so
  // exact ties resolve consistently.
  const auto above = std::upper_bound(values.begin(), values.end(), best_cut);
  const double gamma =
      above == values.end() ? best_cut + 1.0 : (best_cut + *above) / 2.0;
  return std::max(gamma, 1e-12);
}

double calibrate_gamma(const GameConfig& config, long calibration_trials,
                       RngStream& stream) {
  if (config.attack != AttackKind::kAttention) {
    throw InvalidParamError("calibrate_gamma: attention attack required");
  }
  if (calibration_trials < 1) {
    throw InvalidParamError("calibrate_gamma: trials < 1");
  }
  ResolvedAttack shell;  // only pool / grid members are needed below
  if (config.data == DataKind::kFile) {
    shell.pool = std::make_shared<Dataset>(load_embeddings(config.data_file));
  }
  const double beta_eff = config.beta_eff.value_or(0.01);
  const double beta_raw =
      beta_eff * std::sqrt(static_cast<double>(config.d_x - 1));

  std::vector<double> pos, neg;
  pos.reserve(calibration_trials);
  neg.reserve(calibration_trials);
  for (long i = 0; i < 2 * calibration_trials; ++i) {
    RngStream sub = stream.substream(static_cast<std::uint64_t>(i));
    RngStream s_data = sub.substream(1);
    RngStream s_target = sub.substream(2);
    RngStream s_craft = sub.substream(3);
    RngStream s_mech = sub.substream(4);
    Dataset d = build_dataset(config, shell, s_data);
    const bool positive_case = i % 2 == 0;
    Vector v;
    if (positive_case) {
      v = d.points[s_target.uniform_index(d.points.size())].col(0);
    } else {
      GameConfig attn = config;
      attn.attack = AttackKind::kAttention;
      v = draw_fresh_target(attn, shell, d, s_target).col(0);
    }
    // gamma does not influence the gap statistic; any positive value works.
    const AttnAttackParams params = attn_craft(v, beta_raw, 1.0, s_craft);
    std::vector<Matrix> batch;
    batch.reserve(d.points.size());
    for (std::size_t p = 0; p < d.points.size(); ++p) {
      RngStream point_stream = s_mech.substream(p);
      batch.push_back(
          perturb_datapoint(d.points[p], config.mechanism, point_stream));
    }
    const AttnGradientReport report = attn_client_gradients(params, batch);
    (positive_case ? pos : neg).push_back(report.max_gap);
  }
  return gap_threshold(std::move(pos), std::move(neg));
}

}  // namespace ami
