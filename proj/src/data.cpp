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

#include "ami/data.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace ami {
namespace {

constexpr long kDedupRetryCap = 1000000;

long long quantized(double v) {
  return static_cast<long long>(std::llround(v / kDedupGrid));
}

}  // namespace

bool points_equal(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (EIndex j = 0; j < a.cols(); ++j) {
    for (EIndex i = 0; i < a.rows(); ++i) {
      if (quantized(a(i, j)) != quantized(b(i, j))) return false;
    }
  }
  return true;
}

bool dataset_contains(const Dataset& d, const Matrix& x) {
  for (const Matrix& p : d.points) {
    if (points_equal(p, x)) return true;
  }
  return false;
}

bool dataset_contains_pattern(const Dataset& d, const Vector& v) {
  for (const Matrix& p : d.points) {
    for (EIndex j = 0; j < p.cols(); ++j) {
      if (points_equal(p.col(j), v)) return true;
    }
  }
  return false;
}

Dataset gen_onehot(int d_x, int n_x, int n, RngStream& stream) {
  if (d_x < 1 || n_x < 1 || n < 1) {
    throw InvalidParamError("gen_onehot: dimensions must be positive");
  }
  Dataset out;
  out.points.reserve(n);
  long attempts = 0;
  while (out.n() < n) {
    Matrix p = Matrix::Zero(d_x, n_x);
    for (int j = 0; j < n_x; ++j) {
      p(static_cast<EIndex>(stream.uniform_index(d_x)), j) = 1.0;
    }
    if (!dataset_contains(out, p)) {
      out.points.push_back(std::move(p));
    } else if (++attempts > kDedupRetryCap) {
      throw DegenerateError(
          "gen_onehot: cannot supply enough distinct points");
    }
  }
  return out;
}

Dataset gen_spherical(int d_x, int n_x, int n, RngStream& stream) {
  if (d_x < 2) throw InvalidParamError("gen_spherical: d_x < 2");
  if (n_x < 1 || n < 1) {
    throw InvalidParamError("gen_spherical: dimensions must be positive");
  }
  Dataset out;
  out.points.reserve(n);
  long attempts = 0;
  while (out.n() < n) {
    Matrix p(d_x, n_x);
    for (int j = 0; j < n_x; ++j) {
      for (int i = 0; i < d_x; ++i) p(i, j) = stream.standard_normal();
      const double nm = p.col(j).norm();
      if (nm == 0.0) {
        --j;
        continue;
      }
      p.col(j) /= nm;
    }
    if (!dataset_contains(out, p)) {
      out.points.push_back(std::move(p));
    } else if (++attempts > kDedupRetryCap) {
      throw DegenerateError(
          "gen_spherical: cannot supply enough distinct points");
    }
  }
  return out;
}

std::pair<Vector, double> separation(const Matrix& x) {
  if (x.cols() < 2) {
    throw DegenerateError("separation: fewer than two patterns");
  }
  const Matrix gram = x.transpose() * x;
  Vector delta(x.cols());
  for (EIndex i = 0; i < x.cols(); ++i) {
    double max_cross = -std::numeric_limits<double>::infinity();
    for (EIndex j = 0; j < x.cols(); ++j) {
      if (j != i) max_cross = std::max(max_cross, gram(i, j));
    }
    delta(i) = gram(i, i) - max_cross;
  }
  return {delta, delta.minCoeff()};
}

SeparationStats pattern_stats(const Dataset& d) {
  SeparationStats s{std::numeric_limits<double>::infinity(), 0.0, 0.0};
  for (const Matrix& p : d.points) {
    for (EIndex j = 0; j < p.cols(); ++j) {
      s.m = std::max(s.m, p.col(j).norm());
    }
    const Vector mean = p.rowwise().mean();
    for (EIndex j = 0; j < p.cols(); ++j) {
      s.m_max = std::max(s.m_max, (p.col(j) - mean).norm());
    }
    if (p.cols() >= 2) {
      s.delta = std::min(s.delta, separation(p).second);
    }
  }
  return s;
}

double m_with_noise(double m, double r_eps) {
  return std::sqrt(m * m + r_eps * r_eps);
}

AlphabetStats alphabet_stats(const std::vector<Vector>& alphabet) {
  if (alphabet.size() < 2) {
    throw DegenerateError("alphabet_stats: singleton alphabet");
  }
  double min_l1 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < alphabet.size(); ++i) {
    for (std::size_t j = i + 1; j < alphabet.size(); ++j) {
      min_l1 =
          std::min(min_l1, (alphabet[i] - alphabet[j]).cwiseAbs().sum());
    }
  }
  return {min_l1 / 2.0, static_cast<double>(alphabet.size())};
}

Matrix patch_embed(const std::vector<Matrix>& channels, int patch,
                   const Matrix& w_embed, const Matrix& positions) {
  if (channels.empty()) throw ShapeError("patch_embed: no channels");
  const int h = static_cast<int>(channels[0].rows());
  const int w = static_cast<int>(channels[0].cols());
  for (const Matrix& c : channels) {
    if (c.rows() != h || c.cols() != w) {
      throw ShapeError("patch_embed: inconsistent channel shapes");
    }
  }
  if (patch < 1 || h % patch != 0 || w % patch != 0) {
    throw ShapeError("patch_embed: image not divisible into patches");
  }
  const int n_c = static_cast<int>(channels.size());
  const int fan_in = patch * patch * n_c;
  if (w_embed.rows() != fan_in) {
    throw ShapeError("patch_embed: w_embed fan-in mismatch");
  }
  const int d_x = static_cast<int>(w_embed.cols());
  const int l = (h / patch) * (w / patch);
  if (positions.rows() != d_x || positions.cols() != l) {
    throw ShapeError("patch_embed: positions shape mismatch");
  }
  Matrix out(d_x, l);
  int idx = 0;
  for (int pr = 0; pr < h / patch; ++pr) {
    for (int pc = 0; pc < w / patch; ++pc, ++idx) {
      Vector flat(fan_in);
      int f = 0;
      for (int c = 0; c < n_c; ++c) {
        for (int i = 0; i < patch; ++i) {
          for (int j = 0; j < patch; ++j) {
            flat(f++) = channels[c](pr * patch + i, pc * patch + j);
          }
        }
      }
      out.col(idx) = w_embed.transpose() * flat + positions.col(idx);
    }
  }
  return out;
}

Matrix random_w_embed(int fan_in, int d_x, RngStream& stream) {
  if (fan_in < 1 || d_x < 1) throw InvalidParamError("random_w_embed: sizes");
  Matrix w(fan_in, d_x);
  const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (int i = 0; i < fan_in; ++i) {
    for (int j = 0; j < d_x; ++j) w(i, j) = scale * stream.standard_normal();
  }
  return w;
}

Dataset load_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::string line;
  long line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty file: " + path);
  ++line_no;
  if (line.rfind("point_id,pattern_id,", 0) != 0) {
    throw ParseError("bad header in " + path, line_no);
  }
  int d = 0;
  for (char ch : line) {
    if (ch == ',') ++d;
  }
  d -= 1;  // columns after point_id,pattern_id
  if (d < 1) throw ParseError("no feature columns in " + path, line_no);

  std::vector<std::vector<Vector>> rows_by_point;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    auto next_cell = [&]() {
      if (!std::getline(ss, cell, ',')) {
        throw ParseError("missing column in " + path, line_no);
      }
      return cell;
    };
    long point_id, pattern_id;
    try {
      point_id = std::stol(next_cell());
      pattern_id = std::stol(next_cell());
    } catch (const std::exception&) {
      throw ParseError("bad id in " + path, line_no);
    }
    Vector v(d);
    for (int i = 0; i < d; ++i) {
      try {
        v(i) = std::stod(next_cell());
      } catch (const std::exception&) {
        throw ParseError("bad feature value in " + path, line_no);
      }
    }
    if (point_id < 0 || pattern_id < 0) {
      throw ParseError("negative id in " + path, line_no);
    }
    if (static_cast<std::size_t>(point_id) >= rows_by_point.size()) {
      rows_by_point.resize(point_id + 1);
    }
    auto& pats = rows_by_point[point_id];
    if (static_cast<std::size_t>(pattern_id) >= pats.size()) {
      pats.resize(pattern_id + 1);
    }
    pats[pattern_id] = v;
  }
  if (rows_by_point.empty()) throw ParseError("no data rows in " + path);

  Dataset out;
  const std::size_t n_x = rows_by_point[0].size();
  for (std::size_t p = 0; p < rows_by_point.size(); ++p) {
    if (rows_by_point[p].size() != n_x) {
      throw ParseError("point " + std::to_string(p) +
                       " has inconsistent pattern count in " + path);
    }
    Matrix m(d, static_cast<EIndex>(n_x));
    for (std::size_t j = 0; j < n_x; ++j) {
      if (rows_by_point[p][j].size() != d) {
        throw ParseError("missing pattern row in " + path);
      }
      m.col(static_cast<EIndex>(j)) = rows_by_point[p][j];
    }
    out.points.push_back(std::move(m));
  }
  return out;
}

void save_dataset(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open " + path + " for writing");
  out << "point_id,pattern_id";
  for (int i = 0; i < d.d_x(); ++i) out << ",f" << i;
  out << "\n";
  out.precision(17);
  for (int p = 0; p < d.n(); ++p) {
    for (int j = 0; j < d.n_x(); ++j) {
      out << p << "," << j;
      for (int i = 0; i < d.d_x(); ++i) out << "," << d.points[p](i, j);
      out << "\n";
    }
  }
}

}  // namespace ami
