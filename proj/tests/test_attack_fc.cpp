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

#include <cmath>
#include <vector>

#include <doctest.h>

#include "ami/attack_fc.hpp"
#include "ami/rng.hpp"

using ami::Matrix;
using ami::RngStream;
using ami::Vector;

TEST_CASE("fc_craft lays out the two layers as stacked sign copies") {
  Vector t(2);
  t << 1.0, 0.0;
  const auto p = ami::fc_craft(t, 1.0);
  REQUIRE(p.w1.rows() == 4);
  REQUIRE(p.w1.cols() == 2);
  CHECK(p.w1.topRows(2) == Matrix::Identity(2, 2));
  CHECK(p.w1.bottomRows(2) == -Matrix::Identity(2, 2));
  Vector b1(4);
  b1 << -1.0, 0.0, 1.0, 0.0;
  CHECK(p.b1 == b1);
  CHECK(p.w2_row == Vector::Constant(4, -1.0));
  CHECK(p.b2_1 == 1.0);
  CHECK_THROWS_AS(ami::fc_craft(t, 0.0), ami::InvalidParamError);
  CHECK_THROWS_AS(ami::fc_craft(t, -1.0), ami::InvalidParamError);
}

TEST_CASE("fc_forward_z0 hand values") {
  Vector t = Vector::Zero(3);
  auto p = ami::fc_craft(t, 1.0);
  CHECK(ami::fc_forward_z0(p, t) == doctest::Approx(1.0));  // X = T -> tau

  // Distinct one-hots: L1 distance 2 > tau = 1 -> 0.
  Vector t2 = Vector::Zero(4), x2 = Vector::Zero(4);
  t2(0) = 1.0;
  x2(3) = 1.0;
  p = ami::fc_craft(t2, 1.0);
  CHECK(ami::fc_forward_z0(p, x2) == 0.0);

  // tau = 0.3 at L1 distance 0.1 -> 0.2.
  Vector t3(2), x3(2);
  t3 << 0.5, 0.5;
  x3 << 0.55, 0.45;
  p = ami::fc_craft(t3, 0.3);
  CHECK(ami::fc_forward_z0(p, x3) == doctest::Approx(0.2));

  Vector wrong(3);
  CHECK_THROWS_AS(ami::fc_forward_z0(p, wrong), ami::ShapeError);
}

TEST_CASE("fc layer composition equals the L1 ball closed form") {
  RngStream s(11, 0);
  for (int t = 0; t < 10000; ++t) {
    const int d = 1 + static_cast<int>(s.uniform_index(6));
    Vector target(d), x(d);
    for (int i = 0; i < d; ++i) {
      target(i) = s.standard_normal();
      x(i) = s.standard_normal();
    }
    const double tau = s.uniform01() * 2.0;
    const auto p = ami::fc_craft(target, tau);
    const double closed = std::max(tau - (x - target).cwiseAbs().sum(), 0.0);
    CHECK(std::abs(ami::fc_forward_z0(p, x) - closed) < 1e-10);
  }
}

TEST_CASE("fc_client_gradients is the exact activation frequency") {
  Vector t = Vector::Zero(4);
  t(0) = 1.0;
  const auto p = ami::fc_craft(t, 1.0);

  // One-hot batch without the target: no activation, gradient exactly 0.
  std::vector<Vector> batch;
  for (int i = 1; i < 4; ++i) {
    Vector x = Vector::Zero(4);
    x(i) = 1.0;
    batch.push_back(x);
  }
  auto r = ami::fc_client_gradients(p, batch);
  CHECK(r.grad_b2_1 == 0.0);
  CHECK(r.activated_count == 0);
  CHECK(ami::fc_guess(r) == 0);

  // Adding the target: exactly one activation out of four.
  batch.push_back(t);
  r = ami::fc_client_gradients(p, batch);
  CHECK(r.grad_b2_1 == 0.25);
  CHECK(r.activated_count == 1);
  CHECK(r.batch_size == 4);
  CHECK(ami::fc_guess(r) == 1);

  CHECK_THROWS_AS(ami::fc_client_gradients(p, {}), ami::InvalidParamError);
}

TEST_CASE("b2 gradient matches a finite difference away from kinks") {
  // Loss(tau) = mean_i max{tau - ||x_i - T||_1, 0}; its tau derivative is
  // the activation frequency wherever no point sits exactly on the boundary.
  RngStream s(13, 0);
  const double h = 1e-6;
  int checked = 0;
  while (checked < 100) {
    const int d = 2 + static_cast<int>(s.uniform_index(4));
    Vector target(d);
    for (int i = 0; i < d; ++i) target(i) = s.standard_normal();
    const double tau = 0.2 + s.uniform01();
    std::vector<Vector> batch;
    bool near_kink = false;
    for (int i = 0; i < 8; ++i) {
      Vector x(d);
      for (int j = 0; j < d; ++j) x(j) = s.standard_normal();
      if (std::abs(tau - (x - target).cwiseAbs().sum()) < 1e-3) {
        near_kink = true;
      }
      batch.push_back(x);
    }
    if (near_kink) continue;
    ++checked;
    const auto grad =
        ami::fc_client_gradients(ami::fc_craft(target, tau), batch).grad_b2_1;
    auto loss = [&](double t2) {
      const auto p = ami::fc_craft(target, t2);
      double sum = 0.0;
      for (const Vector& x : batch) sum += ami::fc_forward_z0(p, x);
      return sum / batch.size();
    };
    const double fd = (loss(tau + h) - loss(tau - h)) / (2.0 * h);
    CHECK(std::abs(fd - grad) < 1e-5 * std::max(1.0, std::abs(grad)));
  }
}

TEST_CASE("fc_select_tau is the alphabet separation") {
  CHECK(ami::fc_select_tau({1.0, 16.0}) == 1.0);
  CHECK(ami::fc_select_tau({0.0625, 256.0}) == 0.0625);
  CHECK_THROWS_AS(ami::fc_select_tau({0.0, 4.0}), ami::DegenerateError);
  CHECK_THROWS_AS(ami::fc_select_tau({-1.0, 4.0}), ami::DegenerateError);
}
