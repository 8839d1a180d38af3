/**
 * loss_test.cc
 *
 * Copyright 2026. All Rights Reserved.
 */

#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "pgk/loss.h"
#include "test_support.h"

namespace pgk {
namespace {

using testing::Literals;

double Ce(const std::vector<double>& y, const PartialState& label,
          std::vector<double>* grad = nullptr, const PropWeights* w = nullptr) {
  return CeDnf<double>(y, label, w, grad ? grad->data() : nullptr);
}

TEST_SUITE("loss") {

TEST_CASE("softplus is stable at the extremes") {
  CHECK(Softplus(0.0) == doctest::Approx(std::log(2.0)));
  CHECK(Softplus(800.0) == doctest::Approx(800.0));
  CHECK(Softplus(-800.0) >= 0.0);
  CHECK(Softplus(-800.0) < 1e-300);
}

TEST_CASE("worked values") {
  CHECK(Ce({1.0, -2.0, 3.0}, PartialState(3)) == 0.0);
  CHECK(std::abs(Ce({0.0}, Literals(1, {0}, {})) - std::log(2.0)) < 1e-9);
  CHECK(Ce({-10.0}, Literals(1, {}, {0})) == doctest::Approx(4.54e-5).epsilon(1e-3));
  CHECK(CeDnf<float>(std::vector<float>{0.0f}, Literals(1, {0}, {})) ==
        doctest::Approx(std::log(2.0)));
}

TEST_CASE("unlabeled entries get exactly zero gradient") {
  std::vector<double> grad(4, 0.0);
  Ce({0.3, -1.0, 2.0, 5.0}, Literals(4, {0}, {3}), &grad);
  CHECK(grad[1] == 0.0);
  CHECK(grad[2] == 0.0);
  CHECK(grad[0] < 0.0);
  CHECK(grad[3] > 0.0);
}

TEST_CASE("gradient matches central differences") {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const size_t n = 1 + UniformInt(rng, 10);
    std::vector<double> y(n);
    for (double& v : y) v = 8.0 * UniformReal(rng) - 4.0;
    PartialState label(n);
    for (size_t p = 0; p < n; ++p) {
      const uint64_t r = UniformInt(rng, 3);
      if (r == 1) label.AddPositive(p);
      if (r == 2) label.AddNegative(p);
    }
    PropWeights w{std::vector<float>(n), std::vector<float>(n)};
    for (size_t p = 0; p < n; ++p) {
      w.pos[p] = static_cast<float>(0.5 + UniformReal(rng));
      w.neg[p] = static_cast<float>(0.5 + UniformReal(rng));
    }
    for (const PropWeights* weights : {static_cast<const PropWeights*>(nullptr), static_cast<const PropWeights*>(&w)}) {
      std::vector<double> grad(n, 0.0);
      Ce(y, label, &grad, weights);
      for (size_t p = 0; p < n; ++p) {
        const double h = 1e-5;
        std::vector<double> up = y, down = y;
        up[p] += h;
        down[p] -= h;
        const double fd = (Ce(up, label, nullptr, weights) - Ce(down, label, nullptr, weights)) / (2 * h);
        CHECK(std::abs(fd - grad[p]) <= 1e-4 * std::max(1e-3, std::abs(fd)));
      }
    }
  }
}

TEST_CASE("unlabeled logits do not move the loss; the loss is never negative") {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> y(6);
    for (double& v : y) v = 40.0 * UniformReal(rng) - 20.0;
    const PartialState label = Literals(6, {0, 3}, {1});
    const double base = Ce(y, label);
    CHECK(base >= 0.0);
    for (size_t p : {2, 4, 5}) {
      std::vector<double> moved = y;
      moved[p] += 100.0 * UniformReal(rng) - 50.0;
      CHECK(Ce(moved, label) == base);
    }
  }
}

TEST_CASE("gradients accumulate into the buffer") {
  std::vector<double> grad(1, 1.0);
  Ce({0.0}, Literals(1, {0}, {}), &grad);
  CHECK(grad[0] == doctest::Approx(0.5));
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(Ce({0.0, 1.0}, PartialState(3)), std::invalid_argument);
  CHECK_THROWS_AS(Ce({std::numeric_limits<double>::quiet_NaN()}, Literals(1, {0}, {})),
                  std::invalid_argument);
  // Non-finite values in unlabeled entries are ignored.
  CHECK(Ce({std::numeric_limits<double>::infinity()}, PartialState(1)) == 0.0);
}

TEST_CASE("pair loss is symmetric and additive") {
  const std::vector<double> a = {0.2, -1.5, 3.0}, b = {-0.7, 0.1, 2.2};
  const PartialState la = Literals(3, {0}, {2}), lb = Literals(3, {1, 2}, {});
  const double ab = PairLoss<double>(a, b, la, lb);
  CHECK(ab == doctest::Approx(PairLoss<double>(b, a, lb, la)));
  CHECK(ab == doctest::Approx(Ce(a, la) + Ce(b, lb)));
}

TEST_CASE("full labels cover every proposition") {
  const PartialState l = FullLabel(testing::StateFromCode(5, 0b10110));
  CHECK(l.NumLabeled() == 5);
  CHECK(l.pos().indices() == std::vector<size_t>{1, 2, 4});
}

TEST_CASE("class-balanced weights") {
  ClassCounts equal(2);
  equal.pos = {50, 50};
  equal.neg = {50, 50};
  const ClassWeights we = CbWeights(equal, 0.999);
  for (double w : we.pos) CHECK(w == doctest::Approx(1.0));
  for (double w : we.neg) CHECK(w == doctest::Approx(1.0));

  ClassCounts skew(1);
  skew.pos = {10};
  skew.neg = {1000};
  const ClassWeights ws = CbWeights(skew, 0.999);
  CHECK(ws.pos[0] > ws.neg[0]);
  CHECK((ws.pos[0] + ws.neg[0]) / 2 == doctest::Approx(1.0));

  const ClassWeights w0 = CbWeights(skew, 1e-6);
  CHECK(std::abs(w0.pos[0] - 1.0) < 1e-3);
  CHECK(std::abs(w0.neg[0] - 1.0) < 1e-3);

  ClassCounts missing(1);
  missing.pos = {0};
  missing.neg = {7};
  const ClassWeights wm = CbWeights(missing, 0.999);
  CHECK(wm.pos[0] == 0.0);
  CHECK(wm.neg[0] == doctest::Approx(1.0));
}

}  // TEST_SUITE

}  // namespace
}  // namespace pgk
