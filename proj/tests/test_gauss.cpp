// Copyright 2026 The i2c Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "i2c/errors.hpp"
#include "i2c/gauss.hpp"
#include "test_support.hpp"

using namespace i2c;

namespace {

Gaussian make2(double m0, double m1, double c00, double c01, double c11) {
  Vector mean(2);
  mean << m0, m1;
  Matrix cov(2, 2);
  cov << c00, c01, c01, c11;
  return Gaussian(mean, cov);
}

}  // namespace

TEST_CASE("construction symmetrizes and rejects non-PSD") {
  Matrix cov(2, 2);
  cov << 1.0, 0.3 + 5e-11, 0.3 - 5e-11, 2.0;
  const Gaussian g(Vector::Zero(2), cov);
  CHECK((g.cov() - g.cov().transpose()).cwiseAbs().maxCoeff() == 0.0);

  Matrix bad(1, 1);
  bad << -1.0;
  CHECK_THROWS_AS(Gaussian(Vector::Zero(1), bad), ConfigError);

  // clamp policy floors degenerate directions
  const Gaussian clamped(Vector::Zero(1), Matrix::Zero(1, 1),
                         CovPolicy::kClamp);
  CHECK(clamped.cov()(0, 0) == doctest::Approx(1e-12).epsilon(1e-3));
}

TEST_CASE("marginalize extracts sub-blocks") {
  const Gaussian joint = make2(1.0, 2.0, 1.0, 0.5, 2.0);
  const Gaussian first = marginalize(joint, 0, 1);
  CHECK(first.mean()(0) == 1.0);
  CHECK(first.cov()(0, 0) == 1.0);

  const Gaussian all = marginalize(joint, 0, 2);
  CHECK((all.mean() - joint.mean()).norm() == 0.0);
  CHECK((all.cov() - joint.cov()).norm() == 0.0);

  std::mt19937_64 rng(3);
  const Matrix cov3 = testing::random_spd(rng, 3);
  const Gaussian joint3(testing::random_vector(rng, 3), cov3);
  const Gaussian tail = marginalize(joint3, 1, 2);
  CHECK((tail.cov() - cov3.block(1, 1, 2, 2)).cwiseAbs().maxCoeff() <= 1e-15);

  CHECK_THROWS_AS(marginalize(joint, 1, 2), ConfigError);
}

TEST_CASE("condition matches the hand-computed 2x2 case") {
  const Gaussian joint = make2(0.0, 0.0, 1.0, 0.5, 1.0);
  const Gaussian cond = condition(joint, Vector::Constant(1, 1.0));
  CHECK(cond.mean()(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(cond.cov()(0, 0) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("condition with zero correlation leaves the marginal unchanged") {
  const Gaussian joint = make2(0.7, -0.2, 1.3, 0.0, 0.8);
  const Gaussian cond = condition(joint, Vector::Constant(1, 5.0));
  CHECK(cond.mean()(0) == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(cond.cov()(0, 0) == doctest::Approx(1.3).epsilon(1e-14));
}

TEST_CASE("conditioning at the mean shrinks covariance by the Schur term") {
  const Gaussian joint = make2(0.4, -1.0, 2.0, 0.6, 1.5);
  const Gaussian cond = condition(joint, Vector::Constant(1, -1.0));
  CHECK(cond.mean()(0) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(cond.cov()(0, 0) ==
        doctest::Approx(2.0 - 0.6 * 0.6 / 1.5).epsilon(1e-14));

  // Monte-Carlo cross-check: conditional moments from rejection sampling
  // in a narrow window around the conditioning value.
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01(0.0, 1.0);
  const Eigen::LLT<Matrix> llt(joint.cov());
  const Matrix L = llt.matrixL();
  const double window = 0.05 * std::sqrt(1.5);
  double sum = 0.0, sum_sq = 0.0;
  int accepted = 0;
  for (int i = 0; i < 1000000; ++i) {
    Vector z(2);
    z << n01(rng), n01(rng);
    const Vector x = joint.mean() + L * z;
    if (std::abs(x(1) - (-1.0)) < window) {
      sum += x(0);
      sum_sq += x(0) * x(0);
      ++accepted;
    }
  }
  REQUIRE(accepted > 1000);
  const double mc_mean = sum / accepted;
  const double mc_var = sum_sq / accepted - mc_mean * mc_mean;
  const double se_mean = std::sqrt(mc_var / accepted);
  CHECK(std::abs(mc_mean - cond.mean()(0)) < 3.0 * se_mean + 1e-3);
  CHECK(std::abs(mc_var - cond.cov()(0, 0)) <
        3.0 * mc_var * std::sqrt(2.0 / accepted) + 1e-2);
}

TEST_CASE("condition agrees with the joint density ratio on a grid") {
  std::mt19937_64 rng(17);
  const Gaussian joint(testing::random_vector(rng, 3),
                       testing::random_spd(rng, 3));
  Vector b(1);
  b << 0.3;
  const Gaussian cond = condition(joint, b);
  const Gaussian marg_b = marginalize(joint, 2, 1);

  for (double a0 = -2.0; a0 <= 2.0; a0 += 0.5) {
    for (double a1 = -2.0; a1 <= 2.0; a1 += 0.5) {
      Vector point(3);
      point << a0, a1, b(0);
      Vector head(2);
      head << a0, a1;
      const double lhs = log_density(cond, head);
      const double rhs = log_density(joint, point) - log_density(marg_b, b);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
  }
}

TEST_CASE("condition and marginalize agree with the precision-form solve") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<int> n_dist(2, 8);
    const int n = n_dist(rng);
    std::uniform_int_distribution<int> nb_dist(1, n - 1);
    const int nb = nb_dist(rng);
    const int na = n - nb;

    const Gaussian joint(testing::random_vector(rng, n),
                         testing::random_spd(rng, n));
    const Vector b_value = testing::random_vector(rng, nb);
    const Gaussian cond = condition(joint, b_value);

    const Matrix precision = joint.cov().inverse();
    const Matrix lam_aa = precision.topLeftCorner(na, na);
    const Matrix lam_ab = precision.topRightCorner(na, nb);
    const Matrix cov_ref = lam_aa.inverse();
    const Vector mean_ref =
        joint.mean().head(na) -
        cov_ref * lam_ab * (b_value - joint.mean().tail(nb));

    CHECK((cond.mean() - mean_ref).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((cond.cov() - cov_ref).cwiseAbs().maxCoeff() <= 1e-10);

    const Gaussian marg = marginalize(joint, 0, na);
    CHECK((marg.cov() - joint.cov().topLeftCorner(na, na)).norm() <= 1e-14);
  }
}

TEST_CASE("condition reports singular conditioning blocks") {
  Matrix cov(2, 2);
  cov << 1.0, 0.0, 0.0, 0.0;
  const Gaussian joint(Vector::Zero(2), cov);
  CHECK_THROWS_AS(condition(joint, Vector::Zero(1)), NumericalError);
}

TEST_CASE("propagate_affine basics") {
  const Gaussian g(Vector::Constant(1, 1.0), Matrix::Identity(1, 1));
  const Gaussian out = propagate_affine(g, Matrix::Identity(1, 1),
                                        Vector::Zero(1),
                                        0.5 * Matrix::Identity(1, 1));
  CHECK(out.mean()(0) == 1.0);
  CHECK(out.cov()(0, 0) == 1.5);

  const Gaussian constant = propagate_affine(
      g, Matrix::Zero(1, 1), Vector::Constant(1, 3.0),
      2.0 * Matrix::Identity(1, 1));
  CHECK(constant.mean()(0) == 3.0);
  CHECK(constant.cov()(0, 0) == 2.0);

  Vector mean2(2);
  mean2 << 1.0, 0.0;
  const Gaussian g2(mean2, Matrix::Identity(2, 2));
  Matrix F(1, 2);
  F << 2.0, 0.0;
  const Gaussian projected = propagate_affine(g2, F, Vector::Constant(1, 1.0),
                                              Matrix::Zero(1, 1));
  CHECK(projected.mean()(0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(projected.cov()(0, 0) == doctest::Approx(4.0).epsilon(1e-14));

  CHECK_THROWS_AS(propagate_affine(g2, Matrix::Identity(3, 3),
                                   Vector::Zero(3), Matrix::Identity(3, 3)),
                  ConfigError);
}

TEST_CASE("propagate_affine preserves PSD") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<int> n_dist(1, 5);
    const int n = n_dist(rng);
    const int m = n_dist(rng);
    const Gaussian g(testing::random_vector(rng, n),
                     testing::random_spd(rng, n, 0.0));
    Matrix noise = testing::random_matrix(rng, m, m);
    noise = (noise * noise.transpose()).eval();
    const Gaussian out = propagate_affine(g, testing::random_matrix(rng, m, n),
                                          testing::random_vector(rng, m),
                                          noise);
    CHECK(smallest_eigenvalue(out.cov()) >= -1e-9);
  }
}

TEST_CASE("log_density matches the scalar formula") {
  const Gaussian std_normal(Vector::Zero(1), Matrix::Identity(1, 1));
  // -0.5 log(2 pi), frozen from a high-precision evaluation
  CHECK(log_density(std_normal, Vector::Zero(1)) ==
        doctest::Approx(-0.91893853320467274).epsilon(1e-14));
  CHECK(log_density(std_normal, Vector::Constant(1, 1.0)) ==
        doctest::Approx(log_density(std_normal, Vector::Constant(1, -1.0)))
            .epsilon(1e-15));

  const Gaussian wide(Vector::Zero(1), 4.0 * Matrix::Identity(1, 1));
  CHECK(log_density(wide, Vector::Zero(1)) ==
        doctest::Approx(-0.5 * (std::log(2.0 * M_PI) + std::log(4.0)))
            .epsilon(1e-14));

  const Gaussian degenerate(Vector::Zero(1), Matrix::Zero(1, 1));
  CHECK_THROWS_AS(log_density(degenerate, Vector::Zero(1)), NumericalError);
}

TEST_CASE("log_density integrates to one") {
  const Gaussian g(Vector::Constant(1, 0.3), 2.5 * Matrix::Identity(1, 1));
  const double sigma = std::sqrt(2.5);
  const double lo = 0.3 - 10.0 * sigma;
  const double hi = 0.3 + 10.0 * sigma;
  const int n_bins = 20000;
  const double h = (hi - lo) / n_bins;
  double integral = 0.0;
  for (int i = 0; i <= n_bins; ++i) {
    const double x = lo + i * h;
    const double w = (i == 0 || i == n_bins) ? 0.5 : 1.0;
    integral += w * std::exp(log_density(g, Vector::Constant(1, x)));
  }
  integral *= h;
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("kl_divergence closed form") {
  const Gaussian p(Vector::Zero(2), Matrix::Identity(2, 2));
  CHECK(kl_divergence(p, p) == doctest::Approx(0.0).epsilon(1e-15));

  const Gaussian q1(Vector::Constant(1, 1.0), Matrix::Identity(1, 1));
  const Gaussian p1(Vector::Zero(1), Matrix::Identity(1, 1));
  CHECK(kl_divergence(q1, p1) == doctest::Approx(0.5).epsilon(1e-14));

  const Gaussian q2(Vector::Zero(1), 2.0 * Matrix::Identity(1, 1));
  CHECK(kl_divergence(q2, p1) ==
        doctest::Approx(0.5 * (2.0 - 1.0 - std::log(2.0))).epsilon(1e-14));
}

TEST_CASE("kl_divergence agrees with quadrature in 1d") {
  const Gaussian q(Vector::Constant(1, 0.7), 1.7 * Matrix::Identity(1, 1));
  const Gaussian p(Vector::Constant(1, -0.4), 0.6 * Matrix::Identity(1, 1));
  const double lo = -12.0, hi = 12.0;
  const int n_bins = 40000;
  const double h = (hi - lo) / n_bins;
  double integral = 0.0;
  for (int i = 0; i <= n_bins; ++i) {
    const Vector x = Vector::Constant(1, lo + i * h);
    const double lq = log_density(q, x);
    const double lp = log_density(p, x);
    const double w = (i == 0 || i == n_bins) ? 0.5 : 1.0;
    integral += w * std::exp(lq) * (lq - lp);
  }
  integral *= h;
  CHECK(kl_divergence(q, p) == doctest::Approx(integral).epsilon(1e-8));
}

TEST_CASE("kl_divergence is non-negative and zero iff equal") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    std::uniform_int_distribution<int> n_dist(1, 4);
    const int n = n_dist(rng);
    const Gaussian q(testing::random_vector(rng, n),
                     testing::random_spd(rng, n));
    const Gaussian p(testing::random_vector(rng, n),
                     testing::random_spd(rng, n));
    CHECK(kl_divergence(q, p) >= -1e-12);
    CHECK(std::abs(kl_divergence(q, q)) <= 1e-12);
  }
}
