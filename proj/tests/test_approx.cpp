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

#include "i2c/approx.hpp"
#include "i2c/errors.hpp"
#include "i2c/sim.hpp"
#include "i2c/solver.hpp"
#include "test_support.hpp"

using namespace i2c;

namespace {

NonlinearSpec default_pendulum() {
  NonlinearSpec spec;
  spec.name = "pendulum";
  spec.mass = 1.0;
  spec.length = 1.0;
  spec.gravity = 9.81;
  spec.dt = 0.05;
  spec.control_gain = 1.0;
  return spec;
}

// Analytic Jacobians of the Euler-discretized pendulum, written from the
// closed-form derivatives; the finite-difference path must match these.
void pendulum_jacobians(const NonlinearSpec& spec, const Vector& x,
                        Matrix* A, Matrix* B) {
  const double g_over_l = spec.gravity / spec.length;
  const double inertia = spec.mass * spec.length * spec.length;
  *A = Matrix::Identity(2, 2);
  (*A)(0, 1) = spec.dt;
  (*A)(1, 0) = -g_over_l * spec.dt * std::cos(x(0));
  *B = Matrix::Zero(2, 1);
  (*B)(1, 0) = spec.control_gain * spec.dt / inertia;
}

NonlinearConfig pendulum_regulation_config(double theta0, int T) {
  NonlinearConfig cfg;
  Vector x0(2);
  x0 << theta0, 0.0;
  cfg.x0 = Gaussian(x0, 1e-4 * Matrix::Identity(2, 2));
  cfg.u_prior.assign(T, Gaussian(Vector::Zero(1),
                                 25.0 * Matrix::Identity(1, 1)));
  cfg.W = Matrix::Zero(3, 3);
  cfg.W(0, 0) = 10.0;
  cfg.W(1, 1) = 1.0;
  cfg.W(2, 2) = 0.1;
  cfg.z_star.assign(T, Vector::Zero(3));
  return cfg;
}

}  // namespace

TEST_CASE("linearize recovers a linear map exactly") {
  std::mt19937_64 rng(101);
  const Matrix A_true = testing::random_matrix(rng, 3, 3);
  const Matrix B_true = testing::random_matrix(rng, 3, 2);
  const Vector c_true = testing::random_vector(rng, 3);
  const StateMap f = [&](const Vector& x, const Vector& u) {
    return Vector(A_true * x + B_true * u + c_true);
  };
  for (int trial = 0; trial < 5; ++trial) {
    Matrix A, B;
    Vector c;
    linearize(f, testing::random_vector(rng, 3),
              testing::random_vector(rng, 2), 1e-5, &A, &B, &c);
    CHECK((A - A_true).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((B - B_true).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((c - c_true).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("linearize matches the analytic pendulum Jacobians") {
  const NonlinearSpec spec = default_pendulum();
  const NonlinearSystem sys = make_pendulum(spec);

  // expansion at the inverted point theta = pi
  Vector x_pi(2);
  x_pi << M_PI, 0.0;
  Matrix A, B;
  Vector c;
  linearize(sys.f, x_pi, Vector::Zero(1), 1e-5, &A, &B, &c);
  CHECK(A(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(A(0, 1) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(A(1, 0) ==
        doctest::Approx(-9.81 * 0.05 * std::cos(M_PI)).epsilon(1e-7));
  CHECK(A(1, 1) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(B(1, 0) == doctest::Approx(0.05).epsilon(1e-9));

  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> angle(-2.0 * M_PI, 2.0 * M_PI);
  std::uniform_real_distribution<double> rate(-5.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    Vector x(2);
    x << angle(rng), rate(rng);
    const Vector u = testing::random_vector(rng, 1);
    Matrix A_fd, B_fd, A_ref, B_ref;
    Vector c_fd;
    linearize(sys.f, x, u, 1e-5, &A_fd, &B_fd, &c_fd);
    pendulum_jacobians(spec, x, &A_ref, &B_ref);
    CHECK((A_fd - A_ref).cwiseAbs().maxCoeff() <= 1e-5);
    CHECK((B_fd - B_ref).cwiseAbs().maxCoeff() <= 1e-5);
  }
}

TEST_CASE("finite-difference Jacobians are stable across step sizes") {
  const NonlinearSystem sys = make_pendulum(default_pendulum());
  Vector x(2);
  x << 0.7, -1.2;
  const Vector u = Vector::Constant(1, 0.3);
  Matrix A_ref, B_ref;
  Vector c_ref;
  linearize(sys.f, x, u, 1e-4, &A_ref, &B_ref, &c_ref);
  for (const double eps : {1e-5, 1e-6}) {
    Matrix A, B;
    Vector c;
    linearize(sys.f, x, u, eps, &A, &B, &c);
    CHECK((A - A_ref).cwiseAbs().maxCoeff() <= 1e-5);
    CHECK((B - B_ref).cwiseAbs().maxCoeff() <= 1e-5);
  }
  CHECK_THROWS_AS(linearize(sys.f, x, u, 0.0, &A_ref, &B_ref, &c_ref),
                  ConfigError);
}

TEST_CASE("a wrapped linear system reproduces the exact solver in one "
          "outer iteration") {
  std::mt19937_64 rng(107);
  Scenario s = testing::random_lqr_scenario(rng, 3, 2, 10);
  const EmResult exact = em_solve(s);

  const NonlinearSystem sys = wrap_linear(s.dynamics, s.cost);
  NonlinearConfig cfg = nonlinear_config_from(s);
  cfg.outer_iters = 1;
  const NonlinearResult approx = nonlinear_i2c(sys, cfg);
  CHECK(approx.outer_iterations == 1);

  REQUIRE(approx.policy.size() == exact.policy.size());
  for (size_t t = 0; t < exact.policy.size(); ++t) {
    CHECK((approx.policy[t].K - exact.policy[t].K).cwiseAbs().maxCoeff() <=
          1e-8);
    CHECK((approx.policy[t].k - exact.policy[t].k).cwiseAbs().maxCoeff() <=
          1e-8);
  }

  // with the relinearization loop left on, the nominal is already a fixed
  // point and the second sweep stops the iteration
  cfg.outer_iters = 10;
  const NonlinearResult converged = nonlinear_i2c(sys, cfg);
  CHECK(converged.converged);
  CHECK(converged.outer_iterations <= 2);
}

TEST_CASE("pendulum regulation beats the prior rollout in closed loop") {
  const NonlinearSpec spec = default_pendulum();
  NonlinearSystem sys = make_pendulum(spec);
  sys.sigma_w = 1e-4 * Matrix::Identity(2, 2);
  const int T = 40;
  NonlinearConfig cfg = pendulum_regulation_config(0.3, T);

  const NonlinearResult solved = nonlinear_i2c(sys, cfg);
  CHECK(solved.converged);

  // prior policy: open loop at the prior mean (zero control)
  std::vector<PolicyGain> prior_policy(
      T, PolicyGain{Matrix::Zero(1, 2), Vector::Zero(1),
                    Matrix::Zero(1, 1), 0});
  const std::vector<double> prior_costs = sim::mc_rollout_costs_serial(
      sys, prior_policy, cfg.x0, cfg.W, cfg.z_star, 1000, 42);
  const std::vector<double> solved_costs = sim::mc_rollout_costs_serial(
      sys, solved.policy, cfg.x0, cfg.W, cfg.z_star, 1000, 42);
  CHECK(sim::mean(solved_costs) < sim::mean(prior_costs));

  // weak cost descent over the relinearization sweeps
  for (size_t i = 2; i + 1 < solved.nominal_costs.size(); ++i) {
    CHECK(solved.nominal_costs[i + 1] <=
          solved.nominal_costs[i] + 1e-6 * std::abs(solved.nominal_costs[i]));
  }
}

TEST_CASE("mirrored initial offsets give mirrored pendulum solutions") {
  NonlinearSystem sys = make_pendulum(default_pendulum());
  sys.sigma_w = 1e-6 * Matrix::Identity(2, 2);
  const int T = 30;
  const NonlinearResult plus = nonlinear_i2c(sys,
                                             pendulum_regulation_config(0.2, T));
  const NonlinearResult minus = nonlinear_i2c(
      sys, pendulum_regulation_config(-0.2, T));

  REQUIRE(plus.policy.size() == minus.policy.size());
  for (size_t t = 0; t < plus.policy.size(); ++t) {
    CHECK((plus.policy[t].K - minus.policy[t].K).cwiseAbs().maxCoeff() <=
          1e-6);
    CHECK((plus.policy[t].k + minus.policy[t].k).cwiseAbs().maxCoeff() <=
          1e-6);
    CHECK((plus.nominal_x[t] + minus.nominal_x[t]).cwiseAbs().maxCoeff() <=
          1e-6);
  }
}

TEST_CASE("the nominal leaving the operating box is reported") {
  NonlinearSystem sys = make_pendulum(default_pendulum());
  sys.box_hi = Vector::Constant(2, 0.1);
  sys.box_lo = Vector::Constant(2, -0.1);
  NonlinearConfig cfg = pendulum_regulation_config(0.5, 10);
  try {
    nonlinear_i2c(sys, cfg);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("operating box") != std::string::npos);
  }
}

TEST_CASE("scenario files select the builtin pendulum") {
  Scenario s;
  s.dx = 2;
  s.du = 1;
  s.dz = 3;
  s.dy = 2;
  s.horizon = 10;
  s.tau = 0;
  NonlinearSpec spec = default_pendulum();
  spec.dt = 0.1;
  s.nonlinear = spec;
  s.dynamics.sigma_w = 1e-4 * Matrix::Identity(2, 2);
  s.cost.W = Matrix::Identity(3, 3);
  const NonlinearSystem sys = make_nonlinear_system(s);
  CHECK(sys.dx == 2);
  Vector x(2);
  x << 0.3, 0.0;
  const Vector next = sys.f(x, Vector::Zero(1));
  CHECK(next(0) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(next(1) ==
        doctest::Approx(-9.81 * std::sin(0.3) * 0.1).epsilon(1e-9));
  CHECK(sys.sigma_w(0, 0) == doctest::Approx(1e-4));

  s.nonlinear->name = "cartpole";
  CHECK_THROWS_AS(make_nonlinear_system(s), ConfigError);
}
