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

#include "i2c/aipolicy.hpp"
#include "i2c/errors.hpp"
#include "test_support.hpp"

using namespace i2c;
using aipolicy::FixedPolicy;
using aipolicy::PolicyEnsemble;
using aipolicy::policy_free_energy;
using aipolicy::policy_posterior;

namespace {

PolicyEnsemble uniform_ensemble(int n, double gamma) {
  PolicyEnsemble ensemble;
  ensemble.gamma = gamma;
  ensemble.log_prior =
      Vector::Constant(n, -std::log(static_cast<double>(n)));
  for (int i = 0; i < n; ++i) {
    ensemble.policies.push_back(
        FixedPolicy{"p" + std::to_string(i), std::vector<Vector>{}});
  }
  return ensemble;
}

// Scalar system with a reachable target trajectory: from x0 = 1 the
// control sequence (-1, 0, 0) holds the state at zero.
Scenario reachable_target_scenario() {
  Scenario s;
  s.dx = s.du = 1;
  s.dz = 2;
  s.dy = 1;
  s.horizon = 3;
  s.tau = 0;
  s.dynamics.A = Matrix::Identity(1, 1);
  s.dynamics.B = Matrix::Identity(1, 1);
  s.dynamics.c = Vector::Zero(1);
  s.dynamics.sigma_w = 1e-10 * Matrix::Identity(1, 1);
  s.measure_model.C = Matrix::Identity(1, 1);
  s.measure_model.D = Matrix::Zero(1, 1);
  s.measure_model.e = Vector::Zero(1);
  s.measure_model.sigma_v = Matrix::Identity(1, 1);
  s.cost.W = Matrix::Identity(2, 2);
  stacked_z_map(1, 1, &s.cost.C, &s.cost.D, &s.cost.e);
  Vector z0(2), z_rest(2);
  z0 << 1.0, -1.0;
  z_rest << 0.0, 0.0;
  s.cost.z_star = {z0, z_rest, z_rest};
  s.x0_prior = Gaussian(Vector::Constant(1, 1.0),
                        1e-10 * Matrix::Identity(1, 1));
  s.u_prior.assign(3, Gaussian(Vector::Zero(1), Matrix::Identity(1, 1)));
  return s;
}

std::vector<Vector> controls1(double a, double b, double c) {
  return {Vector::Constant(1, a), Vector::Constant(1, b),
          Vector::Constant(1, c)};
}

}  // namespace

TEST_CASE("policy_posterior symmetry, hand case, and zero temperature") {
  PolicyEnsemble two = uniform_ensemble(2, 3.7);
  Vector equal(2);
  equal << 5.0, 5.0;
  const Vector symmetric = policy_posterior(two, equal);
  CHECK(symmetric(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(symmetric(1) == doctest::Approx(0.5).epsilon(1e-14));

  two.gamma = 1.0;
  Vector scores(2);
  scores << std::log(2.0), 0.0;
  const Vector hand = policy_posterior(two, scores);
  CHECK(hand(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(hand(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  PolicyEnsemble cold = uniform_ensemble(3, 0.0);
  Vector prior(3);
  prior << std::log(0.5), std::log(0.3), std::log(0.2);
  cold.log_prior = prior;
  Vector any(3);
  any << 17.0, -4.0, 100.0;
  const Vector recovered = policy_posterior(cold, any);
  for (int i = 0; i < 3; ++i) {
    CHECK(recovered(i) ==
          doctest::Approx(std::exp(prior(i))).epsilon(1e-12));
  }
}

TEST_CASE("policy_posterior is a simplex element, shift-invariant, and "
          "sharpens with temperature") {
  std::mt19937_64 rng(113);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 5);
    PolicyEnsemble ensemble = uniform_ensemble(n, 0.0);
    Vector raw = testing::random_vector(rng, n);
    ensemble.log_prior = raw.array() - std::log(raw.array().exp().sum());
    ensemble.gamma = testing::random_vector(rng, 1)(0);
    const Vector scores = 3.0 * testing::random_vector(rng, n);

    const Vector p = policy_posterior(ensemble, scores);
    CHECK(p.minCoeff() >= 0.0);
    CHECK(std::abs(p.sum() - 1.0) <= 1e-12);

    const Vector shifted = policy_posterior(
        ensemble, scores + Vector::Constant(n, 123.456));
    CHECK((p - shifted).cwiseAbs().maxCoeff() <= 1e-12);
  }

  // monotone sharpening: posterior mass on the argmax of gamma * F is
  // non-decreasing in |gamma|
  PolicyEnsemble ensemble = uniform_ensemble(4, 0.0);
  Vector scores(4);
  scores << 1.0, 0.2, -0.5, 0.9;
  double previous = 0.0;
  for (double gamma = 0.0; gamma <= 8.0; gamma += 0.25) {
    ensemble.gamma = gamma;
    const Vector p = policy_posterior(ensemble, scores);
    Eigen::Index argmax;
    (ensemble.gamma * scores).maxCoeff(&argmax);
    if (gamma > 0.0) {
      CHECK(p(argmax) >= previous - 1e-12);
    }
    previous = p(ensemble.gamma == 0.0 ? 0 : argmax);
  }

  Vector bad(4);
  bad << 1.0, std::numeric_limits<double>::infinity(), 0.0, 0.0;
  CHECK_THROWS_AS(policy_posterior(ensemble, bad), NumericalError);
}

TEST_CASE("the policy that reaches the targets has minimal free energy") {
  const Scenario s = reachable_target_scenario();
  const CostLikelihood lik = cost_to_likelihood(s.cost, 10.0);

  const FixedPolicy exact{"exact", controls1(-1.0, 0.0, 0.0)};
  const FixedPolicy idle{"idle", controls1(0.0, 0.0, 0.0)};
  const FixedPolicy wrong{"wrong", controls1(1.0, 0.0, 0.0)};

  const double f_exact = policy_free_energy(exact, s, lik);
  const double f_idle = policy_free_energy(idle, s, lik);
  const double f_wrong = policy_free_energy(wrong, s, lik);
  CHECK(f_exact < f_idle);
  CHECK(f_idle < f_wrong);

  // determinism: identical policies score identically
  const FixedPolicy copy{"copy", controls1(-1.0, 0.0, 0.0)};
  CHECK(policy_free_energy(copy, s, lik) ==
        doctest::Approx(f_exact).epsilon(1e-12));

  // an uninformative likelihood cannot prefer any policy
  const CostLikelihood flat = cost_to_likelihood(s.cost, 1e-12);
  const double g_exact = policy_free_energy(exact, s, flat);
  const double g_idle = policy_free_energy(idle, s, flat);
  const double g_wrong = policy_free_energy(wrong, s, flat);
  CHECK(std::abs(g_exact - g_idle) <= 1e-9);
  CHECK(std::abs(g_idle - g_wrong) <= 1e-9);
}

TEST_CASE("gain policies score like their pinned open-loop equivalents") {
  const Scenario s = reachable_target_scenario();
  const CostLikelihood lik = cost_to_likelihood(s.cost, 5.0);
  const FixedPolicy open_loop{"open", controls1(-1.0, 0.5, 0.0)};

  std::vector<PolicyGain> gains;
  for (int t = 0; t < 3; ++t) {
    const double k_val = t == 0 ? -1.0 : (t == 1 ? 0.5 : 0.0);
    gains.push_back(PolicyGain{Matrix::Zero(1, 1),
                               Vector::Constant(1, k_val),
                               Matrix::Zero(1, 1), t});
  }
  const FixedPolicy feedback{"gains", gains};
  CHECK(policy_free_energy(feedback, s, lik) ==
        doctest::Approx(policy_free_energy(open_loop, s, lik))
            .epsilon(1e-10));
}

TEST_CASE("scoring a scenario with a measurement segment uses the estimate") {
  testing::UnifiedDemo demo = testing::make_unified_demo(17, 4, 8);
  Scenario s = demo.scenario;
  const CostLikelihood lik = cost_to_likelihood(s.cost, 1.0);
  const FixedPolicy idle{"idle",
                         std::vector<Vector>(4, Vector::Zero(1))};
  const double f = policy_free_energy(idle, s, lik);
  CHECK(std::isfinite(f));

  // scoring must depend on the measurements through the window estimate
  Scenario shifted = s;
  for (Vector& y : shifted.measurements) y(0) += 5.0;
  const double f_shifted = policy_free_energy(idle, shifted, lik);
  CHECK(std::abs(f - f_shifted) > 1e-3);
}

TEST_CASE("ensemble specs from scenario files validate") {
  Scenario s = reachable_target_scenario();
  EnsembleSpec spec;
  spec.gamma = -1.0;
  spec.policies.push_back(EnsemblePolicy{"a", controls1(-1.0, 0.0, 0.0)});
  spec.policies.push_back(EnsemblePolicy{"b", controls1(0.0, 0.0, 0.0)});
  spec.log_prior = Vector::Constant(2, -std::log(2.0));
  s.ensemble = spec;
  validate_scenario(s);

  const aipolicy::PolicyEnsemble ensemble = aipolicy::ensemble_from(s);
  CHECK(ensemble.policies.size() == 2);
  CHECK(ensemble.gamma == -1.0);

  s.ensemble->log_prior = Vector::Constant(2, -std::log(3.0));
  CHECK_THROWS_AS(validate_scenario(s), ConfigError);
}
