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

// Times the OpenMP kernels against their serial references: ensemble
// free-energy scoring and Monte-Carlo closed-loop rollouts. Run manually:
//   ./build/bench/bench_kernels [n_policies] [n_rollouts]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "i2c/aipolicy.hpp"
#include "i2c/approx.hpp"
#include "i2c/model.hpp"
#include "i2c/sim.hpp"
#include "i2c/solver.hpp"

namespace {

using i2c::Matrix;
using i2c::Scenario;
using i2c::Vector;

Scenario bench_scenario(int T) {
  Scenario s;
  s.name = "bench";
  s.dx = 4;
  s.du = 2;
  s.dz = 6;
  s.dy = 4;
  s.horizon = T;
  s.tau = 0;
  s.dynamics.A = 0.95 * Matrix::Identity(4, 4);
  s.dynamics.A(0, 1) = 0.1;
  s.dynamics.A(2, 3) = 0.1;
  s.dynamics.B = Matrix::Zero(4, 2);
  s.dynamics.B(1, 0) = 1.0;
  s.dynamics.B(3, 1) = 1.0;
  s.dynamics.c = Vector::Zero(4);
  s.dynamics.sigma_w = 1e-4 * Matrix::Identity(4, 4);
  s.measure_model.C = Matrix::Identity(4, 4);
  s.measure_model.D = Matrix::Zero(4, 2);
  s.measure_model.e = Vector::Zero(4);
  s.measure_model.sigma_v = Matrix::Identity(4, 4);
  s.cost.W = Matrix::Identity(6, 6);
  i2c::stacked_z_map(4, 2, &s.cost.C, &s.cost.D, &s.cost.e);
  s.cost.z_star.assign(T, Vector::Zero(6));
  s.x0_prior = i2c::Gaussian(Vector::Ones(4), Matrix::Identity(4, 4));
  s.u_prior.assign(T, i2c::Gaussian(Vector::Zero(2),
                                    1e4 * Matrix::Identity(2, 2)));
  return s;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

}  // namespace

int main(int argc, char** argv) {
  const int n_policies = argc > 1 ? std::atoi(argv[1]) : 64;
  const int n_rollouts = argc > 2 ? std::atoi(argv[2]) : 200000;
  const int T = 50;

#ifdef _OPENMP
  std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
  std::printf("openmp: not enabled\n");
#endif

  const Scenario scenario = bench_scenario(T);
  const i2c::CostLikelihood lik = i2c::cost_to_likelihood(scenario.cost, 1.0);

  // Ensemble scoring.
  i2c::aipolicy::PolicyEnsemble ensemble;
  ensemble.gamma = -1.0;
  ensemble.log_prior =
      Vector::Constant(n_policies, -std::log(static_cast<double>(n_policies)));
  i2c::sim::Rng rng(7);
  for (int i = 0; i < n_policies; ++i) {
    std::vector<Vector> controls(T);
    for (int t = 0; t < T; ++t) controls[t] = 0.1 * rng.gaussian_vector(2);
    ensemble.policies.push_back(
        i2c::aipolicy::FixedPolicy{"p" + std::to_string(i), controls});
  }

  auto start = std::chrono::steady_clock::now();
  const std::vector<double> serial_scores =
      i2c::aipolicy::score_ensemble_serial(ensemble, scenario, lik);
  const double t_serial_scores = seconds_since(start);

  start = std::chrono::steady_clock::now();
  const std::vector<double> parallel_scores =
      i2c::aipolicy::score_ensemble(ensemble, scenario, lik);
  const double t_parallel_scores = seconds_since(start);

  double max_diff = 0.0;
  for (int i = 0; i < n_policies; ++i) {
    max_diff = std::max(max_diff,
                        std::abs(serial_scores[i] - parallel_scores[i]));
  }

  std::printf("ensemble scoring (%d policies, T=%d)\n", n_policies, T);
  std::printf("  serial   %8.3f s\n", t_serial_scores);
  std::printf("  openmp   %8.3f s  (speedup %.2fx, max |diff| %.3g)\n",
              t_parallel_scores, t_serial_scores / t_parallel_scores,
              max_diff);

  // Monte-Carlo rollouts under the EM policy.
  const i2c::EmResult solved = i2c::em_solve(scenario);
  const i2c::NonlinearSystem system =
      i2c::wrap_linear(scenario.dynamics, scenario.cost);

  start = std::chrono::steady_clock::now();
  const std::vector<double> serial_costs = i2c::sim::mc_rollout_costs_serial(
      system, solved.policy, scenario.x0_prior, scenario.cost.W,
      scenario.cost.z_star, n_rollouts, 0);
  const double t_serial_mc = seconds_since(start);

  start = std::chrono::steady_clock::now();
  const std::vector<double> parallel_costs = i2c::sim::mc_rollout_costs(
      system, solved.policy, scenario.x0_prior, scenario.cost.W,
      scenario.cost.z_star, n_rollouts, 0);
  const double t_parallel_mc = seconds_since(start);

  max_diff = 0.0;
  for (int i = 0; i < n_rollouts; ++i) {
    max_diff = std::max(max_diff,
                        std::abs(serial_costs[i] - parallel_costs[i]));
  }

  std::printf("monte-carlo rollouts (%d rollouts, T=%d)\n", n_rollouts, T);
  std::printf("  serial   %8.3f s  (mean cost %.4f)\n", t_serial_mc,
              i2c::sim::mean(serial_costs));
  std::printf("  openmp   %8.3f s  (speedup %.2fx, max |diff| %.3g)\n",
              t_parallel_mc, t_serial_mc / t_parallel_mc, max_diff);
  return 0;
}
