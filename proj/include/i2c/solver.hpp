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

#ifndef I2C_SOLVER_HPP_
#define I2C_SOLVER_HPP_

#include <functional>
#include <string>
#include <vector>

#include "i2c/chain.hpp"
#include "i2c/gauss.hpp"
#include "i2c/model.hpp"

namespace i2c {

// Filtered and smoothed joint belief over [x_t; u_t].
struct JointBelief {
  int t = 0;
  int dx = 0;
  Gaussian filtered{Vector::Zero(0), Matrix::Zero(0, 0)};
  Gaussian smoothed{Vector::Zero(0), Matrix::Zero(0, 0)};
};

// Affine feedback law q(u_t | x_t) = N(K x_t + k, sigma_k).
struct PolicyGain {
  Matrix K;
  Vector k;
  Matrix sigma_k;
  int t = 0;
};

// Temperature iterates and objective values, one entry per EM iteration.
struct EMTrace {
  std::vector<double> alphas;
  std::vector<double> elbos;
  int iterations = 0;
  bool converged = false;
};

struct EmOptions {
  double alpha0 = 1.0;
  int max_iters = 100;
  double tol = 1e-8;
  double alpha_max = 1e12;
};

struct EmResult {
  std::vector<JointBelief> beliefs;
  std::vector<PolicyGain> policy;
  EMTrace trace;
  double alpha = 1.0;
  std::vector<std::string> warnings;
};

// Forward/backward inference over the joint chain at a fixed temperature.
// Steps before scenario.tau carry no observation (measurements are the
// unified solver's concern); steps at and after tau observe z*_t through
// the cost likelihood.
std::vector<JointBelief> e_step(const Scenario& scenario,
                                const CostLikelihood& lik);

// K_t = Sigma_ux Sigma_xx^{-1} and companions from the smoothed joints.
// Near-singular state covariances are inverted with an eigenvalue floor of
// 1e-10 and reported through `warnings`.
std::vector<PolicyGain> extract_policy(const std::vector<JointBelief>& beliefs,
                                       std::vector<std::string>* warnings =
                                           nullptr);

// Closed-form maximizer of the expected complete-data log-likelihood:
// alpha* = (d_z N) / sum_t E_q[(z_t - z*_t)^T W (z_t - z*_t)].
double m_step_alpha(const std::vector<JointBelief>& beliefs,
                    const Scenario& scenario);

// ELBO from smoothed moments. Tight (equal to the pseudo-measurement
// marginal log-likelihood) in the linear-Gaussian case.
double elbo(const std::vector<JointBelief>& beliefs, const Scenario& scenario,
            const CostLikelihood& lik);

// Full EM solve: alternate e_step and m_step_alpha until the ELBO change
// drops below tol or max_iters is reached. An ELBO decrease beyond 1e-9
// throws NumericalError.
EmResult em_solve(const Scenario& scenario, double alpha0 = 1.0,
                  int max_iters = 100, double tol = 1e-8);
EmResult em_solve(const Scenario& scenario, const EmOptions& options);

// --- shared internals, reused by the unified and linearized solvers ---

// Builds the pure-control chain for the scenario (no measurement steps).
ChainProblem build_control_chain(const Scenario& scenario,
                                 const CostLikelihood& lik);

std::vector<JointBelief> to_joint_beliefs(const ChainBeliefs& beliefs, int dx,
                                          int t0 = 0);

struct EmChainResult {
  ChainBeliefs beliefs;
  EMTrace trace;
  double alpha = 1.0;
  std::vector<std::string> warnings;
};

// Generic EM loop over a chain family parameterized by the temperature.
EmChainResult run_em(const std::function<ChainProblem(double)>& build_chain,
                     const Matrix& W, const EmOptions& options);

}  // namespace i2c

#endif  // I2C_SOLVER_HPP_
