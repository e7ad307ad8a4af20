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

#ifndef I2C_CHAIN_HPP_
#define I2C_CHAIN_HPP_

#include <optional>
#include <vector>

#include "i2c/gauss.hpp"
#include "i2c/model.hpp"

// Inference over the joint state-action chain s_t = [x_t; u_t]. Every
// solver (control, unified estimation+control, policy scoring, iterated
// linearization) builds a ChainProblem and runs the same forward/backward
// pass.

namespace i2c {

// Per-step control prior u_t | x_t ~ N(K x_t + k, cov). Marginal priors
// have K = 0; the affine form admits fixed feedback policies.
struct ControlPrior {
  Matrix K;
  Vector k;
  Matrix cov;
};

ControlPrior marginal_prior(const Gaussian& g, int dx);

// One pseudo-observation o_t = C x_t + D u_t + e + v against a recorded
// target. Steps without an observation are pure prediction. `controlled`
// marks cost-likelihood steps, which participate in the temperature
// M-step.
struct ChainStep {
  std::optional<LinearObservation> obs;
  Vector target;
  bool controlled = false;
};

struct ChainProblem {
  int dx = 0;
  int du = 0;
  Gaussian x0{Vector::Zero(0), Matrix::Zero(0, 0)};
  std::vector<LinearDynamics> dyn;    // T-1 transitions (may be time-varying)
  std::vector<ControlPrior> u_prior;  // T entries
  std::vector<ChainStep> steps;       // T entries
  int horizon() const { return static_cast<int>(steps.size()); }
};

struct ChainBeliefs {
  std::vector<Gaussian> filtered;
  std::vector<Gaussian> smoothed;
  std::vector<double> step_loglik;  // innovation log-density, 0 if no obs
  double loglik = 0.0;              // sum of step_loglik
};

// Joint [x; u] from an x-marginal and the conditional control prior.
Gaussian joint_prior(const Gaussian& x_belief, const ControlPrior& prior);

// Predicted joint at step t (t >= 1) from the filtered joint at t-1.
Gaussian predict_joint(const ChainProblem& problem, int t,
                       const Gaussian& filtered_prev);

// Forward filter plus backward smoother. Throws NumericalError naming the
// timestep on singular innovations or non-finite values.
ChainBeliefs chain_infer(const ChainProblem& problem);

// Evidence lower bound E_q[log p] + H[q] from smoothed moments, using the
// backward (filter-side) entropy decomposition of the Markov chain. For
// the exact linear-Gaussian posterior this equals the filter's marginal
// log-likelihood.
double chain_elbo(const ChainProblem& problem, const ChainBeliefs& beliefs);

// Sum over controlled steps of E_q[(z_t - z*_t)^T W (z_t - z*_t)] under
// the smoothed beliefs.
double chain_expected_cost(const ChainProblem& problem,
                           const std::vector<Gaussian>& smoothed,
                           const Matrix& W);

// Total pseudo-observation dimension over controlled steps (N * d_z).
int chain_controlled_dim(const ChainProblem& problem);

}  // namespace i2c

#endif  // I2C_CHAIN_HPP_
