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

#ifndef I2C_UNIFIED_HPP_
#define I2C_UNIFIED_HPP_

#include <vector>

#include "i2c/solver.hpp"

// Joint state estimation and optimal control under one objective: the
// observation model is time dependent, switching from the measurement
// model to the cost likelihood at t = tau.

namespace i2c {

struct TimeVaryingObservation {
  std::vector<LinearObservation> per_step;  // T entries
  int switch_time = 0;                      // tau
};

// Assembles the per-step observation models: the scenario's measurement
// model before tau, the cost likelihood from tau on.
TimeVaryingObservation build_time_varying(const Scenario& scenario,
                                          const CostLikelihood& lik);

struct UnifiedSolution {
  std::vector<JointBelief> beliefs;   // t in [0, T)
  std::vector<PolicyGain> policy;     // t in [tau, T)
  double estimation_loglik = 0.0;     // measurement-segment innovations
  EMTrace trace;
  double alpha = 1.0;
  std::vector<std::string> warnings;
};

// EM over the time-varying chain: the pseudo-data are the recorded
// measurements before tau and the cost targets after; the temperature
// M-step uses controlled steps only.
UnifiedSolution solve_unified(const Scenario& scenario, double alpha0 = 1.0,
                              int max_iters = 100, double tol = 1e-8);
UnifiedSolution solve_unified(const Scenario& scenario,
                              const EmOptions& options);

// Control marginal after replacing the state marginal of the prior joint
// [x; u] with an updated estimate: mean through the conditional gain,
// covariance Sigma_uu - Sigma_ux Sigma_xx^{-1} Sigma_xu + K Sigma'_xx K^T.
Gaussian apply_feedback(const Gaussian& prior_joint,
                        const Gaussian& updated_state);

// The unified chain (exposed for the policy-scoring module).
ChainProblem build_unified_chain(const Scenario& scenario,
                                 const CostLikelihood& lik);

}  // namespace i2c

#endif  // I2C_UNIFIED_HPP_
