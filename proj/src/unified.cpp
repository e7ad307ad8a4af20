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

#include "i2c/unified.hpp"

#include <string>

#include "i2c/errors.hpp"

namespace i2c {

TimeVaryingObservation build_time_varying(const Scenario& scenario,
                                          const CostLikelihood& lik) {
  if (scenario.tau < 0 || scenario.tau > scenario.horizon) {
    throw ConfigError("build_time_varying: tau " + std::to_string(scenario.tau) +
                      " outside [0, " + std::to_string(scenario.horizon) + "]");
  }
  TimeVaryingObservation out;
  out.switch_time = scenario.tau;
  out.per_step.reserve(scenario.horizon);
  for (int t = 0; t < scenario.horizon; ++t) {
    out.per_step.push_back(t < scenario.tau ? scenario.measure_model
                                            : lik.obs);
  }
  return out;
}

ChainProblem build_unified_chain(const Scenario& scenario,
                                 const CostLikelihood& lik) {
  const TimeVaryingObservation tv = build_time_varying(scenario, lik);
  ChainProblem p;
  p.dx = scenario.dx;
  p.du = scenario.du;
  p.x0 = scenario.x0_prior;
  p.dyn.assign(scenario.horizon - 1, scenario.dynamics);
  p.u_prior.reserve(scenario.horizon);
  p.steps.resize(scenario.horizon);
  for (int t = 0; t < scenario.horizon; ++t) {
    p.u_prior.push_back(marginal_prior(control_prior_at(scenario, t),
                                       scenario.dx));
    p.steps[t].obs = tv.per_step[t];
    if (t < scenario.tau) {
      p.steps[t].target = scenario.measurements[t];
      p.steps[t].controlled = false;
    } else {
      p.steps[t].target = scenario.cost.z_star[t - scenario.tau];
      p.steps[t].controlled = true;
    }
  }
  return p;
}

UnifiedSolution solve_unified(const Scenario& scenario,
                              const EmOptions& options) {
  EmChainResult chain_result = run_em(
      [&scenario](double alpha) {
        return build_unified_chain(scenario,
                                   cost_to_likelihood(scenario.cost, alpha));
      },
      scenario.cost.W, options);

  UnifiedSolution out;
  out.beliefs = to_joint_beliefs(chain_result.beliefs, scenario.dx);
  out.trace = std::move(chain_result.trace);
  out.alpha = chain_result.alpha;
  out.warnings = std::move(chain_result.warnings);
  for (int t = 0; t < scenario.tau; ++t) {
    out.estimation_loglik += chain_result.beliefs.step_loglik[t];
  }
  const std::vector<JointBelief> control_segment(
      out.beliefs.begin() + scenario.tau, out.beliefs.end());
  out.policy = extract_policy(control_segment, &out.warnings);
  return out;
}

UnifiedSolution solve_unified(const Scenario& scenario, double alpha0,
                              int max_iters, double tol) {
  EmOptions options;
  options.alpha0 = alpha0;
  options.max_iters = max_iters;
  options.tol = tol;
  return solve_unified(scenario, options);
}

Gaussian apply_feedback(const Gaussian& prior_joint,
                        const Gaussian& updated_state) {
  const Eigen::Index dx = updated_state.dim();
  const Eigen::Index du = prior_joint.dim() - dx;
  if (du <= 0) {
    throw ConfigError("apply_feedback: state dimension " +
                      std::to_string(dx) + " leaves no control block in a " +
                      std::to_string(prior_joint.dim()) + "-dim joint");
  }
  const Matrix sig_xx = prior_joint.cov().topLeftCorner(dx, dx);
  const Matrix sig_ux = prior_joint.cov().bottomLeftCorner(du, dx);
  const Matrix sig_uu = prior_joint.cov().bottomRightCorner(du, du);

  const double eig = smallest_eigenvalue(sig_xx);
  if (eig <= 0.0) {
    throw NumericalError(
        "apply_feedback: singular state covariance, smallest eigenvalue " +
        std::to_string(eig));
  }
  const Matrix K = sig_ux * floored_inverse(sig_xx);
  const Vector mean =
      prior_joint.mean().tail(du) +
      K * (updated_state.mean() - prior_joint.mean().head(dx));
  const Matrix cov = sig_uu - K * sig_ux.transpose() +
                     K * updated_state.cov() * K.transpose();
  return Gaussian(mean, symmetrized(cov));
}

}  // namespace i2c
