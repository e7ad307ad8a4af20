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

#include "i2c/solver.hpp"

#include <cmath>
#include <string>

#include "i2c/errors.hpp"

namespace i2c {

namespace {

constexpr double kElboDecreaseTolerance = 1e-9;
constexpr double kGainEigFloor = 1e-10;

// alpha* for the current beliefs, with the degenerate zero-cost case
// clamped to alpha_max. Also reports the closed-form ELBO improvement of
// moving alpha -> alpha* with the beliefs held fixed.
double alpha_update(const ChainProblem& problem, const ChainBeliefs& beliefs,
                    const Matrix& W, const EmOptions& options,
                    double alpha, double* m_step_gain,
                    std::vector<std::string>* warnings) {
  const int n_dims = chain_controlled_dim(problem);
  if (n_dims == 0) {
    if (m_step_gain != nullptr) *m_step_gain = 0.0;
    return alpha;
  }
  const double expected_cost =
      chain_expected_cost(problem, beliefs.smoothed, W);
  double alpha_star;
  if (expected_cost <= static_cast<double>(n_dims) / options.alpha_max) {
    alpha_star = options.alpha_max;
    if (warnings != nullptr) {
      warnings->push_back(
          "m_step: expected cost " + std::to_string(expected_cost) +
          " yields unbounded temperature, clamped to alpha_max=" +
          std::to_string(options.alpha_max));
    }
  } else {
    alpha_star = static_cast<double>(n_dims) / expected_cost;
  }
  if (m_step_gain != nullptr) {
    // Only the likelihood normalizer and quadratic depend on alpha.
    *m_step_gain = 0.5 * (static_cast<double>(n_dims) *
                              std::log(alpha_star / alpha) -
                          (alpha_star - alpha) * expected_cost);
  }
  return alpha_star;
}

}  // namespace

ChainProblem build_control_chain(const Scenario& scenario,
                                 const CostLikelihood& lik) {
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
    if (t >= scenario.tau) {
      p.steps[t].obs = lik.obs;
      p.steps[t].target = scenario.cost.z_star[t - scenario.tau];
      p.steps[t].controlled = true;
    }
  }
  return p;
}

std::vector<JointBelief> to_joint_beliefs(const ChainBeliefs& beliefs, int dx,
                                          int t0) {
  std::vector<JointBelief> out;
  out.reserve(beliefs.filtered.size());
  for (size_t i = 0; i < beliefs.filtered.size(); ++i) {
    out.push_back(JointBelief{t0 + static_cast<int>(i), dx,
                              beliefs.filtered[i], beliefs.smoothed[i]});
  }
  return out;
}

std::vector<JointBelief> e_step(const Scenario& scenario,
                                const CostLikelihood& lik) {
  const ChainProblem problem = build_control_chain(scenario, lik);
  return to_joint_beliefs(chain_infer(problem), scenario.dx);
}

std::vector<PolicyGain> extract_policy(const std::vector<JointBelief>& beliefs,
                                       std::vector<std::string>* warnings) {
  std::vector<PolicyGain> out;
  out.reserve(beliefs.size());
  for (const JointBelief& b : beliefs) {
    const int dx = b.dx;
    const int du = static_cast<int>(b.smoothed.dim()) - dx;
    const Matrix& cov = b.smoothed.cov();
    const Matrix sig_xx = cov.topLeftCorner(dx, dx);
    const Matrix sig_ux = cov.bottomLeftCorner(du, dx);
    const Matrix sig_uu = cov.bottomRightCorner(du, du);

    if (warnings != nullptr && smallest_eigenvalue(sig_xx) < kGainEigFloor) {
      warnings->push_back(
          "extract_policy: near-singular state covariance at t=" +
          std::to_string(b.t) + ", eigenvalue floor applied");
    }
    const Matrix K = sig_ux * floored_inverse(sig_xx, kGainEigFloor);
    if (!K.allFinite()) {
      throw NumericalError("extract_policy: non-finite gain at t=" +
                           std::to_string(b.t));
    }
    PolicyGain g;
    g.t = b.t;
    g.K = K;
    g.k = b.smoothed.mean().tail(du) - K * b.smoothed.mean().head(dx);
    g.sigma_k = symmetrized(sig_uu - K * sig_ux.transpose());
    out.push_back(std::move(g));
  }
  return out;
}

double m_step_alpha(const std::vector<JointBelief>& beliefs,
                    const Scenario& scenario) {
  const CostLikelihood lik = cost_to_likelihood(scenario.cost, 1.0);
  const ChainProblem problem = build_control_chain(scenario, lik);
  if (static_cast<int>(beliefs.size()) != problem.horizon()) {
    throw ConfigError("m_step_alpha: beliefs do not cover the horizon");
  }
  ChainBeliefs cb;
  for (const JointBelief& b : beliefs) {
    cb.filtered.push_back(b.filtered);
    cb.smoothed.push_back(b.smoothed);
  }
  EmOptions options;
  std::vector<std::string> warnings;
  return alpha_update(problem, cb, scenario.cost.W, options, 1.0, nullptr,
                      &warnings);
}

double elbo(const std::vector<JointBelief>& beliefs, const Scenario& scenario,
            const CostLikelihood& lik) {
  const ChainProblem problem = build_control_chain(scenario, lik);
  if (static_cast<int>(beliefs.size()) != problem.horizon()) {
    throw ConfigError("elbo: beliefs do not cover the horizon");
  }
  ChainBeliefs cb;
  for (const JointBelief& b : beliefs) {
    cb.filtered.push_back(b.filtered);
    cb.smoothed.push_back(b.smoothed);
  }
  return chain_elbo(problem, cb);
}

EmChainResult run_em(const std::function<ChainProblem(double)>& build_chain,
                     const Matrix& W, const EmOptions& options) {
  if (!(options.alpha0 > 0.0)) {
    throw ConfigError("em: alpha0 must be positive, got " +
                      std::to_string(options.alpha0));
  }
  EmChainResult result;
  result.alpha = options.alpha0;
  double prev_elbo = 0.0;

  for (int iter = 0; iter < options.max_iters; ++iter) {
    const ChainProblem problem = build_chain(result.alpha);
    result.beliefs = chain_infer(problem);
    // The bound is tight in the linear-Gaussian E-step, so the innovation
    // log-likelihood accumulator is the ELBO; it is much better
    // conditioned than the smoothed-moments expansion when priors are
    // near-degenerate (pinned controls, known initial state).
    const double value = result.beliefs.loglik;
    if (!std::isfinite(value)) {
      throw NumericalError("em: non-finite ELBO at iteration " +
                           std::to_string(iter + 1));
    }
    result.trace.alphas.push_back(result.alpha);
    result.trace.elbos.push_back(value);
    result.trace.iterations = iter + 1;

    if (iter > 0) {
      if (value < prev_elbo - kElboDecreaseTolerance) {
        throw NumericalError(
            "em: ELBO decreased from " + std::to_string(prev_elbo) + " to " +
            std::to_string(value) + " at iteration " +
            std::to_string(iter + 1));
      }
      if (std::abs(value - prev_elbo) < options.tol) {
        result.trace.converged = true;
        break;
      }
    }
    prev_elbo = value;

    double m_step_gain = 0.0;
    const double alpha_next =
        alpha_update(problem, result.beliefs, W, options, result.alpha,
                     &m_step_gain, &result.warnings);
    // The next E-step cannot raise the ELBO by less than the M-step does;
    // a vanishing M-step gain means alpha is already at its fixed point.
    if (m_step_gain < options.tol) {
      result.trace.converged = true;
      break;
    }
    result.alpha = alpha_next;
  }
  return result;
}

EmResult em_solve(const Scenario& scenario, const EmOptions& options) {
  EmChainResult chain_result = run_em(
      [&scenario](double alpha) {
        return build_control_chain(scenario,
                                   cost_to_likelihood(scenario.cost, alpha));
      },
      scenario.cost.W, options);

  EmResult out;
  out.beliefs = to_joint_beliefs(chain_result.beliefs, scenario.dx);
  out.trace = std::move(chain_result.trace);
  out.alpha = chain_result.alpha;
  out.warnings = std::move(chain_result.warnings);
  out.policy = extract_policy(out.beliefs, &out.warnings);
  return out;
}

EmResult em_solve(const Scenario& scenario, double alpha0, int max_iters,
                  double tol) {
  EmOptions options;
  options.alpha0 = alpha0;
  options.max_iters = max_iters;
  options.tol = tol;
  return em_solve(scenario, options);
}

}  // namespace i2c
