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

#include "i2c/aipolicy.hpp"

#include <cmath>
#include <exception>
#include <string>

#include "i2c/errors.hpp"
#include "i2c/unified.hpp"

namespace i2c::aipolicy {

namespace {

// State belief entering the controlled window: the x0 prior when tau = 0,
// otherwise the prediction after filtering the measurement segment.
Gaussian window_init(const Scenario& scenario, const CostLikelihood& lik) {
  if (scenario.tau == 0) return scenario.x0_prior;

  Scenario estimation = scenario;
  estimation.horizon = scenario.tau;
  estimation.tau = scenario.tau;
  estimation.cost.z_star.clear();
  estimation.u_prior.resize(scenario.tau, scenario.u_prior.front());
  const ChainProblem problem = build_unified_chain(estimation, lik);
  const ChainBeliefs beliefs = chain_infer(problem);

  const LinearDynamics& dyn = scenario.dynamics;
  Matrix Abar(dyn.A.rows(), dyn.A.cols() + dyn.B.cols());
  Abar << dyn.A, dyn.B;
  return propagate_affine(beliefs.filtered.back(), Abar, dyn.c, dyn.sigma_w);
}

ControlPrior pinned(const Vector& u, int dx) {
  return ControlPrior{
      Matrix::Zero(u.size(), dx), u,
      kPinnedControlVar * Matrix::Identity(u.size(), u.size())};
}

}  // namespace

PolicyEnsemble ensemble_from(const Scenario& scenario) {
  if (!scenario.ensemble.has_value()) {
    throw ConfigError("scenario has no ensemble block");
  }
  PolicyEnsemble out;
  out.gamma = scenario.ensemble->gamma;
  out.log_prior = scenario.ensemble->log_prior;
  for (const EnsemblePolicy& p : scenario.ensemble->policies) {
    out.policies.push_back(FixedPolicy{p.name, p.controls});
  }
  return out;
}

double policy_free_energy(const FixedPolicy& policy, const Scenario& scenario,
                          const CostLikelihood& lik) {
  const int window = scenario.horizon - scenario.tau;
  ChainProblem p;
  p.dx = scenario.dx;
  p.du = scenario.du;
  p.x0 = window_init(scenario, lik);
  p.dyn.assign(window - 1, scenario.dynamics);
  p.steps.resize(window);
  p.u_prior.reserve(window);

  if (const auto* controls = std::get_if<std::vector<Vector>>(&policy.u)) {
    if (static_cast<int>(controls->size()) != window) {
      throw ConfigError("policy '" + policy.name + "': " +
                        std::to_string(controls->size()) +
                        " controls for a window of " + std::to_string(window));
    }
    for (const Vector& u : *controls) p.u_prior.push_back(pinned(u, p.dx));
  } else {
    const auto& gains = std::get<std::vector<PolicyGain>>(policy.u);
    if (static_cast<int>(gains.size()) != window) {
      throw ConfigError("policy '" + policy.name + "': " +
                        std::to_string(gains.size()) +
                        " gains for a window of " + std::to_string(window));
    }
    for (const PolicyGain& g : gains) {
      p.u_prior.push_back(ControlPrior{g.K, g.k,
                                       g.sigma_k + kPinnedControlVar *
                                           Matrix::Identity(p.du, p.du)});
    }
  }
  for (int t = 0; t < window; ++t) {
    p.steps[t].obs = lik.obs;
    p.steps[t].target = scenario.cost.z_star[t];
    p.steps[t].controlled = true;
  }
  // The bound is tight for the exact linear-Gaussian posterior, so the
  // window's free energy is the negated innovation log-likelihood.
  return -chain_infer(p).loglik;
}

Vector policy_posterior(const PolicyEnsemble& ensemble,
                        const Vector& free_energies) {
  if (free_energies.size() != ensemble.log_prior.size()) {
    throw ConfigError("policy_posterior: " +
                      std::to_string(free_energies.size()) +
                      " scores for " + std::to_string(ensemble.log_prior.size()) +
                      " policies");
  }
  const Vector scores = ensemble.log_prior + ensemble.gamma * free_energies;
  if (!scores.allFinite()) {
    throw NumericalError("policy_posterior: non-finite scores");
  }
  const Vector shifted = scores.array() - scores.maxCoeff();
  const Vector weights = shifted.array().exp();
  return weights / weights.sum();
}

std::vector<double> score_ensemble_serial(const PolicyEnsemble& ensemble,
                                          const Scenario& scenario,
                                          const CostLikelihood& lik) {
  std::vector<double> out(ensemble.policies.size());
  for (size_t i = 0; i < ensemble.policies.size(); ++i) {
    out[i] = policy_free_energy(ensemble.policies[i], scenario, lik);
  }
  return out;
}

std::vector<double> score_ensemble(const PolicyEnsemble& ensemble,
                                   const Scenario& scenario,
                                   const CostLikelihood& lik) {
  std::vector<double> out(ensemble.policies.size());
  const int n = static_cast<int>(ensemble.policies.size());
  std::exception_ptr failure;  // exceptions must not unwind out of the loop
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      out[i] = policy_free_energy(ensemble.policies[i], scenario, lik);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace i2c::aipolicy
