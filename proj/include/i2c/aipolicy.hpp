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

#ifndef I2C_AIPOLICY_HPP_
#define I2C_AIPOLICY_HPP_

#include <string>
#include <variant>
#include <vector>

#include "i2c/solver.hpp"

// Policy selection over an ensemble of fixed policies: score each policy
// by its accumulated future free energy, then take a softmax.

namespace i2c::aipolicy {

// A fixed policy over the controlled window [tau, T): either an open-loop
// control sequence or an affine feedback law per step.
struct FixedPolicy {
  std::string name;
  std::variant<std::vector<Vector>, std::vector<PolicyGain>> u;
};

struct PolicyEnsemble {
  std::vector<FixedPolicy> policies;
  Vector log_prior;  // exp entries sum to 1
  double gamma = 1.0;
};

PolicyEnsemble ensemble_from(const Scenario& scenario);

// Accumulated free energy sum_t F = -ELBO of the controlled window with
// the controls pinned to the policy. For tau > 0 the window starts from
// the filtered state estimate after the measurement segment.
double policy_free_energy(const FixedPolicy& policy, const Scenario& scenario,
                          const CostLikelihood& lik);

// softmax(log_prior + gamma * free_energies), computed with
// max-subtraction. The sign of the exponent follows the scoring rule as
// printed; pass a negative gamma to prefer low free energy.
Vector policy_posterior(const PolicyEnsemble& ensemble,
                        const Vector& free_energies);

// Free energies for every ensemble member. The OpenMP variant scores
// policies independently and matches the serial reference exactly.
std::vector<double> score_ensemble(const PolicyEnsemble& ensemble,
                                   const Scenario& scenario,
                                   const CostLikelihood& lik);

std::vector<double> score_ensemble_serial(const PolicyEnsemble& ensemble,
                                          const Scenario& scenario,
                                          const CostLikelihood& lik);

}  // namespace i2c::aipolicy

#endif  // I2C_AIPOLICY_HPP_
