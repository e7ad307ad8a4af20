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

#ifndef I2C_SIM_HPP_
#define I2C_SIM_HPP_

#include <cstdint>
#include <vector>

#include "i2c/approx.hpp"
#include "i2c/model.hpp"
#include "i2c/solver.hpp"

// Seeded simulation utilities. The generator is splitmix64 with a
// Box-Muller normal transform, so identical seeds give identical streams
// on every platform, and per-rollout seeds decouple the Monte-Carlo
// kernels from the thread schedule.

namespace i2c::sim {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next_u64();
  double next_uniform();   // in (0, 1)
  double next_gaussian();  // standard normal
  Vector gaussian_vector(Eigen::Index n);

 private:
  std::uint64_t state_;
};

// Derives an independent stream for substream `index` of `seed`.
std::uint64_t substream(std::uint64_t seed, std::uint64_t index);

// Draws from N(mean, cov) via the (floored) matrix square root.
Vector sample_gaussian(Rng& rng, const Gaussian& g);

struct Rollout {
  std::vector<Vector> states;        // length T
  std::vector<Vector> controls;      // length T
  std::vector<Vector> measurements;  // length T, through the given model
};

// Simulates the scenario's dynamics for `steps` steps with process noise,
// sampling x_0 from the prior. Controls come from the scenario's pinned
// controls where present, otherwise from the control prior (sampled).
Rollout simulate_scenario(const Scenario& scenario, int steps,
                          std::uint64_t seed);

// Closed-loop quadratic cost of an affine policy on a (possibly nonlinear)
// system, one value per rollout. x_0 is sampled from the prior and process
// noise from sigma_w. The OpenMP variant fills per-rollout slots
// independently and is bit-identical to the serial reference.
std::vector<double> mc_rollout_costs(const NonlinearSystem& system,
                                     const std::vector<PolicyGain>& policy,
                                     const Gaussian& x0, const Matrix& W,
                                     const std::vector<Vector>& z_star,
                                     int n_rollouts, std::uint64_t seed);

std::vector<double> mc_rollout_costs_serial(
    const NonlinearSystem& system, const std::vector<PolicyGain>& policy,
    const Gaussian& x0, const Matrix& W, const std::vector<Vector>& z_star,
    int n_rollouts, std::uint64_t seed);

double mean(const std::vector<double>& values);

}  // namespace i2c::sim

#endif  // I2C_SIM_HPP_
