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

#ifndef I2C_MODEL_HPP_
#define I2C_MODEL_HPP_

#include <optional>
#include <string>
#include <vector>

#include "i2c/gauss.hpp"

namespace i2c {

// x_{t+1} = A x_t + B u_t + c + w,  w ~ N(0, sigma_w).
struct LinearDynamics {
  Matrix A;
  Matrix B;
  Vector c;
  Matrix sigma_w;
};

// o = C x + D u + e + v,  v ~ N(0, sigma_v). Serves both as measurement
// model (output dimension d_y) and as target map (output dimension d_z).
struct LinearObservation {
  Matrix C;
  Matrix D;
  Vector e;
  Matrix sigma_v;
};

// Quadratic tracking cost in z-space: sum_t (z_t - z_star_t)^T W (z_t - z_star_t)
// with z = C x + D u + e. The default map stacks state and control,
// z = [x; u], in which case state and control weights sit in W's diagonal
// blocks.
struct QuadraticCost {
  Matrix W;
  std::vector<Vector> z_star;  // one entry per controlled timestep
  Matrix C;
  Matrix D;
  Vector e;
};

// The cost translated into a Gaussian pseudo-observation: precision
// alpha * W, i.e. sigma_v = (alpha W)^{-1}. log_beta is the Gaussian
// log-normalizer so that evaluating the likelihood at z reproduces
// -(alpha/2)(z - z*)^T W (z - z*) + log_beta.
struct CostLikelihood {
  LinearObservation obs;
  double alpha = 1.0;
  double log_beta = 0.0;
};

// Parameters of the built-in nonlinear systems (see approx.hpp).
struct NonlinearSpec {
  std::string name;
  double mass = 1.0;
  double length = 1.0;
  double gravity = 9.81;
  double dt = 0.05;
  double control_gain = 1.0;
};

// One fixed policy for ensemble scoring: an open-loop control sequence
// over the controlled window.
struct EnsemblePolicy {
  std::string name;
  std::vector<Vector> controls;
};

struct EnsembleSpec {
  double gamma = 1.0;
  std::vector<EnsemblePolicy> policies;
  Vector log_prior;
};

// A full problem statement. Timesteps t = 0..T-1 each carry a
// pseudo-observation: a recorded measurement y*_t for t < tau, a cost
// target z*_t for t >= tau.
struct Scenario {
  std::string name;
  int dx = 0;
  int du = 0;
  int dz = 0;
  int dy = 0;
  int horizon = 0;  // T
  int tau = 0;      // estimation/control switch, in [0, T]
  LinearDynamics dynamics;
  LinearObservation measure_model;
  QuadraticCost cost;
  Gaussian x0_prior{Vector::Zero(0), Matrix::Zero(0, 0)};
  std::vector<Gaussian> u_prior;         // per-step marginal prior, length T
  std::vector<Vector> measurements;      // length tau
  std::vector<Vector> pinned_controls;   // recorded controls, empty if none
  std::optional<NonlinearSpec> nonlinear;
  std::optional<EnsembleSpec> ensemble;
};

// Variance used when a scenario pins a control to a recorded value.
inline constexpr double kPinnedControlVar = 1e-12;

// Maps the quadratic cost to its Gaussian likelihood at temperature alpha.
CostLikelihood cost_to_likelihood(const QuadraticCost& cost, double alpha);

// Unnormalized log-probability of the binary optimality variable,
// log p(o=1 | x, u) = -alpha * C(x, u) up to a constant.
double optimality_loglik(double cost_value, double alpha);

// Stacked z-map z = [x; u]: C = [I; 0], D = [0; I], e = 0.
void stacked_z_map(int dx, int du, Matrix* C, Matrix* D, Vector* e);

// Validates every invariant: dimension consistency, PSD/PD covariances,
// sequence lengths. Throws ConfigError naming the offending field.
void validate_scenario(const Scenario& s);

// Effective per-step control prior: near-delta at the pinned control when
// one is recorded for step t, the declared prior otherwise.
Gaussian control_prior_at(const Scenario& s, int t);

}  // namespace i2c

#endif  // I2C_MODEL_HPP_
