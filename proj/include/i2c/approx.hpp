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

#ifndef I2C_APPROX_HPP_
#define I2C_APPROX_HPP_

#include <functional>
#include <string>
#include <vector>

#include "i2c/solver.hpp"

// First-order approximate inference for nonlinear dynamics and nonlinear
// target maps: linearize along a nominal trajectory, solve the linear
// problem, relinearize at the smoothed means, repeat.

namespace i2c {

using StateMap = std::function<Vector(const Vector&, const Vector&)>;

struct NonlinearSystem {
  int dx = 0;
  int du = 0;
  int dz = 0;
  StateMap f;  // discrete-time step (x, u) -> x_next
  StateMap h;  // target map (x, u) -> z
  Matrix sigma_w;
  Vector box_lo;  // operating box on the state
  Vector box_hi;
};

// Central finite-difference Jacobians of `map` at (x0, u0), plus the
// affine offset c = map(x0, u0) - A x0 - B u0.
void linearize(const StateMap& map, const Vector& x0, const Vector& u0,
               double eps, Matrix* A, Matrix* B, Vector* c);

// Built-in pendulum with angle theta and rate omega:
//   theta_dd = -(g / l) sin(theta) + gain * u / (m l^2),
// discretized by an explicit Euler step of length dt. The target map
// stacks state and control, z = [x; u].
NonlinearSystem make_pendulum(const NonlinearSpec& spec);

NonlinearSystem wrap_linear(const LinearDynamics& dyn,
                            const QuadraticCost& cost);

NonlinearSystem make_nonlinear_system(const Scenario& scenario);

struct NonlinearConfig {
  Gaussian x0{Vector::Zero(0), Matrix::Zero(0, 0)};
  std::vector<Gaussian> u_prior;  // T entries
  Matrix W;
  std::vector<Vector> z_star;     // T entries
  int outer_iters = 20;
  double nominal_tol = 1e-6;
  double fd_eps = 1e-5;
  EmOptions em;
};

NonlinearConfig nonlinear_config_from(const Scenario& scenario);

struct NonlinearResult {
  std::vector<JointBelief> beliefs;
  std::vector<PolicyGain> policy;
  EMTrace trace;                       // inner EM trace of the last sweep
  std::vector<double> nominal_costs;  // quadratic cost of each nominal
  std::vector<Vector> nominal_x;
  std::vector<Vector> nominal_u;
  double alpha = 1.0;
  int outer_iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

// Iterated linearization: each sweep linearizes f and h along the nominal,
// runs the linear EM to convergence, and moves the nominal to the smoothed
// means. Throws NumericalError if the nominal leaves the operating box.
NonlinearResult nonlinear_i2c(const NonlinearSystem& system,
                              const NonlinearConfig& config);

}  // namespace i2c

#endif  // I2C_APPROX_HPP_
