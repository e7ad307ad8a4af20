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

#ifndef I2C_ORACLE_HPP_
#define I2C_ORACLE_HPP_

#include <vector>

#include "i2c/gauss.hpp"
#include "i2c/model.hpp"

// Classical reference solvers. These deliberately do not reuse the solver
// code paths in solver.cpp; equivalence tests compare independent
// implementations.

namespace i2c::oracle {

// Finite-horizon tracking LQR: u_t = K_t x_t + k_t minimizing
// sum_{t<T} (x_t - x*_t)^T Q (x_t - x*_t) + u_t^T R u_t + x_T^T Qf x_T.
struct LqrSolution {
  std::vector<Matrix> K;  // T gains
  std::vector<Vector> k;  // T feedforward terms
  std::vector<Matrix> P;  // T+1 cost-to-go Hessians
};

LqrSolution lqr_solve(const LinearDynamics& dyn, const Matrix& Q,
                      const Matrix& R, const Matrix& Qf,
                      const std::vector<Vector>& x_star, int T);

struct SmootherResult {
  std::vector<Gaussian> filtered;
  std::vector<Gaussian> smoothed;
  double loglik = 0.0;
};

// Predict/update recursion over states x_0..x_N with N = controls.size().
// Measurement y_t updates x_t for t < measurements.size(); remaining steps
// are predict-only, so an empty measurement list yields the prior rollout.
SmootherResult kalman_filter(const LinearDynamics& dyn,
                             const LinearObservation& obs, const Gaussian& x0,
                             const std::vector<Vector>& measurements,
                             const std::vector<Vector>& controls);

// Backward Rauch-Tung-Striebel pass over a filter output.
SmootherResult rts_smooth(const SmootherResult& filter_out,
                          const LinearDynamics& dyn,
                          const std::vector<Vector>& controls);

}  // namespace i2c::oracle

#endif  // I2C_ORACLE_HPP_
