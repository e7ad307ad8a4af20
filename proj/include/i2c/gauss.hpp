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

#ifndef I2C_GAUSS_HPP_
#define I2C_GAUSS_HPP_

#include <Eigen/Dense>

namespace i2c {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// How a Gaussian constructor treats covariance eigenvalues near or below
// zero. kReject throws if the smallest eigenvalue is under -1e-9. kClamp
// additionally floors eigenvalues at 1e-12 so downstream solves stay
// well-posed; solver code uses kClamp, user-facing validation uses kReject.
enum class CovPolicy { kReject, kClamp };

// Multivariate normal in moment form. The covariance is symmetrized on
// construction; immutable afterwards.
class Gaussian {
 public:
  Gaussian(Vector mean, Matrix cov, CovPolicy policy = CovPolicy::kReject);

  const Vector& mean() const { return mean_; }
  const Matrix& cov() const { return cov_; }
  Eigen::Index dim() const { return mean_.size(); }

 private:
  Vector mean_;
  Matrix cov_;
};

// Sub-distribution over the contiguous block [offset, offset + len).
Gaussian marginalize(const Gaussian& joint, Eigen::Index offset,
                     Eigen::Index len);

// Conditional of the leading block given the trailing block at b_value.
// The split point is inferred from b_value's size.
Gaussian condition(const Gaussian& joint, const Vector& b_value);

// Pushes the distribution through x -> F x + f and adds noise Sigma_add.
Gaussian propagate_affine(const Gaussian& input, const Matrix& F,
                          const Vector& f, const Matrix& sigma_add);

// Log N(x; mean, cov). Requires a positive definite covariance.
double log_density(const Gaussian& g, const Vector& x);

// KL(q || p) in closed form. Requires p.cov positive definite.
double kl_divergence(const Gaussian& q, const Gaussian& p);

// Differential entropy 0.5 * log det(2 pi e cov), with eigenvalues floored
// at 1e-12 so degenerate directions stay finite.
double entropy(const Gaussian& g);

// --- symmetric-matrix helpers shared by the solvers ---

// (m + m^T) / 2.
Matrix symmetrized(const Matrix& m);

// Inverse through an eigendecomposition with eigenvalues floored at
// `floor`. Well-defined for any symmetric PSD input.
Matrix floored_inverse(const Matrix& m, double floor = 1e-12);

// log det with the same eigenvalue floor.
double floored_log_det(const Matrix& m, double floor = 1e-12);

// Solves m * X = rhs for symmetric PSD m, flooring tiny eigenvalues.
Matrix symmetric_solve(const Matrix& m, const Matrix& rhs,
                       double floor = 1e-12);

double smallest_eigenvalue(const Matrix& m);

}  // namespace i2c

#endif  // I2C_GAUSS_HPP_
