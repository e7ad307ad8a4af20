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

#include "i2c/gauss.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "i2c/errors.hpp"

namespace i2c {

namespace {

constexpr double kPsdTolerance = -1e-9;
constexpr double kClampFloor = 1e-12;

std::string shape_str(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

}  // namespace

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double smallest_eigenvalue(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Matrix floored_inverse(const Matrix& m, double floor) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m));
  Vector inv_eigs = es.eigenvalues().cwiseMax(floor).cwiseInverse();
  return symmetrized(es.eigenvectors() * inv_eigs.asDiagonal() *
                     es.eigenvectors().transpose());
}

double floored_log_det(const Matrix& m, double floor) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseMax(floor).array().log().sum();
}

Matrix symmetric_solve(const Matrix& m, const Matrix& rhs, double floor) {
  return floored_inverse(m, floor) * rhs;
}

Gaussian::Gaussian(Vector mean, Matrix cov, CovPolicy policy)
    : mean_(std::move(mean)), cov_(symmetrized(cov)) {
  if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size()) {
    throw ConfigError("Gaussian: covariance shape " + shape_str(cov_) +
                      " does not match mean dimension " +
                      std::to_string(mean_.size()));
  }
  if (!mean_.allFinite() || !cov_.allFinite()) {
    throw NumericalError("Gaussian: non-finite mean or covariance");
  }
  if (cov_.rows() == 0) return;
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov_);
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < kPsdTolerance) {
    throw ConfigError("Gaussian: covariance not PSD, smallest eigenvalue " +
                      std::to_string(min_eig));
  }
  if (policy == CovPolicy::kClamp && min_eig < kClampFloor) {
    Vector eigs = es.eigenvalues().cwiseMax(kClampFloor);
    cov_ = symmetrized(es.eigenvectors() * eigs.asDiagonal() *
                       es.eigenvectors().transpose());
  }
}

Gaussian marginalize(const Gaussian& joint, Eigen::Index offset,
                     Eigen::Index len) {
  if (offset < 0 || len < 0 || offset + len > joint.dim()) {
    throw ConfigError("marginalize: block [" + std::to_string(offset) + ", " +
                      std::to_string(offset + len) +
                      ") out of range for dimension " +
                      std::to_string(joint.dim()));
  }
  return Gaussian(joint.mean().segment(offset, len),
                  joint.cov().block(offset, offset, len, len));
}

Gaussian condition(const Gaussian& joint, const Vector& b_value) {
  const Eigen::Index nb = b_value.size();
  const Eigen::Index na = joint.dim() - nb;
  if (na < 0) {
    throw ConfigError("condition: value dimension " + std::to_string(nb) +
                      " exceeds joint dimension " +
                      std::to_string(joint.dim()));
  }
  const Matrix sig_aa = joint.cov().topLeftCorner(na, na);
  const Matrix sig_ab = joint.cov().topRightCorner(na, nb);
  const Matrix sig_bb = joint.cov().bottomRightCorner(nb, nb);

  Eigen::SelfAdjointEigenSolver<Matrix> es(sig_bb);
  const double eig_min = es.eigenvalues().minCoeff();
  const double eig_max = es.eigenvalues().maxCoeff();
  if (eig_min <= 0.0) {
    throw NumericalError(
        "condition: singular conditioning covariance, condition number " +
        std::to_string(eig_max / std::max(eig_min, 1e-300)));
  }
  const Matrix sig_bb_inv = symmetrized(
      es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
      es.eigenvectors().transpose());

  const Matrix gain = sig_ab * sig_bb_inv;
  Vector mean = joint.mean().head(na) +
                gain * (b_value - joint.mean().tail(nb));
  Matrix cov = sig_aa - gain * sig_ab.transpose();
  return Gaussian(std::move(mean), std::move(cov));
}

Gaussian propagate_affine(const Gaussian& input, const Matrix& F,
                          const Vector& f, const Matrix& sigma_add) {
  if (F.cols() != input.dim() || F.rows() != f.size() ||
      sigma_add.rows() != F.rows() || sigma_add.cols() != F.rows()) {
    throw ConfigError("propagate_affine: dimension mismatch, F " +
                      shape_str(F) + " on input of dimension " +
                      std::to_string(input.dim()));
  }
  return Gaussian(F * input.mean() + f,
                  F * input.cov() * F.transpose() + sigma_add);
}

double log_density(const Gaussian& g, const Vector& x) {
  if (x.size() != g.dim()) {
    throw ConfigError("log_density: point dimension " +
                      std::to_string(x.size()) + " vs distribution " +
                      std::to_string(g.dim()));
  }
  Eigen::LLT<Matrix> llt(g.cov());
  if (llt.info() != Eigen::Success) {
    throw NumericalError("log_density: covariance not positive definite");
  }
  const double log_det =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const Vector r = x - g.mean();
  const double quad = r.dot(llt.solve(r));
  return -0.5 * (static_cast<double>(g.dim()) * std::log(2.0 * std::numbers::pi) +
                 log_det + quad);
}

double kl_divergence(const Gaussian& q, const Gaussian& p) {
  if (q.dim() != p.dim()) {
    throw ConfigError("kl_divergence: dimension mismatch " +
                      std::to_string(q.dim()) + " vs " +
                      std::to_string(p.dim()));
  }
  Eigen::LLT<Matrix> llt(p.cov());
  if (llt.info() != Eigen::Success) {
    throw NumericalError("kl_divergence: reference covariance singular");
  }
  const double log_det_p =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double log_det_q = floored_log_det(q.cov());
  const Vector dm = p.mean() - q.mean();
  const double trace_term = llt.solve(q.cov()).trace();
  const double quad = dm.dot(llt.solve(dm));
  return 0.5 * (trace_term + quad - static_cast<double>(q.dim()) +
                log_det_p - log_det_q);
}

double entropy(const Gaussian& g) {
  const double n = static_cast<double>(g.dim());
  return 0.5 * (n * (1.0 + std::log(2.0 * std::numbers::pi)) +
                floored_log_det(g.cov()));
}

}  // namespace i2c
