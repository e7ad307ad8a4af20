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

#include "i2c/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "i2c/errors.hpp"

namespace i2c {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void check_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                 const std::string& field) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << field << ": expected " << rows << "x" << cols << ", got "
       << m.rows() << "x" << m.cols();
    throw ConfigError(os.str());
  }
}

void check_psd(const Matrix& m, const std::string& field) {
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  require(asym <= 1e-10, field + ": not symmetric, max asymmetry " +
                             std::to_string(asym));
  const double eig = smallest_eigenvalue(m);
  require(eig >= -1e-9, field + ": not PSD, smallest eigenvalue " +
                            std::to_string(eig));
}

void check_pd(const Matrix& m, const std::string& field) {
  check_psd(m, field);
  const double eig = smallest_eigenvalue(m);
  require(eig > 0.0, field + ": not positive definite, smallest eigenvalue " +
                         std::to_string(eig));
}

}  // namespace

void stacked_z_map(int dx, int du, Matrix* C, Matrix* D, Vector* e) {
  const int dz = dx + du;
  *C = Matrix::Zero(dz, dx);
  C->topRows(dx) = Matrix::Identity(dx, dx);
  *D = Matrix::Zero(dz, du);
  D->bottomRows(du) = Matrix::Identity(du, du);
  *e = Vector::Zero(dz);
}

CostLikelihood cost_to_likelihood(const QuadraticCost& cost, double alpha) {
  if (!(alpha > 0.0)) {
    throw ConfigError("cost_to_likelihood: alpha must be positive, got " +
                      std::to_string(alpha));
  }
  const Eigen::Index dz = cost.W.rows();
  Eigen::LLT<Matrix> llt(symmetrized(cost.W));
  if (llt.info() != Eigen::Success) {
    throw ConfigError("cost_to_likelihood: W is singular or not PD");
  }
  const double log_det_w =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();

  CostLikelihood lik;
  lik.alpha = alpha;
  lik.obs.C = cost.C;
  lik.obs.D = cost.D;
  lik.obs.e = cost.e;
  lik.obs.sigma_v = symmetrized(
      llt.solve(Matrix::Identity(dz, dz)) / alpha);
  // log of the N(z*, sigma_v) normalizer: |alpha W| replaces 1/|sigma_v|.
  const double log_det_alpha_w =
      static_cast<double>(dz) * std::log(alpha) + log_det_w;
  lik.log_beta = -0.5 * (static_cast<double>(dz) *
                             std::log(2.0 * std::numbers::pi) -
                         log_det_alpha_w);
  return lik;
}

double optimality_loglik(double cost_value, double alpha) {
  if (!(alpha > 0.0)) {
    throw ConfigError("optimality_loglik: alpha must be positive, got " +
                      std::to_string(alpha));
  }
  return -alpha * cost_value;
}

void validate_scenario(const Scenario& s) {
  require(s.dx > 0, "dims.dx: must be positive");
  require(s.du > 0, "dims.du: must be positive");
  require(s.dz > 0, "dims.dz: must be positive");
  require(s.dy > 0, "dims.dy: must be positive");
  require(s.horizon > 0, "horizon: must be positive");
  require(s.tau >= 0 && s.tau <= s.horizon,
          "tau: must lie in [0, horizon], got " + std::to_string(s.tau));

  check_shape(s.dynamics.A, s.dx, s.dx, "dynamics.A");
  check_shape(s.dynamics.B, s.dx, s.du, "dynamics.B");
  require(s.dynamics.c.size() == s.dx, "dynamics.c: expected length " +
                                           std::to_string(s.dx));
  check_shape(s.dynamics.sigma_w, s.dx, s.dx, "dynamics.SigmaW");
  check_psd(s.dynamics.sigma_w, "dynamics.SigmaW");

  check_shape(s.measure_model.C, s.dy, s.dx, "measure_model.C");
  check_shape(s.measure_model.D, s.dy, s.du, "measure_model.D");
  require(s.measure_model.e.size() == s.dy,
          "measure_model.e: expected length " + std::to_string(s.dy));
  check_shape(s.measure_model.sigma_v, s.dy, s.dy, "measure_model.SigmaV");
  check_pd(s.measure_model.sigma_v, "measure_model.SigmaV");

  check_shape(s.cost.W, s.dz, s.dz, "cost.W");
  check_pd(s.cost.W, "cost.W");
  check_shape(s.cost.C, s.dz, s.dx, "cost.C");
  check_shape(s.cost.D, s.dz, s.du, "cost.D");
  require(s.cost.e.size() == s.dz, "cost.e: expected length " +
                                       std::to_string(s.dz));
  const int controlled = s.horizon - s.tau;
  require(static_cast<int>(s.cost.z_star.size()) == controlled,
          "cost.z_star: expected " + std::to_string(controlled) +
              " targets for t in [tau, horizon), got " +
              std::to_string(s.cost.z_star.size()));
  for (const Vector& z : s.cost.z_star) {
    require(z.size() == s.dz, "cost.z_star: entry of length " +
                                  std::to_string(z.size()) + ", expected " +
                                  std::to_string(s.dz));
  }

  require(s.x0_prior.dim() == s.dx, "x0_prior: dimension " +
                                        std::to_string(s.x0_prior.dim()) +
                                        ", expected " + std::to_string(s.dx));
  check_psd(s.x0_prior.cov(), "x0_prior.cov");
  require(static_cast<int>(s.u_prior.size()) == s.horizon,
          "u_prior: expected one prior per timestep");
  for (const Gaussian& g : s.u_prior) {
    require(g.dim() == s.du, "u_prior: dimension " + std::to_string(g.dim()) +
                                 ", expected " + std::to_string(s.du));
    check_psd(g.cov(), "u_prior.cov");
  }

  require(static_cast<int>(s.measurements.size()) == s.tau,
          "measurements: expected " + std::to_string(s.tau) +
              " entries (one per step before tau), got " +
              std::to_string(s.measurements.size()));
  for (const Vector& y : s.measurements) {
    require(y.size() == s.dy, "measurements: entry of length " +
                                  std::to_string(y.size()) + ", expected " +
                                  std::to_string(s.dy));
  }
  if (!s.pinned_controls.empty()) {
    require(static_cast<int>(s.pinned_controls.size()) <= s.tau,
            "pinned_controls: recorded controls cover the estimation "
            "segment only (length must be <= tau)");
    for (const Vector& u : s.pinned_controls) {
      require(u.size() == s.du, "pinned_controls: entry of length " +
                                    std::to_string(u.size()) + ", expected " +
                                    std::to_string(s.du));
    }
  }
  if (s.ensemble.has_value()) {
    const EnsembleSpec& ens = *s.ensemble;
    require(!ens.policies.empty(), "ensemble.policies: must be non-empty");
    require(ens.log_prior.size() ==
                static_cast<Eigen::Index>(ens.policies.size()),
            "ensemble.log_prior: length must match number of policies");
    const double mass = ens.log_prior.array().exp().sum();
    require(std::abs(mass - 1.0) <= 1e-10,
            "ensemble.log_prior: exp entries sum to " + std::to_string(mass) +
                ", expected 1");
    require(std::isfinite(ens.gamma), "ensemble.gamma: must be finite");
    for (const EnsemblePolicy& p : ens.policies) {
      require(static_cast<int>(p.controls.size()) == controlled,
              "ensemble.policies: policy '" + p.name + "' has " +
                  std::to_string(p.controls.size()) + " controls, expected " +
                  std::to_string(controlled));
      for (const Vector& u : p.controls) {
        require(u.size() == s.du, "ensemble.policies: control of length " +
                                      std::to_string(u.size()) +
                                      ", expected " + std::to_string(s.du));
      }
    }
  }
}

Gaussian control_prior_at(const Scenario& s, int t) {
  if (t < static_cast<int>(s.pinned_controls.size())) {
    return Gaussian(s.pinned_controls[t],
                    kPinnedControlVar * Matrix::Identity(s.du, s.du));
  }
  return s.u_prior[t];
}

}  // namespace i2c
