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

#include "i2c/oracle.hpp"

#include <cmath>
#include <numbers>

#include "i2c/errors.hpp"

namespace i2c::oracle {

LqrSolution lqr_solve(const LinearDynamics& dyn, const Matrix& Q,
                      const Matrix& R, const Matrix& Qf,
                      const std::vector<Vector>& x_star, int T) {
  const Eigen::Index dx = dyn.A.rows();
  const Eigen::Index du = dyn.B.cols();
  if (static_cast<int>(x_star.size()) != T) {
    throw ConfigError("lqr_solve: need one target per stage");
  }

  LqrSolution sol;
  sol.K.assign(T, Matrix::Zero(du, dx));
  sol.k.assign(T, Vector::Zero(du));
  sol.P.assign(T + 1, Matrix::Zero(dx, dx));

  // Value function V_t(x) = x^T P_t x - 2 p_t^T x + const.
  Matrix P = 0.5 * (Qf + Qf.transpose());
  Vector p = Vector::Zero(dx);  // terminal target is the origin
  sol.P[T] = P;

  for (int t = T - 1; t >= 0; --t) {
    const Matrix H = R + dyn.B.transpose() * P * dyn.B;
    Eigen::LDLT<Matrix> ldlt(0.5 * (H + H.transpose()));
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      throw NumericalError("lqr_solve: singular R + B^T P B at t=" +
                           std::to_string(t));
    }
    const Matrix K = -ldlt.solve(dyn.B.transpose() * P * dyn.A);
    const Vector k = ldlt.solve(dyn.B.transpose() * (p - P * dyn.c));

    const Matrix M = dyn.A + dyn.B * K;   // closed-loop transition
    const Vector m = dyn.B * k + dyn.c;   // closed-loop offset
    const Matrix P_next =
        Q + K.transpose() * R * K + M.transpose() * P * M;
    const Vector p_next = Q * x_star[t] - K.transpose() * R * k -
                          M.transpose() * P * m + M.transpose() * p;

    sol.K[t] = K;
    sol.k[t] = k;
    P = 0.5 * (P_next + P_next.transpose());
    p = p_next;
    sol.P[t] = P;
  }
  return sol;
}

SmootherResult kalman_filter(const LinearDynamics& dyn,
                             const LinearObservation& obs, const Gaussian& x0,
                             const std::vector<Vector>& measurements,
                             const std::vector<Vector>& controls) {
  const size_t n_states = controls.size() + 1;
  if (measurements.size() > n_states) {
    throw ConfigError("kalman_filter: more measurements than states");
  }
  const bool uses_control = obs.D.cwiseAbs().maxCoeff() > 0.0;

  SmootherResult out;
  out.filtered.reserve(n_states);

  Vector mean = x0.mean();
  Matrix cov = x0.cov();
  for (size_t t = 0; t < n_states; ++t) {
    if (t < measurements.size()) {
      Vector predicted_obs = obs.C * mean + obs.e;
      if (uses_control) {
        if (t >= controls.size()) {
          throw ConfigError(
              "kalman_filter: observation at t=" + std::to_string(t) +
              " needs a control input");
        }
        predicted_obs += obs.D * controls[t];
      } else if (t < controls.size()) {
        predicted_obs += obs.D * controls[t];
      }
      const Matrix S =
          obs.C * cov * obs.C.transpose() + obs.sigma_v;
      Eigen::LLT<Matrix> llt(0.5 * (S + S.transpose()));
      if (llt.info() != Eigen::Success) {
        throw NumericalError(
            "kalman_filter: singular innovation covariance at t=" +
            std::to_string(t));
      }
      const Vector innovation = measurements[t] - predicted_obs;
      const double log_det =
          2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
      out.loglik += -0.5 * (static_cast<double>(innovation.size()) *
                                std::log(2.0 * std::numbers::pi) +
                            log_det + innovation.dot(llt.solve(innovation)));
      const Matrix gain = cov * obs.C.transpose() *
                          llt.solve(Matrix::Identity(S.rows(), S.cols()));
      mean += gain * innovation;
      cov = cov - gain * obs.C * cov;
      cov = 0.5 * (cov + cov.transpose());
    }
    out.filtered.emplace_back(mean, cov, CovPolicy::kClamp);
    if (t + 1 < n_states) {
      mean = dyn.A * mean + dyn.B * controls[t] + dyn.c;
      cov = dyn.A * cov * dyn.A.transpose() + dyn.sigma_w;
      cov = 0.5 * (cov + cov.transpose());
    }
  }
  return out;
}

SmootherResult rts_smooth(const SmootherResult& filter_out,
                          const LinearDynamics& dyn,
                          const std::vector<Vector>& controls) {
  const size_t n = filter_out.filtered.size();
  if (n == 0) throw ConfigError("rts_smooth: empty filter output");
  if (controls.size() + 1 < n) {
    throw ConfigError("rts_smooth: controls shorter than filtered sequence");
  }

  SmootherResult out;
  out.filtered = filter_out.filtered;
  out.loglik = filter_out.loglik;
  out.smoothed.assign(n, out.filtered.back());

  Vector mean = out.filtered.back().mean();
  Matrix cov = out.filtered.back().cov();
  for (int t = static_cast<int>(n) - 2; t >= 0; --t) {
    const Vector& mf = out.filtered[t].mean();
    const Matrix& Pf = out.filtered[t].cov();
    const Vector pred_mean = dyn.A * mf + dyn.B * controls[t] + dyn.c;
    Matrix pred_cov = dyn.A * Pf * dyn.A.transpose() + dyn.sigma_w;
    pred_cov = 0.5 * (pred_cov + pred_cov.transpose());

    Eigen::LDLT<Matrix> ldlt(pred_cov);
    if (ldlt.info() != Eigen::Success) {
      throw NumericalError(
          "rts_smooth: singular predicted covariance at t=" +
          std::to_string(t));
    }
    // G = Pf A^T pred_cov^{-1}
    const Matrix G = ldlt.solve(dyn.A * Pf).transpose();
    mean = mf + G * (mean - pred_mean);
    cov = Pf + G * (cov - pred_cov) * G.transpose();
    cov = 0.5 * (cov + cov.transpose());
    out.smoothed[t] = Gaussian(mean, cov, CovPolicy::kClamp);
  }
  return out;
}

}  // namespace i2c::oracle
