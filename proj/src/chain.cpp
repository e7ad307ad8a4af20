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

#include "i2c/chain.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "i2c/errors.hpp"

namespace i2c {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2*pi)

// E[(y - M s - b)^T R^{-1} (y - M s - b)] for jointly Gaussian (s, y) plus
// the Gaussian normalizer, i.e. the expected log-density of y | s under
// N(M s + b, R). `resid_mean` and `resid_cov` are the moments of the
// residual y - M s - b.
double expected_log_density(const Vector& resid_mean, const Matrix& resid_cov,
                            const Matrix& R) {
  const double d = static_cast<double>(resid_mean.size());
  const Matrix R_inv = floored_inverse(R);
  const double log_det = floored_log_det(R);
  const double quad = resid_mean.dot(R_inv * resid_mean);
  const double trace = (R_inv * resid_cov).trace();
  return -0.5 * (d * kLog2Pi + log_det + quad + trace);
}

Matrix stacked_transition(const LinearDynamics& dyn) {
  Matrix Abar(dyn.A.rows(), dyn.A.cols() + dyn.B.cols());
  Abar << dyn.A, dyn.B;
  return Abar;
}

// G = cross P^{-1} through a diagonally rescaled LDLT.
Matrix smoother_gain(const Matrix& P, const Matrix& cross) {
  const Vector d = P.diagonal().cwiseMax(1e-300).cwiseSqrt();
  const Vector d_inv = d.cwiseInverse();
  const Matrix P_scaled =
      symmetrized(d_inv.asDiagonal() * P * d_inv.asDiagonal());
  Eigen::LDLT<Matrix> ldlt(P_scaled);
  if (ldlt.info() == Eigen::Success) {
    const Matrix rhs = d_inv.asDiagonal() * cross.transpose();
    const Matrix G = (ldlt.solve(rhs).transpose() * d_inv.asDiagonal()).eval();
    if (G.allFinite()) return G;
  }
  return cross * floored_inverse(P);
}

// F such that s_{t+1} = F s_t + f + noise for the given transition and the
// next step's conditional control prior.
Matrix chain_transition(const LinearDynamics& dyn, const ControlPrior& next) {
  const Matrix Abar = stacked_transition(dyn);
  Matrix F(Abar.rows() + next.K.rows(), Abar.cols());
  F << Abar, next.K * Abar;
  return F;
}

}  // namespace

ControlPrior marginal_prior(const Gaussian& g, int dx) {
  return ControlPrior{Matrix::Zero(g.dim(), dx), g.mean(), g.cov()};
}

Gaussian joint_prior(const Gaussian& x_belief, const ControlPrior& prior) {
  const Eigen::Index dx = x_belief.dim();
  const Eigen::Index du = prior.k.size();
  Vector mean(dx + du);
  mean << x_belief.mean(), prior.K * x_belief.mean() + prior.k;
  Matrix cov(dx + du, dx + du);
  const Matrix cross = x_belief.cov() * prior.K.transpose();
  cov.topLeftCorner(dx, dx) = x_belief.cov();
  cov.topRightCorner(dx, du) = cross;
  cov.bottomLeftCorner(du, dx) = cross.transpose();
  cov.bottomRightCorner(du, du) =
      prior.K * x_belief.cov() * prior.K.transpose() + prior.cov;
  return Gaussian(std::move(mean), std::move(cov), CovPolicy::kClamp);
}

Gaussian predict_joint(const ChainProblem& problem, int t,
                       const Gaussian& filtered_prev) {
  const LinearDynamics& dyn = problem.dyn[t - 1];
  const Matrix Abar = stacked_transition(dyn);
  Gaussian x_pred = propagate_affine(filtered_prev, Abar, dyn.c, dyn.sigma_w);
  return joint_prior(x_pred, problem.u_prior[t]);
}

ChainBeliefs chain_infer(const ChainProblem& problem) {
  const int T = problem.horizon();
  if (T <= 0) throw ConfigError("chain_infer: empty problem");
  if (static_cast<int>(problem.u_prior.size()) != T ||
      static_cast<int>(problem.dyn.size()) != T - 1) {
    throw ConfigError("chain_infer: inconsistent sequence lengths");
  }

  ChainBeliefs out;
  out.filtered.reserve(T);
  out.step_loglik.assign(T, 0.0);
  std::vector<Gaussian> predicted;
  predicted.reserve(T);

  for (int t = 0; t < T; ++t) {
    Gaussian pred = (t == 0)
                        ? joint_prior(problem.x0, problem.u_prior[0])
                        : predict_joint(problem, t, out.filtered.back());
    predicted.push_back(pred);

    Gaussian filt = pred;
    const ChainStep& step = problem.steps[t];
    if (step.obs.has_value()) {
      const LinearObservation& obs = *step.obs;
      Matrix H(obs.C.rows(), obs.C.cols() + obs.D.cols());
      H << obs.C, obs.D;
      const Vector pred_obs = H * pred.mean() + obs.e;
      const Matrix S =
          symmetrized(H * pred.cov() * H.transpose() + obs.sigma_v);
      // Jacobi rescaling: belief scales can span many orders of magnitude
      // (broad control priors against pinned states), and the plain solve
      // loses enough precision to disturb the EM trace.
      const Vector d = S.diagonal().cwiseMax(1e-300).cwiseSqrt();
      const Vector d_inv = d.cwiseInverse();
      const Matrix S_scaled =
          symmetrized(d_inv.asDiagonal() * S * d_inv.asDiagonal());
      Eigen::LLT<Matrix> llt(S_scaled);
      if (llt.info() != Eigen::Success) {
        throw NumericalError(
            "chain_infer: singular innovation covariance at t=" +
            std::to_string(t));
      }
      const Vector innovation = step.target - pred_obs;
      const Vector innov_scaled = d_inv.asDiagonal() * innovation;
      const double log_det =
          2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum() +
          2.0 * d.array().log().sum();
      out.step_loglik[t] =
          -0.5 * (static_cast<double>(innovation.size()) * kLog2Pi + log_det +
                  innov_scaled.dot(llt.solve(innov_scaled)));
      out.loglik += out.step_loglik[t];

      // gain = cov H^T S^{-1} = (cov H^T D^{-1}) S_scaled^{-1} D^{-1}
      const Matrix cross_scaled = pred.cov() * H.transpose() *
                                  d_inv.asDiagonal();
      const Matrix gain =
          llt.solve(cross_scaled.transpose()).transpose() * d_inv.asDiagonal();
      Vector mean = pred.mean() + gain * innovation;
      // Joseph form: strong updates on broad priors cancel catastrophically
      // in the plain (I - GH) P update.
      const Matrix closure =
          Matrix::Identity(pred.dim(), pred.dim()) - gain * H;
      Matrix cov = closure * pred.cov() * closure.transpose() +
                   gain * obs.sigma_v * gain.transpose();
      if (!mean.allFinite() || !cov.allFinite()) {
        throw NumericalError("chain_infer: non-finite update at t=" +
                             std::to_string(t));
      }
      filt = Gaussian(std::move(mean), std::move(cov), CovPolicy::kClamp);
    }
    out.filtered.push_back(std::move(filt));
  }

  // Backward pass.
  out.smoothed.assign(T, out.filtered.back());
  for (int t = T - 2; t >= 0; --t) {
    const Matrix F = chain_transition(problem.dyn[t], problem.u_prior[t + 1]);
    const Matrix& P_pred = predicted[t + 1].cov();
    const Matrix cross = out.filtered[t].cov() * F.transpose();
    const Matrix G = smoother_gain(P_pred, cross);
    Vector mean = out.filtered[t].mean() +
                  G * (out.smoothed[t + 1].mean() - predicted[t + 1].mean());
    Matrix cov = out.filtered[t].cov() +
                 G * (out.smoothed[t + 1].cov() - P_pred) * G.transpose();
    if (!mean.allFinite() || !cov.allFinite()) {
      throw NumericalError("chain_infer: non-finite smoothing at t=" +
                           std::to_string(t));
    }
    out.smoothed[t] = Gaussian(std::move(mean), std::move(cov),
                               CovPolicy::kClamp);
  }
  return out;
}

double chain_elbo(const ChainProblem& problem, const ChainBeliefs& beliefs) {
  const int T = problem.horizon();
  const int dx = problem.dx;
  const int du = problem.du;
  const int d = dx + du;
  double elbo = 0.0;

  // Expected pseudo-observation log-likelihoods.
  for (int t = 0; t < T; ++t) {
    const ChainStep& step = problem.steps[t];
    if (!step.obs.has_value()) continue;
    const LinearObservation& obs = *step.obs;
    Matrix H(obs.C.rows(), d);
    H << obs.C, obs.D;
    const Gaussian& q = beliefs.smoothed[t];
    const Vector resid = step.target - (H * q.mean() + obs.e);
    const Matrix resid_cov = H * q.cov() * H.transpose();
    elbo += expected_log_density(resid, resid_cov, obs.sigma_v);
  }

  // Initial-state prior.
  {
    const Gaussian x0_marg = marginalize(beliefs.smoothed[0], 0, dx);
    elbo += expected_log_density(x0_marg.mean() - problem.x0.mean(),
                                 x0_marg.cov(), problem.x0.cov());
  }

  // Control priors u_t | x_t.
  for (int t = 0; t < T; ++t) {
    const ControlPrior& prior = problem.u_prior[t];
    Matrix M(du, d);
    M << -prior.K, Matrix::Identity(du, du);
    const Gaussian& q = beliefs.smoothed[t];
    const Vector resid = M * q.mean() - prior.k;
    const Matrix resid_cov = M * q.cov() * M.transpose();
    elbo += expected_log_density(resid, resid_cov, prior.cov);
  }

  // Transition terms and entropy. The smoothed chain is Markov, so its
  // entropy decomposes as H(s_{T-1}) + sum_t H(s_t | s_{t+1}); the
  // backward conditional covariance depends only on filtered quantities.
  elbo += entropy(beliefs.smoothed[T - 1]);
  for (int t = 0; t + 1 < T; ++t) {
    const Matrix F = chain_transition(problem.dyn[t], problem.u_prior[t + 1]);
    const Gaussian pred = predict_joint(problem, t + 1, beliefs.filtered[t]);
    const Matrix cross_fp = beliefs.filtered[t].cov() * F.transpose();
    const Matrix G = cross_fp * floored_inverse(pred.cov());

    // Smoothed cross-covariance Cov(s_t, s_{t+1}) = G Sigma^s_{t+1}.
    const Matrix cross = G * beliefs.smoothed[t + 1].cov();
    const Matrix Abar = stacked_transition(problem.dyn[t]);
    const Gaussian& qt = beliefs.smoothed[t];
    const Gaussian& qn = beliefs.smoothed[t + 1];
    const Vector resid_mean =
        qn.mean().head(dx) - (Abar * qt.mean() + problem.dyn[t].c);
    const Matrix cross_sx = cross.leftCols(dx);  // Cov(s_t, x_{t+1})
    const Matrix resid_cov = qn.cov().topLeftCorner(dx, dx) +
                             Abar * qt.cov() * Abar.transpose() -
                             Abar * cross_sx -
                             (Abar * cross_sx).transpose();
    elbo += expected_log_density(resid_mean, symmetrized(resid_cov),
                                 problem.dyn[t].sigma_w);

    const Matrix bw_cov =
        symmetrized(beliefs.filtered[t].cov() - G * pred.cov() * G.transpose());
    elbo += 0.5 * (static_cast<double>(d) * (1.0 + kLog2Pi) +
                   floored_log_det(bw_cov));
  }
  return elbo;
}

double chain_expected_cost(const ChainProblem& problem,
                           const std::vector<Gaussian>& smoothed,
                           const Matrix& W) {
  double total = 0.0;
  for (int t = 0; t < problem.horizon(); ++t) {
    const ChainStep& step = problem.steps[t];
    if (!step.controlled || !step.obs.has_value()) continue;
    const LinearObservation& obs = *step.obs;
    Matrix H(obs.C.rows(), problem.dx + problem.du);
    H << obs.C, obs.D;
    const Vector resid = H * smoothed[t].mean() + obs.e - step.target;
    const Matrix z_cov = H * smoothed[t].cov() * H.transpose();
    total += resid.dot(W * resid) + (W * z_cov).trace();
  }
  return total;
}

int chain_controlled_dim(const ChainProblem& problem) {
  int total = 0;
  for (const ChainStep& step : problem.steps) {
    if (step.controlled && step.obs.has_value()) {
      total += static_cast<int>(step.obs->C.rows());
    }
  }
  return total;
}

}  // namespace i2c
