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

#include "i2c/sim.hpp"

#include <cmath>
#include <exception>
#include <numbers>

#include "i2c/errors.hpp"

namespace i2c::sim {

namespace {

Matrix sqrt_psd(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m));
  const Vector eigs = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * eigs.asDiagonal() *
         es.eigenvectors().transpose();
}

double rollout_cost(const NonlinearSystem& system,
                    const std::vector<PolicyGain>& policy, const Gaussian& x0,
                    const Matrix& sqrt_w_noise, const Matrix& W,
                    const std::vector<Vector>& z_star, Rng& rng) {
  const int T = static_cast<int>(policy.size());
  Vector x = sample_gaussian(rng, x0);
  double cost = 0.0;
  for (int t = 0; t < T; ++t) {
    const Vector u = policy[t].K * x + policy[t].k;
    const Vector resid = system.h(x, u) - z_star[t];
    cost += resid.dot(W * resid);
    if (t + 1 < T) {
      x = system.f(x, u) +
          sqrt_w_noise * rng.gaussian_vector(system.dx);
    }
  }
  return cost;
}

}  // namespace

std::uint64_t Rng::next_u64() {
  // splitmix64
  state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::next_uniform() {
  // 53-bit mantissa, shifted into (0, 1).
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::next_gaussian() {
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

Vector Rng::gaussian_vector(Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = next_gaussian();
  return v;
}

std::uint64_t substream(std::uint64_t seed, std::uint64_t index) {
  Rng mix(seed ^ (0x5851f42d4c957f2dULL * (index + 1)));
  return mix.next_u64();
}

Vector sample_gaussian(Rng& rng, const Gaussian& g) {
  return g.mean() + sqrt_psd(g.cov()) * rng.gaussian_vector(g.dim());
}

Rollout simulate_scenario(const Scenario& scenario, int steps,
                          std::uint64_t seed) {
  Rng rng(seed);
  const Matrix sqrt_w = sqrt_psd(scenario.dynamics.sigma_w);
  const Matrix sqrt_v = sqrt_psd(scenario.measure_model.sigma_v);

  Rollout out;
  out.states.reserve(steps);
  out.controls.reserve(steps);
  out.measurements.reserve(steps);

  Vector x = sample_gaussian(rng, scenario.x0_prior);
  for (int t = 0; t < steps; ++t) {
    Vector u;
    if (t < static_cast<int>(scenario.pinned_controls.size())) {
      u = scenario.pinned_controls[t];
    } else {
      u = sample_gaussian(rng, scenario.u_prior[t]);
    }
    out.states.push_back(x);
    out.controls.push_back(u);
    out.measurements.push_back(scenario.measure_model.C * x +
                               scenario.measure_model.D * u +
                               scenario.measure_model.e +
                               sqrt_v * rng.gaussian_vector(scenario.dy));
    if (t + 1 < steps) {
      x = scenario.dynamics.A * x + scenario.dynamics.B * u +
          scenario.dynamics.c + sqrt_w * rng.gaussian_vector(scenario.dx);
    }
  }
  return out;
}

std::vector<double> mc_rollout_costs_serial(
    const NonlinearSystem& system, const std::vector<PolicyGain>& policy,
    const Gaussian& x0, const Matrix& W, const std::vector<Vector>& z_star,
    int n_rollouts, std::uint64_t seed) {
  if (policy.size() != z_star.size()) {
    throw ConfigError("mc_rollout_costs: policy/target length mismatch");
  }
  const Matrix sqrt_w = sqrt_psd(system.sigma_w);
  std::vector<double> costs(n_rollouts);
  for (int i = 0; i < n_rollouts; ++i) {
    Rng rng(substream(seed, static_cast<std::uint64_t>(i)));
    costs[i] = rollout_cost(system, policy, x0, sqrt_w, W, z_star, rng);
  }
  return costs;
}

std::vector<double> mc_rollout_costs(const NonlinearSystem& system,
                                     const std::vector<PolicyGain>& policy,
                                     const Gaussian& x0, const Matrix& W,
                                     const std::vector<Vector>& z_star,
                                     int n_rollouts, std::uint64_t seed) {
  if (policy.size() != z_star.size()) {
    throw ConfigError("mc_rollout_costs: policy/target length mismatch");
  }
  const Matrix sqrt_w = sqrt_psd(system.sigma_w);
  std::vector<double> costs(n_rollouts);
  std::exception_ptr failure;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n_rollouts; ++i) {
    try {
      Rng rng(substream(seed, static_cast<std::uint64_t>(i)));
      costs[i] = rollout_cost(system, policy, x0, sqrt_w, W, z_star, rng);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return costs;
}

double mean(const std::vector<double>& values) {
  double total = 0.0;
  for (double v : values) total += v;
  return values.empty() ? 0.0 : total / static_cast<double>(values.size());
}

}  // namespace i2c::sim
