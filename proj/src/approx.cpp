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

#include "i2c/approx.hpp"

#include <cmath>
#include <string>

#include "i2c/errors.hpp"

namespace i2c {

namespace {

Matrix fd_jacobian(const std::function<Vector(const Vector&)>& fn,
                   const Vector& at, double eps) {
  const Vector f0 = fn(at);
  Matrix J(f0.size(), at.size());
  for (Eigen::Index j = 0; j < at.size(); ++j) {
    Vector hi = at;
    Vector lo = at;
    hi(j) += eps;
    lo(j) -= eps;
    const Vector fhi = fn(hi);
    const Vector flo = fn(lo);
    if (!fhi.allFinite() || !flo.allFinite()) {
      throw NumericalError("linearize: non-finite evaluation");
    }
    J.col(j) = (fhi - flo) / (2.0 * eps);
  }
  return J;
}

double nominal_cost(const NonlinearSystem& system, const NonlinearConfig& cfg,
                    const std::vector<Vector>& xs,
                    const std::vector<Vector>& us) {
  double total = 0.0;
  for (size_t t = 0; t < xs.size(); ++t) {
    const Vector resid = system.h(xs[t], us[t]) - cfg.z_star[t];
    total += resid.dot(cfg.W * resid);
  }
  return total;
}

void check_box(const NonlinearSystem& system, const Vector& x, int t,
               int iteration) {
  if (system.box_lo.size() == 0) return;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) < system.box_lo(i) || x(i) > system.box_hi(i)) {
      throw NumericalError(
          "nonlinear_i2c: nominal left the operating box at t=" +
          std::to_string(t) + " (outer iteration " +
          std::to_string(iteration) + ", state component " +
          std::to_string(i) + " = " + std::to_string(x(i)) + ")");
    }
  }
}

}  // namespace

void linearize(const StateMap& map, const Vector& x0, const Vector& u0,
               double eps, Matrix* A, Matrix* B, Vector* c) {
  if (!(eps > 0.0)) {
    throw ConfigError("linearize: eps must be positive");
  }
  const Vector f0 = map(x0, u0);
  if (!f0.allFinite()) {
    throw NumericalError("linearize: non-finite evaluation at the expansion "
                         "point");
  }
  *A = fd_jacobian([&](const Vector& x) { return map(x, u0); }, x0, eps);
  *B = fd_jacobian([&](const Vector& u) { return map(x0, u); }, u0, eps);
  *c = f0 - (*A) * x0 - (*B) * u0;
}

NonlinearSystem make_pendulum(const NonlinearSpec& spec) {
  NonlinearSystem sys;
  sys.dx = 2;
  sys.du = 1;
  sys.dz = 3;
  const double g_over_l = spec.gravity / spec.length;
  const double inertia = spec.mass * spec.length * spec.length;
  const double dt = spec.dt;
  const double gain = spec.control_gain;
  sys.f = [g_over_l, inertia, dt, gain](const Vector& x, const Vector& u) {
    Vector next(2);
    next(0) = x(0) + dt * x(1);
    next(1) = x(1) + dt * (-g_over_l * std::sin(x(0)) + gain * u(0) / inertia);
    return next;
  };
  sys.h = [](const Vector& x, const Vector& u) {
    Vector z(3);
    z << x(0), x(1), u(0);
    return z;
  };
  sys.sigma_w = Matrix::Zero(2, 2);
  sys.box_lo = Vector::Constant(2, -1e3);
  sys.box_hi = Vector::Constant(2, 1e3);
  return sys;
}

NonlinearSystem wrap_linear(const LinearDynamics& dyn,
                            const QuadraticCost& cost) {
  NonlinearSystem sys;
  sys.dx = static_cast<int>(dyn.A.rows());
  sys.du = static_cast<int>(dyn.B.cols());
  sys.dz = static_cast<int>(cost.W.rows());
  sys.f = [dyn](const Vector& x, const Vector& u) {
    return Vector(dyn.A * x + dyn.B * u + dyn.c);
  };
  sys.h = [cost](const Vector& x, const Vector& u) {
    return Vector(cost.C * x + cost.D * u + cost.e);
  };
  sys.sigma_w = dyn.sigma_w;
  return sys;
}

NonlinearSystem make_nonlinear_system(const Scenario& scenario) {
  if (!scenario.nonlinear.has_value()) {
    return wrap_linear(scenario.dynamics, scenario.cost);
  }
  const NonlinearSpec& spec = *scenario.nonlinear;
  if (spec.name == "pendulum") {
    NonlinearSystem sys = make_pendulum(spec);
    if (sys.dx != scenario.dx || sys.du != scenario.du ||
        sys.dz != scenario.dz) {
      throw ConfigError("nonlinear: pendulum dims are dx=2, du=1, dz=3");
    }
    sys.sigma_w = scenario.dynamics.sigma_w;
    return sys;
  }
  throw ConfigError("nonlinear: unknown builtin system '" + spec.name + "'");
}

NonlinearConfig nonlinear_config_from(const Scenario& scenario) {
  if (scenario.tau != 0) {
    throw ConfigError(
        "nonlinear_i2c: only pure control problems (tau = 0) are supported");
  }
  NonlinearConfig cfg;
  cfg.x0 = scenario.x0_prior;
  cfg.u_prior = scenario.u_prior;
  cfg.W = scenario.cost.W;
  cfg.z_star = scenario.cost.z_star;
  return cfg;
}

NonlinearResult nonlinear_i2c(const NonlinearSystem& system,
                              const NonlinearConfig& config) {
  const int T = static_cast<int>(config.z_star.size());
  if (T <= 0 || static_cast<int>(config.u_prior.size()) != T) {
    throw ConfigError("nonlinear_i2c: inconsistent horizon");
  }

  NonlinearResult result;
  // Initial nominal: prior rollout from the mean state under mean controls.
  result.nominal_x.assign(T, Vector::Zero(system.dx));
  result.nominal_u.assign(T, Vector::Zero(system.du));
  result.nominal_x[0] = config.x0.mean();
  for (int t = 0; t < T; ++t) {
    result.nominal_u[t] = config.u_prior[t].mean();
    if (t + 1 < T) {
      result.nominal_x[t + 1] =
          system.f(result.nominal_x[t], result.nominal_u[t]);
    }
  }

  double alpha = config.em.alpha0;
  for (int outer = 0; outer < config.outer_iters; ++outer) {
    result.outer_iterations = outer + 1;
    for (int t = 0; t < T; ++t) {
      check_box(system, result.nominal_x[t], t, outer + 1);
    }
    result.nominal_costs.push_back(
        nominal_cost(system, config, result.nominal_x, result.nominal_u));

    // Linearize dynamics and target map along the nominal.
    std::vector<LinearDynamics> dyn(T - 1);
    for (int t = 0; t + 1 < T; ++t) {
      linearize(system.f, result.nominal_x[t], result.nominal_u[t],
                config.fd_eps, &dyn[t].A, &dyn[t].B, &dyn[t].c);
      dyn[t].sigma_w = system.sigma_w;
    }
    std::vector<LinearObservation> zmap(T);
    for (int t = 0; t < T; ++t) {
      linearize(system.h, result.nominal_x[t], result.nominal_u[t],
                config.fd_eps, &zmap[t].C, &zmap[t].D, &zmap[t].e);
    }

    EmOptions em = config.em;
    em.alpha0 = alpha;
    EmChainResult sweep = run_em(
        [&](double a) {
          const Matrix sigma_v =
              floored_inverse(a * config.W);
          ChainProblem p;
          p.dx = system.dx;
          p.du = system.du;
          p.x0 = config.x0;
          p.dyn = dyn;
          p.u_prior.reserve(T);
          p.steps.resize(T);
          for (int t = 0; t < T; ++t) {
            p.u_prior.push_back(marginal_prior(config.u_prior[t], system.dx));
            p.steps[t].obs = zmap[t];
            p.steps[t].obs->sigma_v = sigma_v;
            p.steps[t].target = config.z_star[t];
            p.steps[t].controlled = true;
          }
          return p;
        },
        config.W, em);

    alpha = sweep.alpha;
    result.alpha = alpha;
    result.trace = sweep.trace;
    for (std::string& w : sweep.warnings) {
      result.warnings.push_back(std::move(w));
    }

    double max_change = 0.0;
    std::vector<Vector> new_x(T), new_u(T);
    for (int t = 0; t < T; ++t) {
      const Vector& mean = sweep.beliefs.smoothed[t].mean();
      new_x[t] = mean.head(system.dx);
      new_u[t] = mean.tail(system.du);
      max_change = std::max(max_change,
                            (new_x[t] - result.nominal_x[t]).cwiseAbs()
                                .maxCoeff());
      max_change = std::max(max_change,
                            (new_u[t] - result.nominal_u[t]).cwiseAbs()
                                .maxCoeff());
    }
    result.nominal_x = std::move(new_x);
    result.nominal_u = std::move(new_u);
    result.beliefs = to_joint_beliefs(sweep.beliefs, system.dx);
    result.policy = extract_policy(result.beliefs, &result.warnings);

    if (max_change < config.nominal_tol) {
      result.converged = true;
      result.nominal_costs.push_back(
          nominal_cost(system, config, result.nominal_x, result.nominal_u));
      break;
    }
  }
  if (!result.converged) {
    result.nominal_costs.push_back(
        nominal_cost(system, config, result.nominal_x, result.nominal_u));
  }
  return result;
}

}  // namespace i2c
