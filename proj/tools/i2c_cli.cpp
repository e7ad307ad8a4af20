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

#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "i2c/aipolicy.hpp"
#include "i2c/errors.hpp"
#include "i2c/oracle.hpp"
#include "i2c/report.hpp"
#include "i2c/scenario_io.hpp"
#include "i2c/sim.hpp"
#include "i2c/solver.hpp"
#include "i2c/unified.hpp"

namespace {

namespace fs = std::filesystem;
using i2c::Gaussian;
using i2c::Matrix;
using i2c::Scenario;
using i2c::Vector;

struct CliOptions {
  std::vector<std::string> scenarios;
  std::string output_dir = "./out";
  std::string format_name = "csv";
  std::uint64_t seed = 0;
  int max_em_iters = 100;
  double tol = 1e-8;
  double alpha0 = 1.0;
  int jobs = 1;
  bool ignore_measurements = false;
  bool simulate = false;
};

std::string output_stem(const CliOptions& opts, const std::string& path,
                        const std::string& subcommand) {
  const std::string stem = fs::path(path).stem().string();
  return (fs::path(opts.output_dir) / (stem + "_" + subcommand)).string();
}

i2c::EmOptions em_options(const CliOptions& opts) {
  i2c::EmOptions em;
  em.alpha0 = opts.alpha0;
  em.max_iters = opts.max_em_iters;
  em.tol = opts.tol;
  return em;
}

std::vector<i2c::report::TimelineRow> timeline_rows(
    const Scenario& scenario, const std::vector<i2c::JointBelief>& beliefs,
    const std::vector<i2c::PolicyGain>& policy, int switch_time,
    double final_elbo) {
  std::vector<i2c::report::TimelineRow> rows;
  rows.reserve(beliefs.size());
  for (const i2c::JointBelief& b : beliefs) {
    i2c::report::TimelineRow row;
    row.t = b.t;
    row.segment = b.t < switch_time ? "estimate" : "control";
    row.mean_x = b.smoothed.mean().head(scenario.dx);
    row.cov_x = b.smoothed.cov().topLeftCorner(scenario.dx, scenario.dx);
    row.mean_u = b.smoothed.mean().tail(scenario.du);
    row.elbo = final_elbo;
    rows.push_back(std::move(row));
  }
  for (const i2c::PolicyGain& g : policy) {
    const int idx = g.t - beliefs.front().t;
    if (idx >= 0 && idx < static_cast<int>(rows.size())) {
      rows[idx].K = g.K;
      rows[idx].k = g.k;
    }
  }
  return rows;
}

// Controls used by the estimation oracle: recorded where available, prior
// means elsewhere.
std::vector<Vector> filter_controls(const Scenario& scenario, int n) {
  std::vector<Vector> controls;
  controls.reserve(n);
  for (int t = 0; t < n; ++t) {
    if (t < static_cast<int>(scenario.pinned_controls.size())) {
      controls.push_back(scenario.pinned_controls[t]);
    } else {
      controls.push_back(
          scenario.u_prior[std::min(t, scenario.horizon - 1)].mean());
    }
  }
  return controls;
}

// Filter/smooth the first `window` states. When the measurement model
// reads the control, the last measured step needs its input too, so one
// extra control (and state) is carried and trimmed afterwards.
struct EstimateResult {
  std::vector<Gaussian> filtered;
  std::vector<Gaussian> smoothed;
  double loglik = 0.0;
};

EstimateResult estimate_window(const Scenario& scenario, int window) {
  const bool uses_control =
      scenario.measure_model.D.cwiseAbs().maxCoeff() > 0.0;
  int n_controls = window - 1;
  if (uses_control && scenario.tau >= window) n_controls = window;
  const std::vector<Vector> controls = filter_controls(scenario, n_controls);

  const i2c::oracle::SmootherResult filt = i2c::oracle::kalman_filter(
      scenario.dynamics, scenario.measure_model, scenario.x0_prior,
      scenario.measurements, controls);
  const i2c::oracle::SmootherResult rts =
      i2c::oracle::rts_smooth(filt, scenario.dynamics, controls);

  EstimateResult out;
  out.loglik = filt.loglik;
  out.filtered.assign(filt.filtered.begin(), filt.filtered.begin() + window);
  out.smoothed.assign(rts.smoothed.begin(), rts.smoothed.begin() + window);
  return out;
}

void run_control(const CliOptions& opts, const std::string& path,
                 Scenario scenario, i2c::report::RunReport* report,
                 i2c::report::Format format) {
  if (scenario.tau != 0 && !opts.ignore_measurements) {
    throw i2c::ConfigError(
        "control: scenario has tau=" + std::to_string(scenario.tau) +
        "; pass --ignore-measurements to solve the control window only");
  }
  const std::string stem = output_stem(opts, path, "control");
  const std::string ext = format == i2c::report::Format::kCsv ? ".csv" : ".json";

  std::vector<i2c::JointBelief> beliefs;
  std::vector<i2c::PolicyGain> policy;
  i2c::EMTrace trace;
  double alpha = 0.0;

  if (scenario.nonlinear.has_value()) {
    const i2c::NonlinearSystem system = i2c::make_nonlinear_system(scenario);
    i2c::NonlinearConfig cfg = i2c::nonlinear_config_from(scenario);
    cfg.em = em_options(opts);
    const i2c::NonlinearResult result = i2c::nonlinear_i2c(system, cfg);
    beliefs = result.beliefs;
    policy = result.policy;
    trace = result.trace;
    alpha = result.alpha;
    report->warnings = result.warnings;

    std::ofstream outer(stem + "_outer" + ext);
    if (format == i2c::report::Format::kCsv) {
      outer << "sweep,nominal_cost\n";
      for (size_t i = 0; i < result.nominal_costs.size(); ++i) {
        outer << i << ","
              << i2c::report::format_double(result.nominal_costs[i]) << "\n";
      }
    } else {
      outer << "{\"nominal_costs\": [";
      for (size_t i = 0; i < result.nominal_costs.size(); ++i) {
        outer << (i ? ", " : "")
              << i2c::report::format_double(result.nominal_costs[i]);
      }
      outer << "]}\n";
    }
    report->outputs.push_back(stem + "_outer" + ext);
  } else {
    const i2c::EmResult result = i2c::em_solve(scenario, em_options(opts));
    beliefs = result.beliefs;
    policy = result.policy;
    trace = result.trace;
    alpha = result.alpha;
    report->warnings = result.warnings;
  }

  const double final_elbo = trace.elbos.back();
  i2c::report::write_timeline(
      stem + "_trajectory" + ext,
      timeline_rows(scenario, beliefs, policy, 0, final_elbo),
      format);
  i2c::report::write_gains(stem + "_gains" + ext, policy, format);
  i2c::report::write_trace(stem + "_trace" + ext, trace, format);
  report->outputs.push_back(stem + "_trajectory" + ext);
  report->outputs.push_back(stem + "_gains" + ext);
  report->outputs.push_back(stem + "_trace" + ext);
  report->em_iterations = trace.iterations;
  report->em_converged = trace.converged;
  report->final_elbo = final_elbo;
  report->final_alpha = alpha;
}

void run_estimate(const CliOptions& opts, const std::string& path,
                  Scenario scenario, i2c::report::RunReport* report,
                  i2c::report::Format format) {
  const std::string stem = output_stem(opts, path, "estimate");
  const std::string ext = format == i2c::report::Format::kCsv ? ".csv" : ".json";
  report->outputs.clear();

  if (opts.simulate) {
    const i2c::sim::Rollout rollout =
        i2c::sim::simulate_scenario(scenario, scenario.tau, opts.seed);
    scenario.measurements = rollout.measurements;
    scenario.pinned_controls = rollout.controls;
    std::vector<Gaussian> truth;
    truth.reserve(rollout.states.size());
    for (const Vector& x : rollout.states) {
      truth.emplace_back(x, Matrix::Zero(x.size(), x.size()));
    }
    i2c::report::write_states(stem + "_truth" + ext, truth, format);
    report->outputs.push_back(stem + "_truth" + ext);
  }

  const EstimateResult result = estimate_window(scenario, scenario.horizon);
  i2c::report::write_states(stem + "_filtered" + ext, result.filtered,
                            format);
  i2c::report::write_states(stem + "_smoothed" + ext, result.smoothed,
                            format);
  i2c::report::write_scalar(stem + "_loglik" + ext, "loglik", result.loglik,
                            format);
  report->outputs.push_back(stem + "_filtered" + ext);
  report->outputs.push_back(stem + "_smoothed" + ext);
  report->outputs.push_back(stem + "_loglik" + ext);
  report->final_elbo = result.loglik;
}

void run_unified(const CliOptions& opts, const std::string& path,
                 Scenario scenario, i2c::report::RunReport* report,
                 i2c::report::Format format) {
  const i2c::UnifiedSolution result =
      i2c::solve_unified(scenario, em_options(opts));
  const std::string stem = output_stem(opts, path, "unified");
  const std::string ext = format == i2c::report::Format::kCsv ? ".csv" : ".json";

  const double final_elbo = result.trace.elbos.back();
  i2c::report::write_timeline(
      stem + "_timeline" + ext,
      timeline_rows(scenario, result.beliefs, result.policy, scenario.tau,
                    final_elbo),
      format);
  i2c::report::write_gains(stem + "_gains" + ext, result.policy, format);
  i2c::report::write_trace(stem + "_trace" + ext, result.trace, format);
  i2c::report::write_scalar(stem + "_estimation_loglik" + ext, "loglik",
                            result.estimation_loglik, format);
  report->outputs = {stem + "_timeline" + ext, stem + "_gains" + ext,
                     stem + "_trace" + ext, stem + "_estimation_loglik" + ext};
  report->em_iterations = result.trace.iterations;
  report->em_converged = result.trace.converged;
  report->final_elbo = final_elbo;
  report->final_alpha = result.alpha;
  report->warnings = result.warnings;
}

void run_oracle(const CliOptions& opts, const std::string& path,
                Scenario scenario, i2c::report::RunReport* report,
                i2c::report::Format format) {
  const std::string stem = output_stem(opts, path, "oracle");
  const std::string ext = format == i2c::report::Format::kCsv ? ".csv" : ".json";
  report->outputs.clear();

  const int window = scenario.horizon - scenario.tau;
  if (window > 0) {
    const bool stacked = scenario.dz == scenario.dx + scenario.du &&
                         scenario.cost.C.topRows(scenario.dx).isIdentity() &&
                         scenario.cost.D.bottomRows(scenario.du).isIdentity();
    if (!stacked) {
      throw i2c::ConfigError(
          "oracle: LQR reference requires the stacked target map z = [x; u]");
    }
    const Matrix Q = scenario.cost.W.topLeftCorner(scenario.dx, scenario.dx);
    const Matrix R =
        scenario.cost.W.bottomRightCorner(scenario.du, scenario.du);
    std::vector<Vector> x_star;
    x_star.reserve(window);
    for (const Vector& z : scenario.cost.z_star) {
      if (z.tail(scenario.du).cwiseAbs().maxCoeff() > 0.0) {
        throw i2c::ConfigError(
            "oracle: LQR reference supports state targets only (control "
            "part of z_star must be zero)");
      }
      x_star.push_back(z.head(scenario.dx));
    }
    const i2c::oracle::LqrSolution lqr = i2c::oracle::lqr_solve(
        scenario.dynamics, Q, R, Matrix::Zero(scenario.dx, scenario.dx),
        x_star, window);

    std::vector<i2c::PolicyGain> gains;
    gains.reserve(window);
    for (int t = 0; t < window; ++t) {
      gains.push_back(i2c::PolicyGain{lqr.K[t], lqr.k[t],
                                      Matrix::Zero(scenario.du, scenario.du),
                                      scenario.tau + t});
    }
    i2c::report::write_gains(stem + "_lqr_gains" + ext, gains, format);
    report->outputs.push_back(stem + "_lqr_gains" + ext);
  }

  if (scenario.tau > 0) {
    const EstimateResult result = estimate_window(scenario, scenario.tau);
    i2c::report::write_states(stem + "_filtered" + ext, result.filtered,
                              format);
    i2c::report::write_states(stem + "_smoothed" + ext, result.smoothed,
                              format);
    i2c::report::write_scalar(stem + "_loglik" + ext, "loglik",
                              result.loglik, format);
    report->outputs.push_back(stem + "_filtered" + ext);
    report->outputs.push_back(stem + "_smoothed" + ext);
    report->outputs.push_back(stem + "_loglik" + ext);
  }
}

void run_score_ensemble(const CliOptions& opts, const std::string& path,
                        Scenario scenario, i2c::report::RunReport* report,
                        i2c::report::Format format) {
  if (!scenario.ensemble.has_value()) {
    throw i2c::ConfigError("score-ensemble: scenario has no ensemble block");
  }
  const i2c::aipolicy::PolicyEnsemble ensemble =
      i2c::aipolicy::ensemble_from(scenario);
  const i2c::CostLikelihood lik =
      i2c::cost_to_likelihood(scenario.cost, opts.alpha0);
  const std::vector<double> free_energies =
      i2c::aipolicy::score_ensemble(ensemble, scenario, lik);
  Vector fe(free_energies.size());
  for (size_t i = 0; i < free_energies.size(); ++i) fe(i) = free_energies[i];
  const Vector posterior = i2c::aipolicy::policy_posterior(ensemble, fe);

  std::vector<std::string> names;
  names.reserve(ensemble.policies.size());
  for (const auto& p : ensemble.policies) names.push_back(p.name);

  const std::string stem = output_stem(opts, path, "score-ensemble");
  const std::string ext = format == i2c::report::Format::kCsv ? ".csv" : ".json";
  i2c::report::write_ensemble(stem + "_ensemble" + ext, names, free_energies,
                              ensemble.log_prior, posterior, format);
  report->outputs = {stem + "_ensemble" + ext};
}

// Returns the process exit code contribution for one scenario file.
int run_one(const std::string& subcommand, const CliOptions& opts,
            const std::string& path) {
  const auto start = std::chrono::steady_clock::now();
  try {
    const i2c::report::Format format =
        i2c::report::parse_format(opts.format_name);
    Scenario scenario = i2c::load_scenario(path);
    fs::create_directories(opts.output_dir);

    i2c::report::RunReport report;
    report.scenario_name = scenario.name;
    report.scenario_hash = i2c::report::file_hash(path);
    report.subcommand = subcommand;

    if (subcommand == "control") {
      run_control(opts, path, scenario, &report, format);
    } else if (subcommand == "estimate") {
      run_estimate(opts, path, scenario, &report, format);
    } else if (subcommand == "unified") {
      run_unified(opts, path, scenario, &report, format);
    } else if (subcommand == "oracle") {
      run_oracle(opts, path, scenario, &report, format);
    } else {
      run_score_ensemble(opts, path, scenario, &report, format);
    }

    report.wall_time_ms =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - start)
            .count();
    const std::string report_path =
        output_stem(opts, path, subcommand) + "_report.json";
    i2c::report::write_run_report(report_path, report);
    for (const std::string& w : report.warnings) {
      std::cerr << "warning: " << w << "\n";
    }
    return 0;
  } catch (const i2c::ConfigError& e) {
    std::cerr << "error (config): " << path << ": " << e.what() << "\n";
    return 2;
  } catch (const i2c::Error& e) {
    std::cerr << "error (solver): " << path << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << path << ": " << e.what() << "\n";
    return 1;
  }
}

int run_subcommand(const std::string& subcommand, const CliOptions& opts) {
  int worst = 0;
  if (opts.jobs > 1 && opts.scenarios.size() > 1) {
    const int n = static_cast<int>(opts.scenarios.size());
#pragma omp parallel for schedule(dynamic) num_threads(opts.jobs) \
    reduction(max : worst)
    for (int i = 0; i < n; ++i) {
      worst = std::max(worst, run_one(subcommand, opts, opts.scenarios[i]));
    }
  } else {
    for (const std::string& path : opts.scenarios) {
      worst = std::max(worst, run_one(subcommand, opts, path));
    }
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"input inference for control: estimation and control as "
               "Gaussian inference"};
  app.require_subcommand(1);

  CliOptions opts;
  const auto add_common = [&opts](CLI::App* cmd) {
    cmd->add_option("--scenario", opts.scenarios, "scenario file(s), JSON")
        ->required();
    cmd->add_option("--output", opts.output_dir, "output directory");
    cmd->add_option("--format", opts.format_name, "csv|json");
    cmd->add_option("--seed", opts.seed, "rng seed for simulation");
    cmd->add_option("--max-em-iters", opts.max_em_iters, "EM iteration cap");
    cmd->add_option("--tol", opts.tol, "EM convergence tolerance");
    cmd->add_option("--alpha0", opts.alpha0, "initial temperature");
    cmd->add_option("--jobs", opts.jobs, "parallel fan-out over scenarios");
  };

  CLI::App* control = app.add_subcommand(
      "control", "solve the optimal-control problem by EM");
  add_common(control);
  control->add_flag("--ignore-measurements", opts.ignore_measurements,
                    "solve the control window of a tau > 0 scenario");

  CLI::App* estimate = app.add_subcommand(
      "estimate", "classical filtering/smoothing over the measurements");
  add_common(estimate);
  estimate->add_flag("--simulate", opts.simulate,
                     "generate measurements from a seeded rollout");

  CLI::App* unified = app.add_subcommand(
      "unified", "joint estimation and control with the switch at tau");
  add_common(unified);

  CLI::App* oracle = app.add_subcommand(
      "oracle", "LQR and Kalman/RTS reference outputs");
  add_common(oracle);

  CLI::App* score = app.add_subcommand(
      "score-ensemble", "softmax posterior over a policy ensemble");
  add_common(score);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error (config): " << e.what() << "\n";
    return 2;
  }

  const std::string subcommand = app.get_subcommands().front()->get_name();
  return run_subcommand(subcommand, opts);
}
