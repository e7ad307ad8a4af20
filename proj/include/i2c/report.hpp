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

#ifndef I2C_REPORT_HPP_
#define I2C_REPORT_HPP_

#include <optional>
#include <string>
#include <vector>

#include "i2c/solver.hpp"

// Machine-readable result files. CSV columns follow one flat schema
// (t, segment, mean_x_*, cov_x_* upper triangle, mean_u_*, K_*, k_*,
// elbo); JSON mirrors the same keys. Doubles are printed with 17
// significant digits so identical runs produce identical bytes.

namespace i2c::report {

enum class Format { kCsv, kJson };

Format parse_format(const std::string& name);

struct TimelineRow {
  int t = 0;
  std::string segment;  // "estimate" or "control"
  Vector mean_x;
  Matrix cov_x;
  Vector mean_u;
  std::optional<Matrix> K;
  std::optional<Vector> k;
  double elbo = 0.0;
};

std::string format_double(double v);

void write_timeline(const std::string& path,
                    const std::vector<TimelineRow>& rows, Format format);

void write_gains(const std::string& path,
                 const std::vector<PolicyGain>& policy, Format format);

void write_trace(const std::string& path, const EMTrace& trace,
                 Format format);

// Per-timestep state beliefs (estimation outputs).
void write_states(const std::string& path, const std::vector<Gaussian>& states,
                  Format format);

void write_scalar(const std::string& path, const std::string& key,
                  double value, Format format);

void write_ensemble(const std::string& path,
                    const std::vector<std::string>& names,
                    const std::vector<double>& free_energies,
                    const Vector& log_prior, const Vector& posterior,
                    Format format);

struct RunReport {
  std::string scenario_name;
  std::string scenario_hash;
  std::string subcommand;
  double wall_time_ms = 0.0;
  int em_iterations = 0;
  bool em_converged = false;
  double final_elbo = 0.0;
  double final_alpha = 0.0;
  std::vector<std::string> outputs;
  std::vector<std::string> warnings;
};

void write_run_report(const std::string& path, const RunReport& report);

// FNV-1a over the file bytes, hex-encoded.
std::string file_hash(const std::string& path);

}  // namespace i2c::report

#endif  // I2C_REPORT_HPP_
