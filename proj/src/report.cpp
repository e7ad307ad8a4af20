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

#include "i2c/report.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "i2c/errors.hpp"

namespace i2c::report {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file: " + path);
  return out;
}

void append_x_headers(std::ostringstream& os, Eigen::Index dx) {
  for (Eigen::Index i = 0; i < dx; ++i) os << ",mean_x_" << i;
  for (Eigen::Index i = 0; i < dx; ++i) {
    for (Eigen::Index j = i; j < dx; ++j) os << ",cov_x_" << i << j;
  }
}

void append_x_values(std::ostringstream& os, const Vector& mean,
                     const Matrix& cov) {
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    os << "," << format_double(mean(i));
  }
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    for (Eigen::Index j = i; j < mean.size(); ++j) {
      os << "," << format_double(cov(i, j));
    }
  }
}

json upper_triangle(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i; j < m.cols(); ++j) out.push_back(m(i, j));
  }
  return out;
}

json to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json full_matrix(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(row);
  }
  return out;
}

}  // namespace

Format parse_format(const std::string& name) {
  if (name == "csv") return Format::kCsv;
  if (name == "json") return Format::kJson;
  throw ConfigError("unknown output format '" + name + "', expected csv|json");
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_timeline(const std::string& path,
                    const std::vector<TimelineRow>& rows, Format format) {
  std::ofstream out = open_out(path);
  if (rows.empty()) return;
  const Eigen::Index dx = rows.front().mean_x.size();
  const Eigen::Index du = rows.front().mean_u.size();

  if (format == Format::kCsv) {
    std::ostringstream header;
    header << "t,segment";
    append_x_headers(header, dx);
    for (Eigen::Index i = 0; i < du; ++i) header << ",mean_u_" << i;
    for (Eigen::Index i = 0; i < du; ++i) {
      for (Eigen::Index j = 0; j < dx; ++j) header << ",K_" << i << j;
    }
    for (Eigen::Index i = 0; i < du; ++i) header << ",k_" << i;
    header << ",elbo";
    out << header.str() << "\n";
    for (const TimelineRow& row : rows) {
      std::ostringstream line;
      line << row.t << "," << row.segment;
      append_x_values(line, row.mean_x, row.cov_x);
      for (Eigen::Index i = 0; i < du; ++i) {
        line << "," << format_double(row.mean_u(i));
      }
      for (Eigen::Index i = 0; i < du; ++i) {
        for (Eigen::Index j = 0; j < dx; ++j) {
          if (row.K.has_value()) {
            line << "," << format_double((*row.K)(i, j));
          } else {
            line << ",";
          }
        }
      }
      for (Eigen::Index i = 0; i < du; ++i) {
        if (row.k.has_value()) {
          line << "," << format_double((*row.k)(i));
        } else {
          line << ",";
        }
      }
      line << "," << format_double(row.elbo);
      out << line.str() << "\n";
    }
    return;
  }

  json arr = json::array();
  for (const TimelineRow& row : rows) {
    json obj;
    obj["t"] = row.t;
    obj["segment"] = row.segment;
    obj["mean_x"] = to_json(row.mean_x);
    obj["cov_x"] = upper_triangle(row.cov_x);
    obj["mean_u"] = to_json(row.mean_u);
    if (row.K.has_value()) obj["K"] = full_matrix(*row.K);
    if (row.k.has_value()) obj["k"] = to_json(*row.k);
    obj["elbo"] = row.elbo;
    arr.push_back(obj);
  }
  out << arr.dump(2) << "\n";
}

void write_gains(const std::string& path,
                 const std::vector<PolicyGain>& policy, Format format) {
  std::ofstream out = open_out(path);
  if (policy.empty()) return;
  const Eigen::Index du = policy.front().K.rows();
  const Eigen::Index dx = policy.front().K.cols();

  if (format == Format::kCsv) {
    std::ostringstream header;
    header << "t";
    for (Eigen::Index i = 0; i < du; ++i) {
      for (Eigen::Index j = 0; j < dx; ++j) header << ",K_" << i << j;
    }
    for (Eigen::Index i = 0; i < du; ++i) header << ",k_" << i;
    for (Eigen::Index i = 0; i < du; ++i) {
      for (Eigen::Index j = i; j < du; ++j) header << ",cov_k_" << i << j;
    }
    out << header.str() << "\n";
    for (const PolicyGain& g : policy) {
      std::ostringstream line;
      line << g.t;
      for (Eigen::Index i = 0; i < du; ++i) {
        for (Eigen::Index j = 0; j < dx; ++j) {
          line << "," << format_double(g.K(i, j));
        }
      }
      for (Eigen::Index i = 0; i < du; ++i) {
        line << "," << format_double(g.k(i));
      }
      for (Eigen::Index i = 0; i < du; ++i) {
        for (Eigen::Index j = i; j < du; ++j) {
          line << "," << format_double(g.sigma_k(i, j));
        }
      }
      out << line.str() << "\n";
    }
    return;
  }

  json arr = json::array();
  for (const PolicyGain& g : policy) {
    json obj;
    obj["t"] = g.t;
    obj["K"] = full_matrix(g.K);
    obj["k"] = to_json(g.k);
    obj["cov_k"] = upper_triangle(g.sigma_k);
    arr.push_back(obj);
  }
  out << arr.dump(2) << "\n";
}

void write_trace(const std::string& path, const EMTrace& trace,
                 Format format) {
  std::ofstream out = open_out(path);
  if (format == Format::kCsv) {
    out << "iter,alpha,elbo\n";
    for (size_t i = 0; i < trace.elbos.size(); ++i) {
      out << i + 1 << "," << format_double(trace.alphas[i]) << ","
          << format_double(trace.elbos[i]) << "\n";
    }
    return;
  }
  json obj;
  obj["alphas"] = trace.alphas;
  obj["elbos"] = trace.elbos;
  obj["iterations"] = trace.iterations;
  obj["converged"] = trace.converged;
  out << obj.dump(2) << "\n";
}

void write_states(const std::string& path, const std::vector<Gaussian>& states,
                  Format format) {
  std::ofstream out = open_out(path);
  if (states.empty()) return;
  const Eigen::Index dx = states.front().dim();

  if (format == Format::kCsv) {
    std::ostringstream header;
    header << "t";
    append_x_headers(header, dx);
    out << header.str() << "\n";
    for (size_t t = 0; t < states.size(); ++t) {
      std::ostringstream line;
      line << t;
      append_x_values(line, states[t].mean(), states[t].cov());
      out << line.str() << "\n";
    }
    return;
  }

  json arr = json::array();
  for (size_t t = 0; t < states.size(); ++t) {
    json obj;
    obj["t"] = t;
    obj["mean_x"] = to_json(states[t].mean());
    obj["cov_x"] = upper_triangle(states[t].cov());
    arr.push_back(obj);
  }
  out << arr.dump(2) << "\n";
}

void write_scalar(const std::string& path, const std::string& key,
                  double value, Format format) {
  std::ofstream out = open_out(path);
  if (format == Format::kCsv) {
    out << key << "\n" << format_double(value) << "\n";
    return;
  }
  json obj;
  obj[key] = value;
  out << obj.dump(2) << "\n";
}

void write_ensemble(const std::string& path,
                    const std::vector<std::string>& names,
                    const std::vector<double>& free_energies,
                    const Vector& log_prior, const Vector& posterior,
                    Format format) {
  std::ofstream out = open_out(path);
  if (format == Format::kCsv) {
    out << "policy,free_energy,log_prior,posterior\n";
    for (size_t i = 0; i < names.size(); ++i) {
      out << names[i] << "," << format_double(free_energies[i]) << ","
          << format_double(log_prior(i)) << ","
          << format_double(posterior(i)) << "\n";
    }
    return;
  }
  json arr = json::array();
  for (size_t i = 0; i < names.size(); ++i) {
    json obj;
    obj["policy"] = names[i];
    obj["free_energy"] = free_energies[i];
    obj["log_prior"] = log_prior(i);
    obj["posterior"] = posterior(i);
    arr.push_back(obj);
  }
  out << arr.dump(2) << "\n";
}

void write_run_report(const std::string& path, const RunReport& report) {
  std::ofstream out = open_out(path);
  json obj;
  obj["scenario"] = report.scenario_name;
  obj["scenario_hash"] = report.scenario_hash;
  obj["subcommand"] = report.subcommand;
  obj["wall_time_ms"] = report.wall_time_ms;
  obj["em"] = {{"iterations", report.em_iterations},
               {"converged", report.em_converged},
               {"final_elbo", report.final_elbo},
               {"final_alpha", report.final_alpha}};
  obj["outputs"] = report.outputs;
  obj["warnings"] = report.warnings;
  out << obj.dump(2) << "\n";
}

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file for hashing: " + path);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char c;
  while (in.get(c)) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace i2c::report
