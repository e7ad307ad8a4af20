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

#include "i2c/scenario_io.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "i2c/errors.hpp"

namespace i2c {

namespace {

using nlohmann::json;

Matrix parse_matrix(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    throw ConfigError(field + ": expected a nested array of numbers");
  }
  const size_t rows = j.size();
  const size_t cols = j.front().size();
  Matrix m(rows, cols);
  for (size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw ConfigError(field + ": ragged rows (row " + std::to_string(i) +
                        ")");
    }
    for (size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number()) {
        throw ConfigError(field + ": non-numeric entry at (" +
                          std::to_string(i) + ", " + std::to_string(k) + ")");
      }
      m(i, k) = j[i][k].get<double>();
    }
  }
  if (!m.allFinite()) throw ConfigError(field + ": non-finite entry");
  return m;
}

Vector parse_vector(const json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field + ": expected an array");
  Vector v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw ConfigError(field + ": non-numeric entry at " + std::to_string(i));
    }
    v(i) = j[i].get<double>();
  }
  if (!v.allFinite()) throw ConfigError(field + ": non-finite entry");
  return v;
}

std::vector<Vector> parse_vector_list(const json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field + ": expected an array of arrays");
  std::vector<Vector> out;
  out.reserve(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    out.push_back(parse_vector(j[i], field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

const json& at(const json& j, const std::string& key,
               const std::string& context) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw ConfigError(context.empty()
                          ? "missing required key '" + key + "'"
                          : context + ": missing required key '" + key + "'");
  }
  return *it;
}

int parse_int(const json& j, const std::string& field) {
  if (!j.is_number_integer()) {
    throw ConfigError(field + ": expected an integer");
  }
  return j.get<int>();
}

Scenario parse_json(const json& root, const std::string& name) {
  Scenario s;
  s.name = root.value("name", name);

  const json& dims = at(root, "dims", "");
  s.dx = parse_int(at(dims, "dx", "dims"), "dims.dx");
  s.du = parse_int(at(dims, "du", "dims"), "dims.du");
  s.dz = parse_int(at(dims, "dz", "dims"), "dims.dz");
  s.dy = parse_int(at(dims, "dy", "dims"), "dims.dy");
  s.horizon = parse_int(at(root, "horizon", ""), "horizon");
  s.tau = parse_int(at(root, "tau", ""), "tau");

  const json& dyn = at(root, "dynamics", "");
  s.dynamics.A = parse_matrix(at(dyn, "A", "dynamics"), "dynamics.A");
  s.dynamics.B = parse_matrix(at(dyn, "B", "dynamics"), "dynamics.B");
  s.dynamics.c = parse_vector(at(dyn, "c", "dynamics"), "dynamics.c");
  s.dynamics.sigma_w =
      parse_matrix(at(dyn, "SigmaW", "dynamics"), "dynamics.SigmaW");

  const json& mm = at(root, "measure_model", "");
  s.measure_model.C = parse_matrix(at(mm, "C", "measure_model"),
                                   "measure_model.C");
  s.measure_model.D = parse_matrix(at(mm, "D", "measure_model"),
                                   "measure_model.D");
  s.measure_model.e = parse_vector(at(mm, "e", "measure_model"),
                                   "measure_model.e");
  s.measure_model.sigma_v = parse_matrix(at(mm, "SigmaV", "measure_model"),
                                         "measure_model.SigmaV");

  const json& cost = at(root, "cost", "");
  s.cost.W = parse_matrix(at(cost, "W", "cost"), "cost.W");
  s.cost.z_star = parse_vector_list(at(cost, "z_star", "cost"), "cost.z_star");
  if (cost.contains("C") || cost.contains("D") || cost.contains("e")) {
    s.cost.C = parse_matrix(at(cost, "C", "cost"), "cost.C");
    s.cost.D = parse_matrix(at(cost, "D", "cost"), "cost.D");
    s.cost.e = parse_vector(at(cost, "e", "cost"), "cost.e");
  } else {
    if (s.dz != s.dx + s.du) {
      throw ConfigError(
          "cost: no explicit z-map given and dz != dx + du, cannot default "
          "to z = [x; u]");
    }
    stacked_z_map(s.dx, s.du, &s.cost.C, &s.cost.D, &s.cost.e);
  }

  const json& x0 = at(root, "x0_prior", "");
  {
    Vector mean = parse_vector(at(x0, "mean", "x0_prior"), "x0_prior.mean");
    Matrix cov = parse_matrix(at(x0, "cov", "x0_prior"), "x0_prior.cov");
    if (cov.rows() != mean.size()) {
      throw ConfigError("x0_prior: mean/cov dimension mismatch");
    }
    const double eig = smallest_eigenvalue(cov);
    if (eig < -1e-9) {
      throw ConfigError("x0_prior.cov: not PSD, smallest eigenvalue " +
                        std::to_string(eig));
    }
    s.x0_prior = Gaussian(std::move(mean), std::move(cov));
  }

  const json& up = at(root, "u_prior", "");
  {
    Vector mean = parse_vector(at(up, "mean", "u_prior"), "u_prior.mean");
    Matrix cov = parse_matrix(at(up, "cov", "u_prior"), "u_prior.cov");
    if (cov.rows() != mean.size()) {
      throw ConfigError("u_prior: mean/cov dimension mismatch");
    }
    const double eig = smallest_eigenvalue(cov);
    if (eig < -1e-9) {
      throw ConfigError("u_prior.cov: not PSD, smallest eigenvalue " +
                        std::to_string(eig));
    }
    Gaussian broadcast(std::move(mean), std::move(cov));
    s.u_prior.assign(std::max(s.horizon, 0), broadcast);
  }

  s.measurements = parse_vector_list(at(root, "measurements", ""),
                                     "measurements");
  if (root.contains("pinned_controls")) {
    s.pinned_controls =
        parse_vector_list(root["pinned_controls"], "pinned_controls");
  }

  if (root.contains("nonlinear")) {
    const json& nl = root["nonlinear"];
    NonlinearSpec spec;
    spec.name = at(nl, "name", "nonlinear").get<std::string>();
    if (nl.contains("params")) {
      const json& p = nl["params"];
      spec.mass = p.value("mass", spec.mass);
      spec.length = p.value("length", spec.length);
      spec.gravity = p.value("gravity", spec.gravity);
      spec.dt = p.value("dt", spec.dt);
      spec.control_gain = p.value("control_gain", spec.control_gain);
    }
    s.nonlinear = spec;
  }

  if (root.contains("ensemble")) {
    const json& ens = root["ensemble"];
    EnsembleSpec spec;
    if (!at(ens, "gamma", "ensemble").is_number()) {
      throw ConfigError("ensemble.gamma: expected a number");
    }
    spec.gamma = ens["gamma"].get<double>();
    const json& pols = at(ens, "policies", "ensemble");
    if (!pols.is_array()) {
      throw ConfigError("ensemble.policies: expected an array");
    }
    for (size_t i = 0; i < pols.size(); ++i) {
      EnsemblePolicy p;
      p.name = pols[i].value("name", "policy_" + std::to_string(i));
      p.controls = parse_vector_list(at(pols[i], "controls", "ensemble"),
                                     "ensemble.policies[" +
                                         std::to_string(i) + "].controls");
      spec.policies.push_back(std::move(p));
    }
    spec.log_prior = parse_vector(at(ens, "log_prior", "ensemble"),
                                  "ensemble.log_prior");
    s.ensemble = std::move(spec);
  }

  validate_scenario(s);
  return s;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& name) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("scenario parse error: " + std::string(e.what()));
  }
  if (!root.is_object()) {
    throw ConfigError("scenario parse error: top level must be an object");
  }
  return parse_json(root, name);
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open scenario file: " + path);
  }
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_scenario(text, std::filesystem::path(path).stem().string());
}

}  // namespace i2c
