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

#ifndef I2C_SCENARIO_IO_HPP_
#define I2C_SCENARIO_IO_HPP_

#include <string>

#include "i2c/model.hpp"

namespace i2c {

// Parses and validates a scenario file (JSON). Throws ConfigError on
// malformed input, dimension mismatches, or non-PSD covariances; the
// message names the offending field.
Scenario load_scenario(const std::string& path);

// Same, from an in-memory JSON string (used by tests).
Scenario parse_scenario(const std::string& text, const std::string& name);

}  // namespace i2c

#endif  // I2C_SCENARIO_IO_HPP_
