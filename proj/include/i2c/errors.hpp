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

#ifndef I2C_ERRORS_HPP_
#define I2C_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace i2c {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input: unreadable files, dimension mismatches, invalid
// covariances, bad flags. Maps to CLI exit code 2.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

// Numerical failure during a solve: singular innovation, non-finite
// iterates, objective decrease. Maps to CLI exit code 1.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(what) {}
};

}  // namespace i2c

#endif  // I2C_ERRORS_HPP_
