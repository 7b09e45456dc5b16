// Copyright 2026 The qklab authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace qklab {

/// Base class for all qklab exceptions.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent caller input (shape mismatch, bad value, ...).
class InputError : public Error {
  public:
    using Error::Error;
};

/// A request would exceed the configured qubit or memory budget.
class CapacityError : public Error {
  public:
    using Error::Error;
};

/// Qubit or element index out of range.
class IndexError : public Error {
  public:
    using Error::Error;
};

/// An on-disk file does not match its expected format.
class FormatError : public Error {
  public:
    using Error::Error;
};

/// An iterative solver hit its iteration cap before reaching tolerance.
class ConvergenceError : public Error {
  public:
    using Error::Error;
};

/// A numeric routine failed (e.g. an eigendecomposition did not converge).
class NumericError : public Error {
  public:
    using Error::Error;
};

/// A run configuration failed to parse or validate.
class ConfigError : public Error {
  public:
    using Error::Error;
};

} // namespace qklab
