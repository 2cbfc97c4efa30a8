// Copyright 2026 The qpredict Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "qpredict/core.hpp"

#include <stdexcept>
#include <string>

namespace qpredict {

/// Base of every error the library raises. `kind()` is the stable
/// machine-readable tag the CLI reports.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

/// Empty, negative or otherwise malformed parameters.
class ValidationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "validation"; }
};

/// Parameters that are individually valid but cannot be simulated
/// faithfully together (e.g. a synthesis grid that would alias).
class ConfigurationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "rejected_configuration"; }
};

class RangeError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "range"; }
};

/// The averaged phase left the unambiguous Ramsey readout range.
class PhaseWrapError : public Error {
 public:
  PhaseWrapError(const std::string& what, double phase, Index window = -1,
                 Index cycle = -1, Index step = 0)
      : Error(what), phase_(phase), window_(window), cycle_(cycle), step_(step) {}

  const char* kind() const noexcept override { return "phase_wrap"; }
  double phase() const noexcept { return phase_; }
  Index window() const noexcept { return window_; }
  Index cycle() const noexcept { return cycle_; }
  Index step() const noexcept { return step_; }

 private:
  double phase_;
  Index window_;
  Index cycle_;
  Index step_;
};

class SingularSystemError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "singular_system"; }
};

class UndefinedCorrelationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "undefined_correlation"; }
};

/// Malformed input file; `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, Index line) : Error(what), line_(line) {}
  const char* kind() const noexcept override { return "parse"; }
  Index line() const noexcept { return line_; }

 private:
  Index line_;
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io"; }
};

}  // namespace qpredict
