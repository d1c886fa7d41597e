// Copyright 2026 The tspd Authors
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tspd {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument supplied by a caller (bad sizes, negative distances...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input. Carries the 1-based line number of the offending line.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed input that violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An action outside the feasibility mask was submitted.
class FeasibilityError : public Error {
 public:
  using Error::Error;
};

/// A transition would not advance time while work remains.
class LivelockError : public Error {
 public:
  using Error::Error;
};

/// An operation was applied to a state it is not defined for.
class StateError : public Error {
 public:
  using Error::Error;
};

/// Problem too large for the requested solver.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Softmax over a row without any admissible entry.
class MaskError : public Error {
 public:
  using Error::Error;
};

/// Non-finite value encountered in a numeric routine.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Structural misuse of the differentiation graph.
class GraphError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint cannot be read or does not match the expected configuration.
class LoadError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tspd
