// Copyright 2026 The susforge Authors
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
#include <utility>

namespace susforge {

// Base of every error raised by the pipeline. Stage failures that should turn
// into a rejected candidate are caught at the orchestration layer; everything
// else propagates to the CLI as a systemic failure.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ApplyError : public Error {
 public:
  using Error::Error;
};

class VcsError : public Error {
 public:
  using Error::Error;
};

class EnvError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A candidate dropped by a pipeline stage. `reason` is the stage tag recorded
// in manifests ("env-build", "coverage-loop-exhausted", ...).
class Rejection : public Error {
 public:
  Rejection(std::string reason, const std::string& detail)
      : Error(detail.empty() ? reason : reason + ": " + detail), reason_(std::move(reason)) {}

  const std::string& reason() const { return reason_; }

 private:
  std::string reason_;
};

}  // namespace susforge
