// Copyright 2026 The pii-forge Authors.
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

namespace piiforge {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or arguments. The CLI maps these to exit code 1.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data. The CLI maps these to exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class LabelError : public ParseError {
 public:
  using ParseError::ParseError;
};

class SpanConflictError : public DataError {
 public:
  using DataError::DataError;
};

class RatioError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class NoInfoboxError : public DataError {
 public:
  using DataError::DataError;
};

class AlignmentError : public DataError {
 public:
  using DataError::DataError;
};

class ShardError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class ModelFormatError : public DataError {
 public:
  using DataError::DataError;
};

class VersionMismatchError : public ModelFormatError {
 public:
  using ModelFormatError::ModelFormatError;
};

// A review decision that is not valid against the current review state.
class ReviewError : public DataError {
 public:
  using DataError::DataError;
};

class LogCorruptionError : public DataError {
 public:
  LogCorruptionError(std::size_t last_good_offset, const std::string& what)
      : DataError(what + " (last good offset " +
                  std::to_string(last_good_offset) + ")"),
        last_good_offset_(last_good_offset) {}

  std::size_t last_good_offset() const { return last_good_offset_; }

 private:
  std::size_t last_good_offset_;
};

}  // namespace piiforge
