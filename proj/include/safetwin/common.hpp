// Copyright 2026 The safetwin Authors
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

#ifndef SAFETWIN__COMMON_HPP_
#define SAFETWIN__COMMON_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace safetwin
{

/// Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
  explicit Error(const std::string & what) : std::runtime_error(what) {}
  /// Short machine-readable category, e.g. "parse" or "protocol".
  virtual const char * kind() const noexcept { return "error"; }
};

class ParseError : public Error
{
public:
  ParseError(const std::string & message, std::size_t line, std::size_t column = 0);
  const char * kind() const noexcept override { return "parse"; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string & message() const noexcept { return message_; }

private:
  std::string message_;
  std::size_t line_;
  std::size_t column_;
};

/// A reference to an id that does not exist.
class ReferenceError : public Error
{
public:
  ReferenceError(const std::string & message, std::string missing_id)
  : Error(message), missing_id_(std::move(missing_id))
  {
  }
  const char * kind() const noexcept override { return "reference"; }
  const std::string & missing_id() const noexcept { return missing_id_; }

private:
  std::string missing_id_;
};

class ValidationError : public Error
{
public:
  explicit ValidationError(std::vector<std::string> violations);
  const char * kind() const noexcept override { return "validation"; }
  const std::vector<std::string> & violations() const noexcept { return violations_; }

private:
  std::vector<std::string> violations_;
};

class UnsupportedElementError : public Error
{
public:
  explicit UnsupportedElementError(std::string element)
  : Error("unsupported element: " + element), element_(std::move(element))
  {
  }
  const char * kind() const noexcept override { return "unsupported"; }
  const std::string & element() const noexcept { return element_; }

private:
  std::string element_;
};

class DomainError : public Error
{
public:
  using Error::Error;
  const char * kind() const noexcept override { return "domain"; }
};

class ConfigError : public Error
{
public:
  using Error::Error;
  const char * kind() const noexcept override { return "config"; }
};

class InputError : public Error
{
public:
  using Error::Error;
  const char * kind() const noexcept override { return "input"; }
};

class ProtocolError : public Error
{
public:
  using Error::Error;
  const char * kind() const noexcept override { return "protocol"; }
};

class TransportError : public Error
{
public:
  TransportError(const std::string & message, std::int64_t last_good_tick)
  : Error(message + " (last good tick " + std::to_string(last_good_tick) + ")"),
    last_good_tick_(last_good_tick)
  {
  }
  const char * kind() const noexcept override { return "transport"; }
  std::int64_t last_good_tick() const noexcept { return last_good_tick_; }

private:
  std::int64_t last_good_tick_;
};

class CoverageError : public Error
{
public:
  explicit CoverageError(std::string detector)
  : Error("detector '" + detector + "' is not covered by any candidate route"),
    detector_(std::move(detector))
  {
  }
  const char * kind() const noexcept override { return "coverage"; }
  const std::string & detector() const noexcept { return detector_; }

private:
  std::string detector_;
};

class ScenarioError : public Error
{
public:
  using Error::Error;
  const char * kind() const noexcept override { return "scenario"; }
};

class EmptySummaryError : public Error
{
public:
  explicit EmptySummaryError(std::string scenario)
  : Error("no matched conflict episodes for scenario '" + scenario + "'"),
    scenario_(std::move(scenario))
  {
  }
  const char * kind() const noexcept override { return "empty-summary"; }
  const std::string & scenario() const noexcept { return scenario_; }

private:
  std::string scenario_;
};

class IoError : public Error
{
public:
  IoError(const std::string & message, std::string path)
  : Error(message + ": " + path), path_(std::move(path))
  {
  }
  const char * kind() const noexcept override { return "io"; }
  const std::string & path() const noexcept { return path_; }

private:
  std::string path_;
};

/// Shortest decimal text that parses back to exactly `value`.
/// Infinities are written as "inf"/"-inf" and NaN as "nan".
std::string format_double(double value);

/// Parses a full token as a double (accepts "inf", "-inf", "nan").
/// Returns false if the token is not entirely a number.
bool parse_double(std::string_view token, double & out);
bool parse_int(std::string_view token, std::int64_t & out);

/// Splits on any run of whitespace.
std::vector<std::string_view> split_ws(std::string_view text);
std::vector<std::string> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

std::string read_file(const std::string & path);
void write_file(const std::string & path, std::string_view content);

}  // namespace safetwin

#endif  // SAFETWIN__COMMON_HPP_
