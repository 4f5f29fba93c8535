// SPDX-License-Identifier: Apache-2.0
// Copyright The dpmimo Authors.
//
// Error types shared across the library. Everything derives from std
// exceptions so callers that don't care can catch std::exception.

#pragma once

#include <stdexcept>
#include <string>

namespace dpmimo {

// Invalid value for a mathematical domain (e.g. angle outside [-1, 1]).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical procedure failed to reach its accuracy target.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An internal contract was violated (tolerances exceeded, shape mismatch).
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Bad user-supplied configuration. Carries the offending field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what),
        field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// A matrix required by an algorithm is numerically rank deficient.
class IllConditionedError : public std::runtime_error {
 public:
  IllConditionedError(const std::string& what, double cond)
      : std::runtime_error(what), cond_(cond) {}
  double condition_number() const noexcept { return cond_; }

 private:
  double cond_;
};

}  // namespace dpmimo
