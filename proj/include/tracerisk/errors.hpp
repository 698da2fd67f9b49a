// Copyright 2026 The tracerisk Authors
// Use of this source code is governed by the Apache License, Version 2.0,
// which can be found in the LICENSE file.

#pragma once

#include <stdexcept>

namespace tracerisk {

// Base for all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input schema does not match the data (missing column, unknown attribute).
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A malformed row or record; the message carries the line number.
class RowError : public Error {
 public:
  using Error::Error;
};

// Bad or unknown configuration key/value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Design matrix rank deficiency; the message names the offending columns.
class RankError : public Error {
 public:
  using Error::Error;
};

// Exact enumeration would exceed its subset budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

// No actor is eligible for sampling under the current policy.
class NoEligibleError : public Error {
 public:
  using Error::Error;
};

// Filesystem trouble (unreadable input, unwritable output).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tracerisk
