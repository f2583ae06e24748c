// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <stdexcept>
#include <string>

namespace psenh {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad or inconsistent configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed, missing or insufficient audio / manifest data (CLI exit code 3).
class DataError : public Error {
 public:
  using Error::Error;
};

// Tensor or signal shapes that do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// SNR or SDR undefined because a signal carries no energy.
class ZeroEnergyError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss (CLI exit code 4).
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace psenh
