// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace pulsecomp {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or size disagreement between arguments.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation
// (non-positive-definite scale, unsupported code length, dof too small, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A Gaussian law whose covariance is singular has no density.
class SingularLawError : public Error {
 public:
  using Error::Error;
};

// Quadrature grid unusable: too few points, not increasing, or the
// integrand is non-finite on it.
class GridError : public Error {
 public:
  using Error::Error;
};

// Numerical failure at run time (eigensolver breakdown, negative
// eigenvalue beyond tolerance, ...).
class NumericError : public Error {
 public:
  using Error::Error;
};

// Invalid experiment configuration; message carries the field path.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Filesystem failure while reading configs or writing results.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pulsecomp
