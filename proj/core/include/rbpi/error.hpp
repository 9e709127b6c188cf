#pragma once

#include <stdexcept>
#include <string>

namespace rbpi {

/// Base of every exception the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside an operation's domain (bad probability, shape mismatch, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Factorization or solve failed after repair.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Not enough usable out-of-bag information to calibrate.
class CalibrationError : public Error {
 public:
  using Error::Error;
};

/// A metric cannot be evaluated at some point (zero width, singular covariance).
class MetricError : public Error {
 public:
  using Error::Error;
};

/// CSV / schema / config ingestion failure. Messages carry row and column context.
class IngestionError : public Error {
 public:
  using Error::Error;
};

}  // namespace rbpi
