#pragma once

#include <stdexcept>
#include <string>

namespace awe {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite or otherwise unusable filter state.
class InvalidStateError : public Error {
 public:
  using Error::Error;
};

/// A Cholesky downdate (or QR step) left the covariance factor non-PSD.
class CovarianceDegeneracyError : public Error {
 public:
  using Error::Error;
};

/// Airspeed too small or (anti)parallel to the tether; lift direction undefined.
class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

/// Integration produced non-finite values.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Simulator node states blew up; a smaller step is usually required.
class InstabilityError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. Carries a 1-based line number when known.
class IngestError : public Error {
 public:
  IngestError(const std::string& what, long line = -1)
      : Error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

/// Bad or inconsistent run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A log with no detectable pumping period (e.g. constant controller phase).
class NoPeriodError : public Error {
 public:
  using Error::Error;
};

}  // namespace awe
