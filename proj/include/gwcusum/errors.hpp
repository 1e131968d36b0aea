#pragma once

#include <stdexcept>
#include <string>

namespace gwcusum {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

class Unstable : public Error {
 public:
  Unstable(const std::string& what, double rho) : Error(what), rho_(rho) {}
  [[nodiscard]] double spectral_radius() const noexcept { return rho_; }

 private:
  double rho_;
};

/// No type has nondegenerate conditional variance, or an empty index set was requested.
class EmptyReduction : public Error {
 public:
  using Error::Error;
};

/// Gram matrix of the regressors is singular or too badly conditioned to invert.
class SingularGram : public Error {
 public:
  SingularGram(const std::string& what, double condition) : Error(what), condition_(condition) {}
  [[nodiscard]] double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

/// The critical-value table does not cover the requested (gamma, dimension, alpha, T).
class TableMiss : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class FormatVersionMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace gwcusum
