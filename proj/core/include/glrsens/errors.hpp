#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace glrsens {

// Base class for every error the toolkit raises on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// A user callable produced NaN or +/-inf at an evaluated point.
class NonFiniteValue : public Error {
 public:
  using Error::Error;
};

// |phi(y)| exceeded the bound declared on the Performance.
class BoundViolation : public Error {
 public:
  using Error::Error;
};

class SingularJacobian : public Error {
 public:
  using Error::Error;
};

class ZeroDensity : public Error {
 public:
  using Error::Error;
};

class SmoothnessViolation : public Error {
 public:
  using Error::Error;
};

class MissingFaceDraw : public Error {
 public:
  using Error::Error;
};

class UnsupportedSupport : public Error {
 public:
  using Error::Error;
};

class InvalidRate : public Error {
 public:
  using Error::Error;
};

class InfiniteBound : public Error {
 public:
  using Error::Error;
};

class NoConditionalSampler : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class DimensionTooLarge : public Error {
 public:
  using Error::Error;
};

class Nonconvergence : public Error {
 public:
  using Error::Error;
};

class RootFindFailure : public Error {
 public:
  using Error::Error;
};

// Finite-difference weights are undefined on the support boundary.
class BoundaryEvaluation : public Error {
 public:
  using Error::Error;
};

class UnknownProblem : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Wraps a per-sample error with the replication index that hit it.
class ReplicationError : public Error {
 public:
  ReplicationError(std::size_t replication, const std::string& msg)
      : Error("replication " + std::to_string(replication) + ": " + msg),
        replication_(replication) {}

  std::size_t replication() const { return replication_; }

 private:
  std::size_t replication_;
};

}  // namespace glrsens
