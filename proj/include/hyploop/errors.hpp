#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace hyploop {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input value (bad box, non power-of-two sample count, z2 <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, std::string expected);

  std::size_t offset() const noexcept { return offset_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::string expected_;
};

/// log/sqrt of a negative number, division by zero, and similar.
class EvalDomainError : public Error {
 public:
  using Error::Error;
};

class NonDifferentiable : public Error {
 public:
  using Error::Error;
};

class DegenerateLoop : public Error {
 public:
  using Error::Error;
};

class QuadratureFailure : public Error {
 public:
  using Error::Error;
};

/// Right-hand side has a component along the kernel; `projection` holds the
/// normalized L2 projections onto the three kernel directions.
class NotOrthogonal : public Error {
 public:
  NotOrthogonal(const std::array<double, 3>& projection, double tol);

  const std::array<double, 3>& projection() const noexcept { return projection_; }

 private:
  std::array<double, 3> projection_;
};

class NewtonDiverged : public Error {
 public:
  using Error::Error;
};

class StepTooLarge : public Error {
 public:
  using Error::Error;
};

class NoCritical : public Error {
 public:
  using Error::Error;
};

class NotEmbedded : public Error {
 public:
  using Error::Error;
};

}  // namespace hyploop
