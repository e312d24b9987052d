#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ipdg {

using Complex = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;

inline constexpr const char *kVersion = "0.1.0";

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

class InvalidParameter : public Error {
public:
  using Error::Error;
};

/// Point lies outside the requested element beyond tolerance.
class OutOfElement : public Error {
public:
  using Error::Error;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

/// Direct factorization failed (structurally or numerically singular system).
class SingularSystem : public Error {
public:
  using Error::Error;
};

/// Iterative solve stopped above tolerance; carries the best iterate found.
class ConvergenceFailure : public Error {
public:
  ConvergenceFailure(const std::string &msg, double residual, int iterations,
                     std::vector<Complex> best = {})
      : Error(msg), achieved_residual(residual), iterations(iterations),
        best_iterate(std::move(best)) {}

  double achieved_residual;
  int iterations;
  std::vector<Complex> best_iterate;
};

class IoError : public Error {
public:
  using Error::Error;
};

} // namespace ipdg
