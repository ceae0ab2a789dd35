#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace gmrescert {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Inner product (x, y): linear in x, antilinear in y.
inline Complex inner(const Vector& x, const Vector& y) { return y.dot(x); }

// Exceptions. The CLI maps them onto exit codes: invalid input -> 1,
// numerical failure -> 2, violated inequality -> 3.

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InvalidP : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NotSelfAdjoint : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct StepOutOfRange : std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct InsufficientSteps : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NearSingular : NumericalError {
  double sigma_min;
  explicit NearSingular(double s)
      : NumericalError("NearSingular: smallest singular value " +
                       std::to_string(s)),
        sigma_min(s) {}
};

struct NoConvergence : NumericalError {
  using NumericalError::NumericalError;
};

struct ZeroInFov : NumericalError {
  using NumericalError::NumericalError;
};

struct GenerationFailed : NumericalError {
  using NumericalError::NumericalError;
};

/// A certified inequality failed. Signals a defect, not a bad input.
struct BoundViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  std::size_t line;
  ParseError(std::size_t line_no, const std::string& what)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + what),
        line(line_no) {}
};

struct NonSquare : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gmrescert
