#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "gmrescert/common.hpp"

namespace gmrescert {

// Deterministic random source. The engine is std::mt19937_64 (fully
// specified by the standard, so the stream is identical on every
// platform); doubles and normals are derived here instead of through
// std::*_distribution, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard real normal via Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] keeps the log finite.
    const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(phi);
    have_spare_ = true;
    return r * std::cos(phi);
  }

  /// Standard complex normal, E|z|^2 = 1.
  Complex cnormal() {
    const double re = normal();
    const double im = normal();
    return Complex(re, im) / std::sqrt(2.0);
  }

  Vector cnormal_vector(Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = cnormal();
    return v;
  }

  /// Unit vector from the rotation-invariant distribution.
  Vector unit_vector(Eigen::Index n) {
    Vector v = cnormal_vector(n);
    double norm = v.norm();
    while (norm == 0.0) {  // astronomically unlikely, but cheap to handle
      v = cnormal_vector(n);
      norm = v.norm();
    }
    return v / norm;
  }

  Matrix cnormal_matrix(Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = cnormal();
    return m;
  }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace gmrescert
