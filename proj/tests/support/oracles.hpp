#pragma once

// Independent oracles used by the tests. Each one recomputes a quantity
// through a route disjoint from the library implementation it checks:
// brute-force polynomial least squares for GMRES residuals, dense grid
// search for the reduction factor, and discrete support functions for
// hull distances.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "gmrescert/common.hpp"

namespace oracle {

using gmrescert::Complex;
using gmrescert::Matrix;
using gmrescert::Vector;

/// min over p in P_k, p(0) = 1 of ||p(A) r0||: dense least squares in the
/// monomial Krylov basis [A r0, ..., A^k r0].
inline double gmres_residual_oracle(const Matrix& a, const Vector& r0,
                                    int k) {
  if (k == 0) return r0.norm();
  Matrix krylov(r0.size(), k);
  Vector v = r0;
  for (int j = 0; j < k; ++j) {
    v = a * v;
    krylov.col(j) = v;
  }
  // residual = r0 + K c at the least-squares minimizer c.
  const Vector c = krylov.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV)
                       .solve(-r0);
  return (r0 + krylov * c).norm();
}

/// Spectral norm through a route independent of the library (full Jacobi
/// SVD).
inline double jacobi_norm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()[0];
}

struct GridMin {
  Complex lambda{0, 0};
  double value = 0.0;
};

/// Dense grid search for min over complex lambda of ||I - lambda B||,
/// refined by repeated zooming around the best cell.
inline GridMin min_affine_norm_grid(const Matrix& b, double lo, double hi,
                                    int cells, int zooms) {
  const Eigen::Index n = b.rows();
  auto f = [&](Complex lambda) {
    Matrix m = -lambda * b;
    m.diagonal().array() += 1.0;
    return jacobi_norm(m);
  };
  GridMin best;
  best.value = std::numeric_limits<double>::infinity();
  double re_lo = lo, re_hi = hi, im_lo = lo, im_hi = hi;
  for (int z = 0; z <= zooms; ++z) {
    const int m = z == 0 ? cells : 20;
    GridMin local = best;
    for (int i = 0; i <= m; ++i)
      for (int j = 0; j <= m; ++j) {
        const Complex lambda(re_lo + (re_hi - re_lo) * i / m,
                             im_lo + (im_hi - im_lo) * j / m);
        const double v = f(lambda);
        if (v < local.value) local = {lambda, v};
      }
    best = local;
    const double half_re = 1.5 * (re_hi - re_lo) / m;
    const double half_im = 1.5 * (im_hi - im_lo) / m;
    re_lo = best.lambda.real() - half_re;
    re_hi = best.lambda.real() + half_re;
    im_lo = best.lambda.imag() - half_im;
    im_hi = best.lambda.imag() + half_im;
  }
  return best;
}

/// Distance from the origin to the convex hull of a point set: monotone
/// chain hull, then an inside test and exact point-segment distances.
inline double hull_distance_oracle(std::vector<Complex> points) {
  std::sort(points.begin(), points.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  const std::size_t n = points.size();
  if (n == 0) return 0.0;
  if (n == 1) return std::abs(points[0]);

  auto cross = [](Complex o, Complex a, Complex b) {
    return (a.real() - o.real()) * (b.imag() - o.imag()) -
           (a.imag() - o.imag()) * (b.real() - o.real());
  };
  std::vector<Complex> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {  // lower
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], points[i]) <= 0) --k;
    hull[k++] = points[i];
  }
  for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {  // upper
    while (k >= t && cross(hull[k - 2], hull[k - 1], points[i]) <= 0) --k;
    hull[k++] = points[i];
  }
  hull.resize(k - 1);  // counter-clockwise, last point == first dropped

  auto segment_distance = [](Complex a, Complex b) {
    const Complex ab = b - a;
    const double len2 = std::norm(ab);
    if (len2 == 0.0) return std::abs(a);
    double t = -(a.real() * ab.real() + a.imag() * ab.imag()) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return std::abs(a + t * ab);
  };

  if (hull.size() == 1) return std::abs(hull[0]);
  if (hull.size() == 2) return segment_distance(hull[0], hull[1]);

  bool inside = true;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Complex a = hull[i];
    const Complex b = hull[(i + 1) % hull.size()];
    if (cross(a, b, Complex(0, 0)) < 0) inside = false;
    best = std::min(best, segment_distance(a, b));
  }
  return inside ? 0.0 : best;
}

/// Power-iteration estimate of the spectral norm (fixed iteration count).
inline double power_iteration_norm(const Matrix& m, int iters,
                                   unsigned seed) {
  std::mt19937_64 eng(seed);
  Vector v(m.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double re = static_cast<double>(eng() >> 11) * 0x1.0p-53 - 0.5;
    const double im = static_cast<double>(eng() >> 11) * 0x1.0p-53 - 0.5;
    v[i] = Complex(re, im);
  }
  v.normalize();
  const Matrix gram = m.adjoint() * m;
  double value = 0.0;
  for (int it = 0; it < iters; ++it) {
    v = gram * v;
    const double norm = v.norm();
    if (norm == 0.0) return 0.0;
    value = norm;
    v /= norm;
  }
  return std::sqrt(value);
}

}  // namespace oracle
