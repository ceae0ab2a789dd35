#pragma once

// Numerical range (field of values) geometry via the support function
// h(theta) = lambda_max((e^{i theta} B + e^{-i theta} B*)/2). Each angle
// contributes a supporting half-plane {Re(e^{i theta} w) <= h(theta)}; the
// intersection over a sweep is an outer model of W(B), and the Rayleigh
// values of the top eigenvectors are boundary points (an inner model).
// The distance from the origin, nu, comes from the largest signed margin
// over supporting half-planes, refined by golden-section in theta.
//
// Diagonal operators take a closed-form path: h(theta) is a maximum over
// the rotated eigenvalues and the boundary point is the maximizing
// eigenvalue itself.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "gmrescert/operator.hpp"

namespace gmrescert {

struct FovModel {
  std::vector<double> angles;     // sorted, in [0, 2*pi)
  std::vector<double> support;    // h(theta_i)
  std::vector<Complex> boundary;  // (B v_i, v_i) for the top eigenvector v_i
  double nu = 0.0;                // distance from 0 to W(B), outer model
  bool zero_in_closure = false;
  double margin = 0.0;            // refined min_theta h(theta)
  double norm_b = 0.0;
};

namespace detail {

class SupportEvaluator {
 public:
  explicit SupportEvaluator(const Operator& b)
      : mat_(b.entries()), diagonal_(b.is(Tag::Diagonal)) {}

  double value(double theta) const {
    if (diagonal_) return diagonal_support(theta).first;
    auto eigs = hermitian_eigs(rotated_hermitian_part(theta),
                               /*want_vectors=*/false);
    return eigs.eigenvalues[eigs.eigenvalues.size() - 1];
  }

  std::pair<double, Complex> value_and_point(double theta) const {
    if (diagonal_) {
      auto [h, idx] = diagonal_support(theta);
      return {h, mat_(idx, idx)};
    }
    auto eigs = hermitian_eigs(rotated_hermitian_part(theta));
    const Eigen::Index n = mat_.rows();
    const Vector v = eigs.eigenvectors.col(n - 1);
    return {eigs.eigenvalues[n - 1], inner(mat_ * v, v)};
  }

 private:
  Matrix rotated_hermitian_part(double theta) const {
    const Matrix rotated = std::polar(1.0, theta) * mat_;
    return 0.5 * (rotated + rotated.adjoint());
  }

  std::pair<double, Eigen::Index> diagonal_support(double theta) const {
    double best = -std::numeric_limits<double>::infinity();
    Eigen::Index arg = 0;
    for (Eigen::Index i = 0; i < mat_.rows(); ++i) {
      const double v = (std::polar(1.0, theta) * mat_(i, i)).real();
      if (v > best) {
        best = v;
        arg = i;
      }
    }
    return {best, arg};
  }

  const Matrix& mat_;
  bool diagonal_;
};

/// Golden-section minimization of f on [lo, hi]; f must be unimodal on the
/// bracket. Tolerance is in the argument.
inline std::pair<double, double> golden_min(
    const std::function<double(double)>& f, double lo, double hi,
    double theta_tol) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > theta_tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  const double xm = 0.5 * (a + b);
  return {xm, f(xm)};
}

/// Refined global minimum of a sampled periodic function. Every sampled
/// local minimum within `cushion` of the best sample gets a golden-section
/// pass over its bracket.
inline double refine_periodic_min(const std::vector<double>& angles,
                                  const std::vector<double>& samples,
                                  const std::function<double(double)>& f,
                                  double cushion, double theta_tol = 1e-12) {
  const std::size_t m = samples.size();
  double best = *std::min_element(samples.begin(), samples.end());
  const double threshold = best + cushion;
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < m; ++i) {
    const double prev = samples[(i + m - 1) % m];
    const double next = samples[(i + 1) % m];
    if (samples[i] > threshold || samples[i] > prev || samples[i] > next)
      continue;
    double lo = angles[(i + m - 1) % m];
    double hi = angles[(i + 1) % m];
    if (i == 0) lo -= two_pi;
    if (i + 1 == m) hi += two_pi;
    best = std::min(best, golden_min(f, lo, hi, theta_tol).second);
  }
  return best;
}

}  // namespace detail

inline double fov_tolerance(double norm_b) { return 1e-9 * (1.0 + norm_b); }

/// Sweep m equispaced angles and assemble the support-function model of
/// W(B), including nu and the zero-membership verdict.
inline FovModel build_fov(const Operator& B, int m_angles = 720) {
  if (m_angles < 16)
    throw std::invalid_argument("build_fov: need at least 16 angles");
  const double two_pi = 2.0 * std::numbers::pi;
  detail::SupportEvaluator eval(B);

  FovModel model;
  model.norm_b = spectral_norm(B);
  model.angles.resize(static_cast<std::size_t>(m_angles));
  model.support.resize(static_cast<std::size_t>(m_angles));
  model.boundary.resize(static_cast<std::size_t>(m_angles));

  for (int i = 0; i < m_angles; ++i) {
    const double theta = two_pi * i / m_angles;
    auto [h, point] = eval.value_and_point(theta);
    model.angles[static_cast<std::size_t>(i)] = theta;
    model.support[static_cast<std::size_t>(i)] = h;
    model.boundary[static_cast<std::size_t>(i)] = point;
  }

  const double dtheta = two_pi / m_angles;
  const double cushion =
      std::max(1e-12, 0.5 * dtheta * dtheta * (1.0 + model.norm_b));
  auto h_of = [&](double theta) { return eval.value(theta); };
  model.margin =
      detail::refine_periodic_min(model.angles, model.support, h_of, cushion);
  model.nu = std::max(0.0, -model.margin);
  model.zero_in_closure = model.margin >= -fov_tolerance(model.norm_b);
  return model;
}

/// Membership in the outer polygon cut out by the sampled half-planes.
inline bool in_outer_polygon(const FovModel& model, Complex w,
                             double slack = 1e-10) {
  for (std::size_t i = 0; i < model.angles.size(); ++i) {
    const double proj = std::cos(model.angles[i]) * w.real() -
                        std::sin(model.angles[i]) * w.imag();
    if (proj > model.support[i] + slack) return false;
  }
  return true;
}

/// Distance from w to the outer model of W(B) (0 inside), via supporting
/// half-plane duality: dist = max over theta of (Re(e^{i theta} w) -
/// h(theta))^+. Points inside the sampled polygon return 0 without any
/// further eigenvalue work; outside points get one golden-section pass
/// around the deepest sampled violation.
inline double distance_outside(const Operator& B, const FovModel& model,
                               Complex w) {
  const std::size_t m = model.angles.size();
  double worst = -std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double proj = std::cos(model.angles[i]) * w.real() -
                        std::sin(model.angles[i]) * w.imag();
    const double deficit = proj - model.support[i];  // positive outside
    if (deficit > worst) {
      worst = deficit;
      arg = i;
    }
  }
  if (worst <= 0.0) return 0.0;

  detail::SupportEvaluator eval(B);
  auto f = [&](double theta) {
    const double proj =
        std::cos(theta) * w.real() - std::sin(theta) * w.imag();
    return eval.value(theta) - proj;  // minimized = deepest violation
  };
  const double two_pi = 2.0 * std::numbers::pi;
  double lo = model.angles[(arg + m - 1) % m];
  double hi = model.angles[(arg + 1) % m];
  if (arg == 0) lo -= two_pi;
  if (arg + 1 == m) hi += two_pi;
  const double refined = -detail::golden_min(f, lo, hi, 1e-7).second;
  return std::max(0.0, std::max(worst, refined));
}

/// nu_B and nu_{B^{-1}}, cross-checked against
/// nu_{B^{-1}} >= nu_B/||B||^2 and nu_B >= nu_{B^{-1}}/||B^{-1}||^2.
inline std::pair<double, double> nu_pair(const Operator& B,
                                         int m_angles = 720) {
  const Operator Binv = inverse(B);
  const FovModel fov_b = build_fov(B, m_angles);
  const FovModel fov_binv = build_fov(Binv, m_angles);
  const double norm_b = fov_b.norm_b;
  const double norm_binv = fov_binv.norm_b;
  constexpr double slack = 1e-8;
  if (fov_binv.nu + slack < fov_b.nu / (norm_b * norm_b))
    throw BoundViolation("nu_pair: nu(B^-1) >= nu(B)/||B||^2 violated");
  if (fov_b.nu + slack < fov_binv.nu / (norm_binv * norm_binv))
    throw BoundViolation("nu_pair: nu(B) >= nu(B^-1)/||B^-1||^2 violated");
  return {fov_b.nu, fov_binv.nu};
}

enum class ZeroLocation { StrictlyOutside, OnClosureBoundaryOrInside };

struct ZeroMembership {
  ZeroLocation verdict;
  double margin;  // min_theta h(theta)
};

/// Verdict on 0 versus W(B). On matrices W is closed, so the verdict is
/// two-valued: strictly outside (nu > 0) or in the closed set.
inline ZeroMembership zero_membership(const Operator& B,
                                      int m_angles = 720) {
  const FovModel model = build_fov(B, m_angles);
  ZeroMembership out;
  out.margin = model.margin;
  out.verdict = model.margin < -fov_tolerance(model.norm_b)
                    ? ZeroLocation::StrictlyOutside
                    : ZeroLocation::OnClosureBoundaryOrInside;
  return out;
}

}  // namespace gmrescert
