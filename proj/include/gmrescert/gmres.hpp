#pragma once

// Instrumented GMRES for dense complex systems.
//
// Arnoldi runs modified Gram-Schmidt with one full reorthogonalization
// pass; the Hessenberg least-squares problem is updated by complex Givens
// rotations and the residual norm is read off the rotated right-hand side.
// Besides the iterates, the trace records the two ascending orthonormal
// bases: t_1..t_{k+1} spanning the Krylov spaces K_j(A, r0) and z_1..z_k
// spanning A*K_j(A, r0), the latter obtained by Gram-Schmidt on the
// columns A*t_1, A*t_2, ... in order. Per-step identities between
// consecutive residuals and the bases are exposed as check operations.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "gmrescert/operator.hpp"

namespace gmrescert {

struct GmresTrace {
  std::vector<double> residual_norms;         // ||r_0||, ||r_1||, ...
  std::vector<std::optional<double>> ratios;  // ||r_k||/||r_{k-1}||, k >= 1
  Matrix t_basis;  // orthonormal, spans K_1 c K_2 c ...
  Matrix z_basis;  // orthonormal, spans A K_1 c A K_2 c ...
  std::optional<int> breakdown_step;
  Vector solution;

  int steps() const {
    return static_cast<int>(residual_norms.size()) - 1;
  }
};

namespace detail {

struct GivensRotation {
  double c = 1.0;
  Complex s = Complex(0, 0);

  static GivensRotation annihilate(Complex a, Complex b) {
    GivensRotation g;
    const double na = std::abs(a), nb = std::abs(b);
    if (nb == 0.0) {
      g.c = 1.0;
      g.s = Complex(0, 0);
    } else if (na == 0.0) {
      g.c = 0.0;
      g.s = std::conj(b) / nb;
    } else {
      const double r = std::hypot(na, nb);
      g.c = na / r;
      g.s = (a / na) * std::conj(b) / r;
    }
    return g;
  }

  void apply(Complex& x, Complex& y) const {
    const Complex xn = c * x + s * y;
    const Complex yn = -std::conj(s) * x + c * y;
    x = xn;
    y = yn;
  }
};

/// Gram-Schmidt QR (MGS + one reorthogonalization pass) of the given
/// columns, in order. Columns must be linearly independent.
inline Matrix ascending_orthonormal_basis(const Matrix& cols) {
  const Eigen::Index n = cols.rows(), k = cols.cols();
  Matrix q(n, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    Vector w = cols.col(j);
    const double scale = w.norm();
    for (Eigen::Index i = 0; i < j; ++i) w -= q.col(i).dot(w) * q.col(i);
    for (Eigen::Index i = 0; i < j; ++i) w -= q.col(i).dot(w) * q.col(i);
    const double nw = w.norm();
    if (nw <= 1e-14 * scale)
      throw NumericalError(
          "ascending basis: column " + std::to_string(j + 1) +
          " is linearly dependent");
    q.col(j) = w / nw;
  }
  return q;
}

}  // namespace detail

/// GMRES on A x = b started at x0. Stops at rtol*||r_0||, at an invariant
/// subspace (breakdown), or after max_iter steps (default: dim).
inline GmresTrace run_gmres(const Operator& A, const Vector& b,
                            const Vector& x0, int max_iter = -1,
                            double rtol = 1e-12) {
  const Eigen::Index n = A.dim();
  if (b.size() != n || x0.size() != n)
    throw DimensionMismatch("run_gmres: vector lengths do not match dim " +
                            std::to_string(n));
  if (max_iter < 0) max_iter = static_cast<int>(n);
  if (max_iter > n)
    throw std::invalid_argument("run_gmres: max_iter exceeds dimension");
  if (rtol < 0) throw std::invalid_argument("run_gmres: rtol must be >= 0");

  GmresTrace trace;
  const Vector r0 = b - A.entries() * x0;
  const double beta = r0.norm();
  if (beta == 0.0) {
    // Zero initial residual: trivially converged.
    trace.residual_norms = {0.0};
    trace.t_basis.resize(n, 0);
    trace.z_basis.resize(n, 0);
    trace.breakdown_step = 0;
    trace.solution = x0;
    return trace;
  }

  const double norm_a = spectral_norm(A);
  const double breakdown_tol = 1e-13 * norm_a;

  Matrix t(n, max_iter + 1);          // Arnoldi vectors
  Matrix at(n, max_iter);             // A * t_j, kept for the z basis
  Matrix h = Matrix::Zero(max_iter + 1, max_iter);
  std::vector<detail::GivensRotation> rotations;
  Vector g = Vector::Zero(max_iter + 1);
  g[0] = beta;
  t.col(0) = r0 / beta;
  trace.residual_norms.push_back(beta);

  int done = 0;            // completed Arnoldi steps (columns of h)
  bool broke_down = false;
  for (int k = 0; k < max_iter; ++k) {
    Vector w = A.entries() * t.col(k);
    at.col(k) = w;
    for (int i = 0; i <= k; ++i) {
      const Complex hik = t.col(i).dot(w);
      h(i, k) += hik;
      w -= hik * t.col(i);
    }
    for (int i = 0; i <= k; ++i) {  // reorthogonalization pass
      const Complex corr = t.col(i).dot(w);
      h(i, k) += corr;
      w -= corr * t.col(i);
    }
    const double hsub = w.norm();
    h(k + 1, k) = hsub;

    broke_down = hsub <= breakdown_tol;
    if (!broke_down) t.col(k + 1) = w / hsub;

    for (int i = 0; i < k; ++i) rotations[i].apply(h(i, k), h(i + 1, k));
    auto rot = detail::GivensRotation::annihilate(h(k, k), h(k + 1, k));
    rot.apply(h(k, k), h(k + 1, k));
    rot.apply(g[k], g[k + 1]);
    rotations.push_back(rot);

    const double res = std::abs(g[k + 1]);
    const double prev = trace.residual_norms.back();
    trace.residual_norms.push_back(res);
    trace.ratios.push_back(prev > 0.0 ? std::optional<double>(res / prev)
                                      : std::nullopt);
    done = k + 1;
    if (broke_down || res <= rtol * beta) break;
  }

  if (broke_down) {
    trace.breakdown_step = done;
    // An invariant subspace of an invertible operator contains the
    // solution; anything else means the input was effectively singular.
    if (trace.residual_norms.back() > 1e-10 * beta)
      throw NumericalError(
          "run_gmres: Krylov breakdown without convergence; "
          "operator appears singular");
  }

  // Solve the rotated triangular system for the final iterate.
  Vector y = Vector::Zero(done);
  for (int i = done - 1; i >= 0; --i) {
    Complex acc = g[i];
    for (int j = i + 1; j < done; ++j) acc -= h(i, j) * y[j];
    y[i] = acc / h(i, i);
  }
  trace.solution = x0 + t.leftCols(done) * y;

  const int tcols = broke_down ? done : done + 1;
  trace.t_basis = t.leftCols(tcols);
  trace.z_basis = detail::ascending_orthonormal_basis(at.leftCols(done));
  return trace;
}

struct MoretCheck {
  double lhs = 0.0;      // ||r_k||
  double rhs = 0.0;      // |(t_{k+1}, z_k)| * ||r_{k-1}||  (or shifted form)
  double rel_gap = 0.0;  // |lhs-rhs| / max(lhs, ||r_0||*1e-14)
};

namespace detail {

inline void require_checkable_step(const GmresTrace& trace, int k) {
  const int zcols = static_cast<int>(trace.z_basis.cols());
  const int tcols = static_cast<int>(trace.t_basis.cols());
  if (k < 1 || k > zcols || k + 1 > tcols ||
      k >= static_cast<int>(trace.residual_norms.size()))
    throw StepOutOfRange("moret check: step " + std::to_string(k) +
                         " is out of range for this trace");
  if (trace.residual_norms[static_cast<std::size_t>(k - 1)] <= 0.0)
    throw StepOutOfRange("moret check: previous residual vanishes at step " +
                         std::to_string(k));
}

inline MoretCheck finish_check(const GmresTrace& trace, int k, double rhs) {
  MoretCheck out;
  out.lhs = trace.residual_norms[static_cast<std::size_t>(k)];
  out.rhs = rhs;
  const double denom =
      std::max(out.lhs, trace.residual_norms.front() * 1e-14);
  out.rel_gap = std::abs(out.lhs - out.rhs) / denom;
  return out;
}

}  // namespace detail

/// Check ||r_k|| = |(t_{k+1}, z_k)| * ||r_{k-1}|| on a recorded trace.
inline MoretCheck moret_step_check(const GmresTrace& trace, int k) {
  detail::require_checkable_step(trace, k);
  const double coupling =
      std::abs(inner(trace.t_basis.col(k), trace.z_basis.col(k - 1)));
  return detail::finish_check(
      trace, k,
      coupling * trace.residual_norms[static_cast<std::size_t>(k - 1)]);
}

/// Shifted form ||r_k|| = |(t_{k+1}, (I - lambda A^{-1}) z_k)| * ||r_{k-1}||;
/// the value is independent of lambda because (t_{k+1}, A^{-1} z_k) = 0.
inline MoretCheck shifted_moret_check(const GmresTrace& trace, int k,
                                      Complex lambda, const Operator& Ainv) {
  detail::require_checkable_step(trace, k);
  if (Ainv.dim() != trace.t_basis.rows())
    throw DimensionMismatch("shifted_moret_check: Ainv dimension mismatch");
  const Vector zk = trace.z_basis.col(k - 1);
  const Vector shifted = zk - lambda * (Ainv.entries() * zk);
  const double coupling = std::abs(inner(trace.t_basis.col(k), shifted));
  return detail::finish_check(
      trace, k,
      coupling * trace.residual_norms[static_cast<std::size_t>(k - 1)]);
}

}  // namespace gmrescert
