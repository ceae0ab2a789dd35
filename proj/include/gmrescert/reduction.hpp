#pragma once

// The linear reduction factor M_B = min over complex lambda of
// ||I - lambda B||, its dual form over B^{-1}, the Elman and
// Starke/Eiermann-Ernst upper bounds, and empirical lower bounds from
// GMRES one-step ratios.
//
// f(lambda) = sigma_max(I - lambda B) is convex on C ~ R^2 but nonsmooth
// where singular values coalesce, so the minimizer is found by
// derivative-free descent: Nelder-Mead started from points of W(B^{-1})
// (the minimizer lies in its closure), followed by a compass-search
// polish with shrinking steps.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "gmrescert/fov.hpp"
#include "gmrescert/gmres.hpp"
#include "gmrescert/operator.hpp"
#include "gmrescert/rng.hpp"

namespace gmrescert {

struct ReductionReport {
  double m_b = 1.0;            // min ||I - lambda B||, clamped to [0, 1]
  Complex lambda_b{0, 0};      // minimizer of the primal form
  double m_b_dual = 1.0;       // min ||I - lambda B^{-1}||
  Complex lambda_binv{0, 0};   // minimizer of the dual form
  double starke_bound = 1.0;   // sqrt(1 - nu_B nu_{B^-1})
  double elman_bound = 1.0;    // sqrt(1 - nu_B^2/||B||^2)
  double empirical_lower = 0.0;
  int eval_count = 0;
  // Supporting quantities, populated by compute_mb.
  double nu_b = 0.0;
  double nu_binv = 0.0;
  double norm_b = 0.0;
  double norm_binv = 0.0;
};

inline std::pair<double, double> classical_bounds(double nu_b, double nu_binv,
                                                  double norm_b) {
  if (nu_b < 0 || nu_binv < 0 || norm_b < 0)
    throw std::invalid_argument("classical_bounds: inputs must be >= 0");
  if (nu_b > norm_b)
    throw std::invalid_argument("classical_bounds: nu_B exceeds ||B||");
  const double starke = std::sqrt(std::max(0.0, 1.0 - nu_b * nu_binv));
  const double ratio = norm_b > 0 ? nu_b / norm_b : 0.0;
  const double elman = std::sqrt(std::max(0.0, 1.0 - ratio * ratio));
  return {std::clamp(starke, 0.0, 1.0), std::clamp(elman, 0.0, 1.0)};
}

namespace detail {

/// sigma_max(I - lambda * M), with a closed form for diagonal M.
class AffineNormEvaluator {
 public:
  AffineNormEvaluator(const Matrix& m, bool diagonal, int budget)
      : m_(m), diagonal_(diagonal), budget_(budget) {}

  double operator()(Complex lambda) {
    if (++evals_ > budget_)
      throw NoConvergence(
          "compute_mb: evaluation budget exhausted before tolerance");
    if (diagonal_) {
      double worst = 0.0;
      for (Eigen::Index i = 0; i < m_.rows(); ++i)
        worst = std::max(worst, std::abs(1.0 - lambda * m_(i, i)));
      return worst;
    }
    Matrix shifted = -lambda * m_;
    shifted.diagonal().array() += 1.0;
    return spectral_norm(shifted);
  }

  int evals() const { return evals_; }

 private:
  const Matrix& m_;
  bool diagonal_;
  int budget_;
  int evals_ = 0;
};

struct MinPoint {
  Complex lambda{0, 0};
  double value = 0.0;
};

template <class F>
MinPoint nelder_mead(F& f, Complex start, double scale, double tol,
                     int max_iters) {
  std::array<Complex, 3> p = {start, start + Complex(scale, 0),
                              start + Complex(0, scale)};
  std::array<double, 3> v = {f(p[0]), f(p[1]), f(p[2])};
  auto order = [&] {
    if (v[0] > v[1]) { std::swap(v[0], v[1]); std::swap(p[0], p[1]); }
    if (v[1] > v[2]) { std::swap(v[1], v[2]); std::swap(p[1], p[2]); }
    if (v[0] > v[1]) { std::swap(v[0], v[1]); std::swap(p[0], p[1]); }
  };
  order();
  for (int it = 0; it < max_iters; ++it) {
    const double diam = std::max({std::abs(p[0] - p[1]),
                                  std::abs(p[0] - p[2]),
                                  std::abs(p[1] - p[2])});
    if (diam < tol && v[2] - v[0] < tol) break;
    const Complex centroid = 0.5 * (p[0] + p[1]);
    const Complex refl = centroid + (centroid - p[2]);
    const double frefl = f(refl);
    if (frefl < v[0]) {
      const Complex expd = centroid + 2.0 * (centroid - p[2]);
      const double fexpd = f(expd);
      if (fexpd < frefl) { p[2] = expd; v[2] = fexpd; }
      else { p[2] = refl; v[2] = frefl; }
    } else if (frefl < v[1]) {
      p[2] = refl;
      v[2] = frefl;
    } else {
      const Complex contr = centroid + 0.5 * ((frefl < v[2] ? refl : p[2]) -
                                              centroid);
      const double fcontr = f(contr);
      if (fcontr < std::min(frefl, v[2])) {
        p[2] = contr;
        v[2] = fcontr;
      } else {  // shrink toward the best vertex
        for (int i = 1; i < 3; ++i) {
          p[i] = p[0] + 0.5 * (p[i] - p[0]);
          v[i] = f(p[i]);
        }
      }
    }
    order();
  }
  return {p[0], v[0]};
}

template <class F>
MinPoint compass_polish(F& f, MinPoint best, double step, double min_step) {
  static const std::array<Complex, 8> dirs = {
      Complex(1, 0),  Complex(-1, 0), Complex(0, 1),  Complex(0, -1),
      Complex(std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2),
      Complex(std::numbers::sqrt2 / 2, -std::numbers::sqrt2 / 2),
      Complex(-std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2),
      Complex(-std::numbers::sqrt2 / 2, -std::numbers::sqrt2 / 2)};
  while (step > min_step) {
    bool improved = false;
    for (const Complex& d : dirs) {
      const Complex cand = best.lambda + step * d;
      const double fc = f(cand);
      if (fc < best.value) {
        best = {cand, fc};
        improved = true;
      }
    }
    if (!improved) step *= 0.5;
  }
  return best;
}

template <class F>
MinPoint minimize_affine_norm(F& f, const std::vector<Complex>& seeds,
                              double scale, double tol) {
  MinPoint best{seeds.front(), f(seeds.front())};
  for (const Complex& seed : seeds) {
    const MinPoint local =
        nelder_mead(f, seed, 0.05 * scale, std::max(tol, 1e-7 * scale), 60);
    if (local.value < best.value) best = local;
  }
  best = nelder_mead(f, best.lambda, 0.01 * scale, tol, 400);
  // The norm can be steep around a kink minimizer (slope of order ||B||),
  // so the polish walks the step far down to localize lambda itself.
  best = compass_polish(f, best, 0.01 * scale,
                        std::max(1e-12 * scale, 1e-17));
  return best;
}

/// Seed set from a numerical-range model: its centroid plus eight
/// boundary samples.
inline std::vector<Complex> seeds_from_fov(const FovModel& model) {
  std::vector<Complex> seeds;
  const std::size_t m = model.boundary.size();
  Complex centroid(0, 0);
  for (const Complex& p : model.boundary) centroid += p;
  centroid /= static_cast<double>(m);
  seeds.push_back(centroid);
  for (std::size_t i = 0; i < 8; ++i)
    seeds.push_back(model.boundary[(i * m) / 8]);
  return seeds;
}

/// One-step residual reduction at z: sqrt(1 - |(Bz,z)|^2/(||Bz||^2||z||^2)).
inline double one_step_ratio(const Matrix& b, const Vector& z) {
  const Vector bz = b * z;
  const double denom = bz.squaredNorm() * z.squaredNorm();
  if (denom == 0.0) return 1.0;
  const double coupling = std::norm(inner(bz, z));
  return std::sqrt(std::max(0.0, 1.0 - coupling / denom));
}

}  // namespace detail

/// Supremum of observed GMRES reduction ratios of B over seeded random
/// unit starts: `steps` GMRES steps per trial plus the closed one-step
/// formula at the same vectors. A lower bound on M_B.
inline double empirical_mb(const Operator& B, int trials, int steps,
                           std::uint64_t seed) {
  if (trials < 1 || steps < 1)
    throw std::invalid_argument("empirical_mb: trials and steps must be >= 1");
  const Eigen::Index n = B.dim();
  Rng rng(seed);
  double sup = 0.0;
  const int max_iter = std::min<int>(steps, static_cast<int>(n));
  for (int t = 0; t < trials; ++t) {
    const Vector z = rng.unit_vector(n);
    sup = std::max(sup, detail::one_step_ratio(B.entries(), z));
    const GmresTrace trace =
        run_gmres(B, z, Vector::Zero(n), max_iter, /*rtol=*/0.0);
    for (std::size_t k = 1; k < trace.residual_norms.size(); ++k) {
      if (trace.residual_norms[k - 1] <=
          1e-13 * trace.residual_norms.front())
        break;
      sup = std::max(sup, trace.residual_norms[k] /
                              trace.residual_norms[k - 1]);
    }
  }
  return sup;
}

/// Compute M_B, its minimizer, the dual form, classical upper bounds and
/// an empirical lower bound. Throws NearSingular for singular B and
/// NoConvergence when the evaluation budget (20000) runs out. Callers that
/// already built numerical-range models of B and B^{-1} can pass them to
/// skip the internal sweeps.
inline ReductionReport compute_mb(const Operator& B, double tol = 1e-9,
                                  const FovModel* fov_b_in = nullptr,
                                  const FovModel* fov_binv_in = nullptr) {
  if (!(tol > 0)) throw std::invalid_argument("compute_mb: tol must be > 0");
  const SingularSpectrum spec_b = singular_values(B);
  if (spec_b.smallest() <= kInvertibilityCutoff * spec_b.largest())
    throw NearSingular(spec_b.smallest());
  const Operator Binv = inverse(B);

  constexpr int kSeedAngles = 128;
  const FovModel fov_b =
      fov_b_in != nullptr ? *fov_b_in : build_fov(B, kSeedAngles);
  const FovModel fov_binv =
      fov_binv_in != nullptr ? *fov_binv_in : build_fov(Binv, kSeedAngles);

  ReductionReport report;
  report.norm_b = spec_b.largest();
  report.norm_binv = 1.0 / spec_b.smallest();
  report.nu_b = fov_b.nu;
  report.nu_binv = fov_binv.nu;

  Complex scalar;
  if (detail::is_scalar_matrix(B.entries(), &scalar)) {
    // B = scalar * I: lambda = 1/scalar zeros the norm exactly.
    report.m_b = 0.0;
    report.lambda_b = 1.0 / scalar;
    report.m_b_dual = 0.0;
    report.lambda_binv = scalar;
  } else {
    constexpr int kEvalBudget = 20000;
    detail::AffineNormEvaluator f_primal(B.entries(), B.is(Tag::Diagonal),
                                         kEvalBudget);
    const detail::MinPoint primal = detail::minimize_affine_norm(
        f_primal, detail::seeds_from_fov(fov_binv), report.norm_binv, tol);

    detail::AffineNormEvaluator f_dual(Binv.entries(), Binv.is(Tag::Diagonal),
                                       kEvalBudget - f_primal.evals());
    const detail::MinPoint dual = detail::minimize_affine_norm(
        f_dual, detail::seeds_from_fov(fov_b), report.norm_b, tol);

    report.m_b = std::clamp(primal.value, 0.0, 1.0);
    report.lambda_b = primal.lambda;
    report.m_b_dual = std::clamp(dual.value, 0.0, 1.0);
    report.lambda_binv = dual.lambda;
    report.eval_count = f_primal.evals() + f_dual.evals();
  }

  auto [starke, elman] =
      classical_bounds(report.nu_b, report.nu_binv, report.norm_b);
  report.starke_bound = starke;
  report.elman_bound = elman;

  // One-step lower bound at fixed seeded unit vectors.
  Rng rng(0x5eed0001u);
  double lower = 0.0;
  for (int i = 0; i < 64; ++i)
    lower = std::max(
        lower, detail::one_step_ratio(B.entries(), rng.unit_vector(B.dim())));
  report.empirical_lower = lower;
  return report;
}

struct MinimizerVerdict {
  bool lambda_b_in_range = false;
  double lambda_b_margin = 0.0;  // worst half-plane violation, <= 0 inside
  bool norm_bound_ok = false;
  double norm_bound_margin = 0.0;  // ||lambda_B B|| - (1 + M_B)
  bool lambda_binv_in_range = false;
  double lambda_binv_margin = 0.0;
  bool dual_norm_bound_ok = false;
  double dual_norm_bound_margin = 0.0;

  bool pass() const {
    return lambda_b_in_range && norm_bound_ok && lambda_binv_in_range &&
           dual_norm_bound_ok;
  }
};

namespace detail {

inline double membership_margin(const FovModel& model, Complex w) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < model.angles.size(); ++i) {
    const double proj = std::cos(model.angles[i]) * w.real() -
                        std::sin(model.angles[i]) * w.imag();
    worst = std::max(worst, proj - model.support[i]);
  }
  return worst;
}

}  // namespace detail

/// Checks the minimizer localization: lambda_B inside the outer polygon of
/// W(B^{-1}) and ||lambda_B B|| <= 1 + M_B, plus the symmetric dual pair.
inline MinimizerVerdict minimizer_check(const Operator& B,
                                        const ReductionReport& report,
                                        const FovModel& fov_b,
                                        const FovModel& fov_binv,
                                        double slack = 1e-6) {
  MinimizerVerdict v;
  v.lambda_b_margin = detail::membership_margin(fov_binv, report.lambda_b);
  v.lambda_b_in_range = v.lambda_b_margin <= slack;

  const double norm_b = spectral_norm(B);
  v.norm_bound_margin =
      std::abs(report.lambda_b) * norm_b - (1.0 + report.m_b);
  v.norm_bound_ok = v.norm_bound_margin <= slack;

  v.lambda_binv_margin = detail::membership_margin(fov_b, report.lambda_binv);
  v.lambda_binv_in_range = v.lambda_binv_margin <= slack;

  const double norm_binv =
      report.norm_binv > 0 ? report.norm_binv : 1.0 / singular_values(B).smallest();
  v.dual_norm_bound_margin =
      std::abs(report.lambda_binv) * norm_binv - (1.0 + report.m_b);
  v.dual_norm_bound_ok = v.dual_norm_bound_margin <= slack;
  return v;
}

}  // namespace gmrescert
