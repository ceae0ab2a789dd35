#pragma once

// Deterministic, seeded generators for the operator families used by the
// test battery and the CLI. Identical specs (including the seed)
// regenerate bit-identical operators.

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include "gmrescert/fov.hpp"
#include "gmrescert/matrix_market.hpp"
#include "gmrescert/operator.hpp"
#include "gmrescert/rng.hpp"

namespace gmrescert {

enum class Family {
  UnitaryArctangent,
  ShiftedIdentityPlusCompact,
  AccretivePlusCompact,
  ConvectionDiffusionLike,
  CustomFile,
};

inline std::string family_name(Family f) {
  switch (f) {
    case Family::UnitaryArctangent: return "unitary_arctangent";
    case Family::ShiftedIdentityPlusCompact:
      return "shifted_identity_plus_compact";
    case Family::AccretivePlusCompact: return "accretive_plus_compact";
    case Family::ConvectionDiffusionLike: return "convection_diffusion_like";
    case Family::CustomFile: return "custom_file";
  }
  return "unknown";
}

inline Family family_from_name(const std::string& name) {
  for (Family f : {Family::UnitaryArctangent,
                   Family::ShiftedIdentityPlusCompact,
                   Family::AccretivePlusCompact,
                   Family::ConvectionDiffusionLike, Family::CustomFile})
    if (family_name(f) == name) return f;
  throw std::invalid_argument("unknown family '" + name + "'");
}

/// Haar-like random unitary: QR of a complex normal matrix with the
/// R diagonal phase-fixed so the factorization is unambiguous.
inline Matrix random_unitary(Eigen::Index n, Rng& rng) {
  Matrix g = rng.cnormal_matrix(n, n);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    const Complex d = r(j, j);
    const double a = std::abs(d);
    if (a > 0) q.col(j) *= d / a;
  }
  return q;
}

/// Compact perturbation with prescribed singular values gamma * j^{-alpha}:
/// C = U diag(gamma j^{-alpha}) V*.
inline Operator compact_perturbation(Eigen::Index dim, double gamma,
                                     double alpha, Rng& rng) {
  if (gamma == 0.0)
    return Operator(Matrix::Zero(dim, dim), TagSet{Tag::Diagonal});
  const Matrix u = random_unitary(dim, rng);
  const Matrix v = random_unitary(dim, rng);
  Vector d(dim);
  for (Eigen::Index j = 0; j < dim; ++j)
    d[j] = gamma * std::pow(static_cast<double>(j + 1), -alpha);
  return Operator(u * d.asDiagonal() * v.adjoint());
}

/// Diagonal unitary with eigenvalues e^{i arctan j}, j = -n..n.
inline Operator unitary_arctangent(int n) {
  if (n < 1)
    throw std::invalid_argument("unitary_arctangent: n must be >= 1");
  const Eigen::Index dim = 2 * static_cast<Eigen::Index>(n) + 1;
  Matrix m = Matrix::Zero(dim, dim);
  for (int j = -n; j <= n; ++j)
    m(j + n, j + n) = std::polar(1.0, std::atan(static_cast<double>(j)));
  return Operator(std::move(m), TagSet{Tag::Diagonal, Tag::Unitary});
}

/// 1-D convection-diffusion stencil: (-1, 2, -1)/h^2 plus centered
/// convection peclet*(-1, 0, 1)/(2h) with h = 1/(nx+1).
inline Operator convection_diffusion_like(int nx, double peclet) {
  if (nx < 3)
    throw std::invalid_argument("convection_diffusion_like: nx must be >= 3");
  const double h = 1.0 / (nx + 1);
  const double diff = 1.0 / (h * h);
  const double conv = peclet / (2.0 * h);
  Matrix m = Matrix::Zero(nx, nx);
  for (int i = 0; i < nx; ++i) {
    m(i, i) = 2.0 * diff;
    if (i > 0) m(i, i - 1) = -diff - conv;
    if (i + 1 < nx) m(i, i + 1) = -diff + conv;
  }
  return Operator::with_detected_tags(std::move(m));
}

struct OperatorPair {
  Operator B;
  Operator C;
};

namespace detail {

/// Retry-and-halve loop to keep A = B + C comfortably invertible.
template <class MakeC>
OperatorPair pair_with_invertible_sum(const Operator& B, MakeC make_c) {
  for (int attempt = 0; attempt < 7; ++attempt) {
    const double scale = std::pow(0.5, attempt);
    Operator C = make_c(scale);
    const SingularSpectrum s = singular_values(B.entries() + C.entries());
    if (s.smallest() > 1e-10 * s.largest()) return {B, std::move(C)};
  }
  throw GenerationFailed(
      "generator: A = B + C stayed near singular after 6 rescalings");
}

}  // namespace detail

/// B = lambda*I plus a compact C with sigma_j(C) = gamma * j^{-alpha}.
inline OperatorPair shifted_identity_plus_compact(Eigen::Index dim,
                                                  Complex lambda, double alpha,
                                                  double gamma,
                                                  std::uint64_t seed) {
  if (lambda == Complex(0, 0))
    throw std::invalid_argument("shifted generator: lambda must be nonzero");
  if (!(alpha > 0))
    throw std::invalid_argument("shifted generator: alpha must be positive");
  Matrix b = Matrix::Zero(dim, dim);
  b.diagonal().setConstant(lambda);
  TagSet tags{Tag::Diagonal};
  if (std::abs(std::abs(lambda) - 1.0) <= 1e-12) tags.set(Tag::Unitary);
  Operator B(std::move(b), tags);
  return detail::pair_with_invertible_sum(B, [&](double scale) {
    Rng rng(seed);
    return compact_perturbation(dim, gamma * scale, alpha, rng);
  });
}

/// Accretive non-normal B = I + spread*((S - S*)/2 + D) with S random and
/// D real diagonal in [0, 1]; C as in the shifted generator. The real part
/// of (Bz, z) is at least 1, so 0 stays outside W(B); this is asserted.
inline OperatorPair accretive_plus_compact(Eigen::Index dim, double spread,
                                           double gamma, double alpha,
                                           std::uint64_t seed) {
  if (spread < 0)
    throw std::invalid_argument("accretive generator: spread must be >= 0");
  Rng rng(seed);
  const Matrix s = rng.cnormal_matrix(dim, dim);
  Matrix b = Matrix::Identity(dim, dim);
  b += spread * 0.5 * (s - s.adjoint());
  for (Eigen::Index i = 0; i < dim; ++i)
    b(i, i) += spread * rng.uniform();
  Operator B(std::move(b));
  if (zero_membership(B, 64).verdict != ZeroLocation::StrictlyOutside)
    throw ZeroInFov("accretive generator: 0 not strictly outside W(B)");
  return detail::pair_with_invertible_sum(B, [&](double scale) {
    Rng crng(seed ^ 0x9e3779b97f4a7c15ull);
    return compact_perturbation(dim, gamma * scale, alpha, crng);
  });
}

/// Generation recipe. `params` is family-specific; the id is a stable
/// FNV-1a hash of the canonical serialization.
struct ProblemSpec {
  Family family = Family::ShiftedIdentityPlusCompact;
  Eigen::Index dim = 10;
  std::map<std::string, double> params;  // alpha, gamma, shift_re, shift_im,
                                         // spread, peclet, n
  std::uint64_t seed = 1;

  double param(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }

  std::string canonical() const {
    std::string s = family_name(family) + ";dim=" + std::to_string(dim) +
                    ";seed=" + std::to_string(seed);
    for (const auto& [k, v] : params) {
      char buf[48];
      std::snprintf(buf, sizeof(buf), ";%s=%.17g", k.c_str(), v);
      s += buf;
    }
    return s;
  }

  std::string id() const {
    // FNV-1a, 64 bit.
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canonical()) {
      h ^= c;
      h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
  }
};

/// Materialize a spec into the pair (B, C). Families that define a single
/// operator get C from the gamma/alpha perturbation parameters (scaled by
/// ||B|| for the convection-diffusion family, whose entries are O(1/h^2)).
inline OperatorPair generate(const ProblemSpec& spec) {
  switch (spec.family) {
    case Family::ShiftedIdentityPlusCompact:
      return shifted_identity_plus_compact(
          spec.dim,
          Complex(spec.param("shift_re", 2.0), spec.param("shift_im", 0.0)),
          spec.param("alpha", 2.0), spec.param("gamma", 0.5), spec.seed);
    case Family::AccretivePlusCompact:
      return accretive_plus_compact(spec.dim, spec.param("spread", 0.3),
                                    spec.param("gamma", 0.2),
                                    spec.param("alpha", 2.0), spec.seed);
    case Family::UnitaryArctangent: {
      const int n = static_cast<int>(spec.param("n", 1));
      Operator B = unitary_arctangent(n);
      return detail::pair_with_invertible_sum(B, [&](double scale) {
        Rng rng(spec.seed);
        return compact_perturbation(B.dim(),
                                    spec.param("gamma", 0.0) * scale,
                                    spec.param("alpha", 2.0), rng);
      });
    }
    case Family::ConvectionDiffusionLike: {
      Operator B = convection_diffusion_like(
          static_cast<int>(spec.dim), spec.param("peclet", 0.0));
      const double norm_b = spectral_norm(B);
      return detail::pair_with_invertible_sum(B, [&](double scale) {
        Rng rng(spec.seed);
        return compact_perturbation(B.dim(),
                                    spec.param("gamma", 0.0) * norm_b * scale,
                                    spec.param("alpha", 2.0), rng);
      });
    }
    case Family::CustomFile:
      throw std::invalid_argument("generate: custom_file has no generator");
  }
  throw std::invalid_argument("generate: unknown family");
}

}  // namespace gmrescert
