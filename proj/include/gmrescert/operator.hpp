#pragma once

// Dense complex operator model and the linear algebra kernels the rest of
// the library is built on: apply/adjoint/inverse, SVD and Schatten norms,
// Hermitian eigendecomposition, spectral norm.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gmrescert/common.hpp"

namespace gmrescert {

enum class Tag : unsigned { Diagonal = 1u, Unitary = 2u, SelfAdjoint = 4u };

class TagSet {
 public:
  TagSet() = default;
  TagSet(std::initializer_list<Tag> tags) {
    for (Tag t : tags) set(t);
  }
  void set(Tag t) { bits_ |= static_cast<unsigned>(t); }
  bool has(Tag t) const { return (bits_ & static_cast<unsigned>(t)) != 0; }
  bool empty() const { return bits_ == 0; }

 private:
  unsigned bits_ = 0;
};

namespace detail {

inline double max_abs(const Matrix& m) {
  return m.cwiseAbs().maxCoeff();
}

}  // namespace detail

namespace detail {

/// Exact test for m == scalar * I (bitwise on entries).
inline bool is_scalar_matrix(const Matrix& m, Complex* scalar = nullptr) {
  const Eigen::Index n = m.rows();
  const Complex d = m(0, 0);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i == j ? m(i, j) != d : m(i, j) != Complex(0, 0)) return false;
    }
  if (scalar != nullptr) *scalar = d;
  return true;
}

}  // namespace detail

inline TagSet detect_tags(const Matrix& m) {
  TagSet tags;
  const Eigen::Index n = m.rows();
  bool diag = true;
  for (Eigen::Index j = 0; j < n && diag; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      if (i != j && m(i, j) != Complex(0, 0)) {
        diag = false;
        break;
      }
  if (diag) tags.set(Tag::Diagonal);
  if (detail::max_abs(m.adjoint() * m - Matrix::Identity(n, n)) <= 1e-12)
    tags.set(Tag::Unitary);
  if (detail::max_abs(m - m.adjoint()) <= 1e-12) tags.set(Tag::SelfAdjoint);
  return tags;
}

/// Dense square complex matrix with optional structural assertions.
/// Tag invariants are validated at construction.
class Operator {
 public:
  explicit Operator(Matrix entries, TagSet tags = {})
      : mat_(std::move(entries)), tags_(tags) {
    if (mat_.rows() != mat_.cols())
      throw NonSquare("operator must be square, got " +
                      std::to_string(mat_.rows()) + "x" +
                      std::to_string(mat_.cols()));
    if (mat_.rows() == 0) throw NonSquare("operator must be nonempty");
    validate_tags();
  }

  static Operator with_detected_tags(Matrix entries) {
    TagSet tags = detect_tags(entries);
    return Operator(std::move(entries), tags);
  }

  Eigen::Index dim() const { return mat_.rows(); }
  const Matrix& entries() const { return mat_; }
  const TagSet& tags() const { return tags_; }
  bool is(Tag t) const { return tags_.has(t); }

 private:
  void validate_tags() const {
    const Eigen::Index n = mat_.rows();
    if (tags_.has(Tag::Diagonal)) {
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
          if (i != j && mat_(i, j) != Complex(0, 0))
            throw std::invalid_argument(
                "diagonal tag: off-diagonal entry is nonzero");
    }
    if (tags_.has(Tag::Unitary)) {
      if (detail::max_abs(mat_.adjoint() * mat_ -
                          Matrix::Identity(n, n)) > 1e-12)
        throw std::invalid_argument("unitary tag: O*O deviates from I");
    }
    if (tags_.has(Tag::SelfAdjoint)) {
      if (detail::max_abs(mat_ - mat_.adjoint()) > 1e-12)
        throw std::invalid_argument("selfAdjoint tag: O deviates from O*");
    }
  }

  Matrix mat_;
  TagSet tags_;
};

/// Nonincreasing singular values sigma_1 >= ... >= sigma_n >= 0.
struct SingularSpectrum {
  std::vector<double> values;

  /// sigma_j with the compact-operator convention sigma_j = 0 for j > n
  /// (1-based j).
  double sigma(std::size_t j) const {
    if (j == 0) throw StepOutOfRange("sigma index is 1-based");
    return j <= values.size() ? values[j - 1] : 0.0;
  }
  double largest() const { return values.empty() ? 0.0 : values.front(); }
  double smallest() const { return values.empty() ? 0.0 : values.back(); }
};

inline Vector apply(const Operator& op, const Vector& v) {
  if (v.size() != op.dim())
    throw DimensionMismatch("apply: vector length " +
                            std::to_string(v.size()) + " != dim " +
                            std::to_string(op.dim()));
  return op.entries() * v;
}

inline Operator adjoint(const Operator& op) {
  return Operator::with_detected_tags(op.entries().adjoint());
}

inline SingularSpectrum singular_values(const Matrix& m) {
  Eigen::BDCSVD<Matrix> svd(m);
  SingularSpectrum s;
  s.values.resize(static_cast<std::size_t>(svd.singularValues().size()));
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    s.values[static_cast<std::size_t>(i)] =
        std::max(0.0, svd.singularValues()[i]);
  std::sort(s.values.begin(), s.values.end(), std::greater<double>());
  return s;
}

inline SingularSpectrum singular_values(const Operator& op) {
  if (op.is(Tag::Diagonal)) {
    SingularSpectrum s;
    s.values.resize(static_cast<std::size_t>(op.dim()));
    for (Eigen::Index i = 0; i < op.dim(); ++i)
      s.values[static_cast<std::size_t>(i)] = std::abs(op.entries()(i, i));
    std::sort(s.values.begin(), s.values.end(), std::greater<double>());
    return s;
  }
  return singular_values(op.entries());
}

inline double schatten_norm(const SingularSpectrum& s, double p) {
  if (!(p > 0.0)) throw InvalidP("schatten_norm: p must be positive");
  const double scale = s.largest();
  if (scale == 0.0) return 0.0;
  double acc = 0.0;
  for (double v : s.values) acc += std::pow(v / scale, p);
  return scale * std::pow(acc, 1.0 / p);
}

// Invertibility cutoff: the theory assumes exact invertibility, finite
// precision needs a threshold relative to the largest singular value.
inline constexpr double kInvertibilityCutoff = 1e-12;

/// Inverse by full-pivot LU. Throws NearSingular when
/// sigma_min <= 1e-12 * sigma_max.
inline Operator inverse(const Operator& op) {
  const SingularSpectrum s = singular_values(op);
  if (s.smallest() <= kInvertibilityCutoff * s.largest())
    throw NearSingular(s.smallest());
  if (op.is(Tag::Diagonal)) {
    Matrix inv = Matrix::Zero(op.dim(), op.dim());
    for (Eigen::Index i = 0; i < op.dim(); ++i)
      inv(i, i) = 1.0 / op.entries()(i, i);
    return Operator::with_detected_tags(std::move(inv));
  }
  Eigen::FullPivLU<Matrix> lu(op.entries());
  return Operator::with_detected_tags(lu.inverse());
}

/// Real spectrum (nondecreasing) and orthonormal eigenvectors of a
/// self-adjoint matrix. Checked against ||O - O*||_max <= 1e-12 scaled.
struct HermitianEigs {
  RealVector eigenvalues;  // ascending
  Matrix eigenvectors;     // orthonormal columns
};

inline HermitianEigs hermitian_eigs(const Matrix& m,
                                    bool want_vectors = true) {
  const double scale = std::max(1.0, detail::max_abs(m));
  if (detail::max_abs(m - m.adjoint()) > 1e-12 * scale)
    throw NotSelfAdjoint("hermitian_eigs: matrix is not self-adjoint");
  Eigen::SelfAdjointEigenSolver<Matrix> es(
      m, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  HermitianEigs out;
  out.eigenvalues = es.eigenvalues();
  if (want_vectors) out.eigenvectors = es.eigenvectors();
  return out;
}

inline HermitianEigs hermitian_eigs(const Operator& op) {
  if (!op.is(Tag::SelfAdjoint) &&
      detail::max_abs(op.entries() - op.entries().adjoint()) > 1e-12)
    throw NotSelfAdjoint("hermitian_eigs: operator is not self-adjoint");
  return hermitian_eigs(op.entries());
}

/// Spectral norm through the Gram matrix: sigma_max = sqrt(lambda_max(M*M)).
/// The largest eigenvalue of the Gram matrix carries a relative error of
/// order machine epsilon, so this is as accurate as a dense SVD for the
/// top singular value and considerably cheaper.
inline double spectral_norm(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  const bool tall = m.rows() >= m.cols();
  const Matrix gram = tall ? Matrix(m.adjoint() * m) : Matrix(m * m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues()[gram.rows() - 1]));
}

inline double spectral_norm(const Operator& op) {
  if (op.is(Tag::Diagonal)) return singular_values(op).largest();
  return spectral_norm(op.entries());
}

}  // namespace gmrescert
