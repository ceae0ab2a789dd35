#include <catch2/catch_amalgamated.hpp>

#include "gmrescert/fov.hpp"
#include "gmrescert/probgen.hpp"
#include "gmrescert/rng.hpp"

#include "support/oracles.hpp"

using namespace gmrescert;
using Catch::Approx;

namespace {

Operator diag_op(std::initializer_list<Complex> values) {
  const Eigen::Index n = static_cast<Eigen::Index>(values.size());
  Matrix m = Matrix::Zero(n, n);
  Eigen::Index i = 0;
  for (Complex v : values) m(i, i) = v, ++i;
  return Operator(std::move(m), {Tag::Diagonal});
}

/// Inner estimate: distance from 0 to the hull of the boundary samples.
double nu_inner(const FovModel& model) {
  return oracle::hull_distance_oracle(model.boundary);
}

}  // namespace

TEST_CASE("real segment: diag(1,2)") {
  const FovModel model = build_fov(diag_op({1.0, 2.0}), 256);
  REQUIRE(model.nu == Approx(1.0).margin(1e-8));
  REQUIRE_FALSE(model.zero_in_closure);
  REQUIRE(model.margin == Approx(-1.0).margin(1e-8));

  const ZeroMembership zm = zero_membership(diag_op({1.0, 2.0}), 256);
  REQUIRE(zm.verdict == ZeroLocation::StrictlyOutside);
  REQUIRE(zm.margin == Approx(-1.0).margin(1e-8));
}

TEST_CASE("nilpotent shift: the half-radius disk") {
  Matrix n = Matrix::Zero(2, 2);
  n(0, 1) = 1.0;
  const Operator op(n);
  const FovModel model = build_fov(op, 256);
  for (double h : model.support) REQUIRE(h == Approx(0.5).margin(1e-12));
  REQUIRE(model.nu == 0.0);
  REQUIRE(model.zero_in_closure);
  REQUIRE(zero_membership(op, 256).verdict ==
          ZeroLocation::OnClosureBoundaryOrInside);

  // Rayleigh values of random unit vectors stay in the disk and get close
  // to its boundary.
  Rng rng(3);
  double max_abs_value = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const Vector z = rng.unit_vector(2);
    const Complex w = inner(Vector(n * z), z);
    max_abs_value = std::max(max_abs_value, std::abs(w));
    REQUIRE(std::abs(w) <= 0.5 + 1e-12);
  }
  REQUIRE(max_abs_value >= 0.45);
}

TEST_CASE("unitary arctangent truncation: nu = 1/sqrt(1+n^2)") {
  const Operator b = unitary_arctangent(2);
  const FovModel model = build_fov(b, 720);
  REQUIRE(model.nu == Approx(1.0 / std::sqrt(5.0)).margin(1e-8));

  std::vector<Complex> eigs;
  for (Eigen::Index i = 0; i < b.dim(); ++i) eigs.push_back(b.entries()(i, i));
  REQUIRE(model.nu ==
          Approx(oracle::hull_distance_oracle(eigs)).margin(1e-8));
}

TEST_CASE("indefinite self-adjoint contains zero") {
  REQUIRE(zero_membership(diag_op({1.0, -1.0}), 256).verdict ==
          ZeroLocation::OnClosureBoundaryOrInside);
}

TEST_CASE("boundary points touch their supporting lines") {
  Rng rng(17);
  for (int trial = 0; trial < 3; ++trial) {
    const Eigen::Index n = 6 + 2 * trial;
    const Operator b(Matrix(rng.cnormal_matrix(n, n)));
    const FovModel model = build_fov(b, 64);
    for (std::size_t i = 0; i < model.angles.size(); ++i) {
      const double proj =
          std::cos(model.angles[i]) * model.boundary[i].real() -
          std::sin(model.angles[i]) * model.boundary[i].imag();
      REQUIRE(proj == Approx(model.support[i]).margin(1e-8));
      REQUIRE(in_outer_polygon(model, model.boundary[i], 1e-10));
    }
  }
}

TEST_CASE("outer polygon contains the spectrum") {
  Rng rng(23);
  const Eigen::Index n = 10;
  const Operator b(Matrix(rng.cnormal_matrix(n, n)));
  const FovModel model = build_fov(b, 128);
  Eigen::ComplexEigenSolver<Matrix> es(b.entries(), false);
  for (Eigen::Index i = 0; i < n; ++i)
    REQUIRE(in_outer_polygon(model, es.eigenvalues()[i], 1e-8));
}

TEST_CASE("nu sandwich tightens as the sweep refines") {
  Rng rng(29);
  const Eigen::Index n = 8;
  // Random normal operator with spectrum pushed off the origin.
  const Matrix u = random_unitary(n, rng);
  Vector d(n);
  for (Eigen::Index i = 0; i < n; ++i)
    d[i] = Complex(1.0 + rng.uniform(), 2.0 * rng.uniform() - 1.0);
  const Operator b(u * d.asDiagonal() * u.adjoint());

  double previous_gap = std::numeric_limits<double>::infinity();
  for (int m : {32, 128, 512, 2048}) {
    const FovModel model = build_fov(b, m);
    const double gap = std::abs(nu_inner(model) - model.nu);
    REQUIRE(gap <= previous_gap + 1e-9);
    previous_gap = gap;
    if (m == 2048) REQUIRE(gap <= 1e-6);
  }
}

TEST_CASE("normal operators: nu equals the eigenvalue hull distance") {
  Rng rng(31);
  const Eigen::Index n = 7;
  const Matrix u = random_unitary(n, rng);
  Vector d(n);
  std::vector<Complex> eigs;
  for (Eigen::Index i = 0; i < n; ++i) {
    d[i] = Complex(0.5 + rng.uniform(), rng.uniform());
    eigs.push_back(d[i]);
  }
  const Operator b(u * d.asDiagonal() * u.adjoint());
  const FovModel model = build_fov(b, 720);
  REQUIRE(model.nu ==
          Approx(oracle::hull_distance_oracle(eigs)).margin(1e-8));
}

TEST_CASE("Lax-Milgram: inverse norm bounded by 1/nu") {
  Rng rng(37);
  const Eigen::Index n = 12;
  const Operator b(Matrix::Identity(n, n) +
                   Matrix(0.25 * rng.cnormal_matrix(n, n)));
  const ZeroMembership zm = zero_membership(b, 256);
  REQUIRE(zm.verdict == ZeroLocation::StrictlyOutside);
  const FovModel model = build_fov(b, 256);
  const double inv_norm = 1.0 / singular_values(b).smallest();
  REQUIRE(inv_norm <= 1.0 / model.nu + 1e-8);
}

TEST_CASE("nu_pair") {
  const auto [nu_b, nu_binv] = nu_pair(diag_op({1.0, 2.0}), 256);
  REQUIRE(nu_b == Approx(1.0).margin(1e-8));
  REQUIRE(nu_binv == Approx(0.5).margin(1e-8));

  const Operator id(Matrix::Identity(3, 3));
  const auto [one_a, one_b] = nu_pair(id, 64);
  REQUIRE(one_a == Approx(1.0).margin(1e-10));
  REQUIRE(one_b == Approx(1.0).margin(1e-10));

  const auto [uat_a, uat_b] = nu_pair(unitary_arctangent(2), 720);
  REQUIRE(uat_a == Approx(1.0 / std::sqrt(5.0)).margin(1e-8));
  REQUIRE(uat_b == Approx(uat_a).margin(1e-8));
}

TEST_CASE("distance to the range") {
  const Operator b = diag_op({1.0, 2.0});
  const FovModel model = build_fov(b, 256);
  REQUIRE(distance_outside(b, model, Complex(1.5, 0)) == 0.0);
  REQUIRE(distance_outside(b, model, Complex(3.0, 0)) ==
          Approx(1.0).margin(1e-7));
  REQUIRE(distance_outside(b, model, Complex(1.5, 2.0)) ==
          Approx(2.0).margin(1e-7));
}

TEST_CASE("angle count validation") {
  REQUIRE_THROWS_AS(build_fov(diag_op({1.0}), 8), std::invalid_argument);
}
