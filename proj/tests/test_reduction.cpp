#include <catch2/catch_amalgamated.hpp>

#include "gmrescert/reduction.hpp"
#include "gmrescert/probgen.hpp"

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

double affine_norm(const Matrix& b, Complex lambda) {
  Matrix m = -lambda * b;
  m.diagonal().array() += 1.0;
  return oracle::jacobi_norm(m);
}

}  // namespace

TEST_CASE("identity has zero reduction factor") {
  const ReductionReport r = compute_mb(Operator(Matrix::Identity(3, 3)));
  REQUIRE(r.m_b <= 1e-10);
  REQUIRE(std::abs(r.lambda_b - Complex(1, 0)) <= 1e-5);
  REQUIRE(r.m_b_dual <= 1e-10);
}

TEST_CASE("diag(1,2): m_b = 1/3 at lambda = 2/3") {
  const ReductionReport r = compute_mb(diag_op({1.0, 2.0}));
  REQUIRE(r.m_b == Approx(1.0 / 3.0).margin(1e-6));
  REQUIRE(std::abs(r.lambda_b - Complex(2.0 / 3.0, 0)) <= 1e-5);
  REQUIRE(std::abs(r.m_b - r.m_b_dual) <= 1e-6);
  // ||lambda_B B|| attains 1 + M_B here.
  REQUIRE(std::abs(r.lambda_b) * 2.0 == Approx(4.0 / 3.0).margin(1e-4));
  REQUIRE(r.starke_bound == Approx(std::sqrt(0.5)).margin(1e-7));
  REQUIRE(r.elman_bound == Approx(std::sqrt(0.75)).margin(1e-7));
}

TEST_CASE("unitary arctangent n=1 matches the grid oracle") {
  const Operator b = unitary_arctangent(1);
  const ReductionReport r = compute_mb(b);
  const oracle::GridMin grid =
      oracle::min_affine_norm_grid(b.entries(), -2.0, 2.0, 400, 6);
  REQUIRE(r.m_b == Approx(grid.value).margin(1e-5));
}

TEST_CASE("classical bounds") {
  {
    const auto [starke, elman] = classical_bounds(1.0, 1.0, 1.0);
    REQUIRE(starke == 0.0);
    REQUIRE(elman == 0.0);
  }
  {
    const auto [starke, elman] = classical_bounds(1.0, 0.5, 2.0);
    REQUIRE(starke == Approx(0.7071067811865476));
    REQUIRE(elman == Approx(0.8660254037844386));
  }
  {
    const auto [starke, elman] = classical_bounds(0.0, 0.0, 1.0);
    REQUIRE(starke == 1.0);
    REQUIRE(elman == 1.0);
  }
  REQUIRE_THROWS_AS(classical_bounds(-0.1, 0.0, 1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(classical_bounds(2.0, 0.5, 1.0), std::invalid_argument);
}

TEST_CASE("empirical lower bound approaches m_b on diag(1,2)") {
  const double value = empirical_mb(diag_op({1.0, 2.0}), 64, 2, 12345);
  REQUIRE(value >= 0.33);
  REQUIRE(value <= 1.0 / 3.0 + 1e-8);
}

TEST_CASE("empirical_mb trivial and degenerate cases") {
  // The closed one-step formula bottoms out around sqrt(eps).
  REQUIRE(empirical_mb(Operator(Matrix::Identity(4, 4)), 8, 2, 7) <= 1e-7);
  // A vector with (Bz, z) = 0 exists, so ratios approach 1.
  REQUIRE(empirical_mb(diag_op({1.0, -1.0}), 64, 2, 7) >= 0.99);
  REQUIRE_THROWS_AS(empirical_mb(diag_op({1.0}), 0, 1, 7),
                    std::invalid_argument);
}

TEST_CASE("nu_B = 0 forces m_b = 1") {
  const ReductionReport r = compute_mb(diag_op({1.0, -1.0}));
  REQUIRE(r.m_b == Approx(1.0).margin(1e-9));
  REQUIRE(r.nu_b <= 1e-9);
}

TEST_CASE("primal and dual forms agree on random operators") {
  Rng rng(41);
  for (int trial = 0; trial < 4; ++trial) {
    const Eigen::Index n = 5 + trial;
    const Operator b(Matrix::Identity(n, n) +
                     Matrix(0.5 * rng.cnormal_matrix(n, n)));
    const ReductionReport r = compute_mb(b);
    REQUIRE(std::abs(r.m_b - r.m_b_dual) <= 1e-6);
    REQUIRE(r.empirical_lower <= r.m_b + 1e-6);
    REQUIRE(r.m_b <= r.starke_bound + 2e-6);
    REQUIRE(r.starke_bound <= r.elman_bound + 1e-10);
  }
}

TEST_CASE("f(lambda) is convex along segments") {
  Rng rng(43);
  const Eigen::Index n = 6;
  const Matrix b = rng.cnormal_matrix(n, n);
  for (int trial = 0; trial < 40; ++trial) {
    const Complex l1(4.0 * rng.uniform() - 2.0, 4.0 * rng.uniform() - 2.0);
    const Complex l2(4.0 * rng.uniform() - 2.0, 4.0 * rng.uniform() - 2.0);
    const double t = rng.uniform();
    const double lhs = affine_norm(b, t * l1 + (1.0 - t) * l2);
    const double rhs = t * affine_norm(b, l1) + (1.0 - t) * affine_norm(b, l2);
    REQUIRE(lhs <= rhs + 1e-10);
  }
}

TEST_CASE("one-step identity against a refined lambda grid") {
  Rng rng(47);
  const Eigen::Index n = 5;
  const Matrix b =
      Matrix::Identity(n, n) + Matrix(0.7 * rng.cnormal_matrix(n, n));
  for (int trial = 0; trial < 3; ++trial) {
    const Vector z = rng.unit_vector(n);
    const Vector bz = b * z;
    const double closed =
        1.0 - std::norm(inner(bz, z)) / bz.squaredNorm();
    // Grid refined around the known minimizer lambda_z = (z, Bz)/||Bz||^2.
    const Complex center = inner(z, bz) / bz.squaredNorm();
    double best = 1e300;
    const double width = 0.3;
    for (int zoom = 0; zoom < 5; ++zoom) {
      const double w = width * std::pow(0.1, zoom);
      for (int i = -20; i <= 20; ++i)
        for (int j = -20; j <= 20; ++j) {
          const Complex lambda = center + Complex(w * i / 20.0, w * j / 20.0);
          best = std::min(best, (z - lambda * bz).squaredNorm());
        }
    }
    REQUIRE(best == Approx(closed).margin(1e-6));
  }
}

TEST_CASE("sampled one-step reductions stay below m_b") {
  Rng rng(53);
  const Eigen::Index n = 6;
  const Operator b(Matrix::Identity(n, n) +
                   Matrix(0.4 * rng.cnormal_matrix(n, n)));
  const ReductionReport r = compute_mb(b);
  double sup_small = 0.0, sup_large = 0.0;
  for (int i = 0; i < 20; ++i)
    sup_small = std::max(sup_small,
                         detail::one_step_ratio(b.entries(),
                                                rng.unit_vector(n)));
  sup_large = sup_small;
  for (int i = 0; i < 400; ++i)
    sup_large = std::max(sup_large,
                         detail::one_step_ratio(b.entries(),
                                                rng.unit_vector(n)));
  REQUIRE(sup_small <= sup_large);
  REQUIRE(sup_large <= r.m_b + 1e-6);
}

TEST_CASE("minimizer localization verdicts") {
  const Operator b = diag_op({1.0, 2.0});
  const ReductionReport r = compute_mb(b);
  const FovModel fov_b = build_fov(b, 256);
  const FovModel fov_binv = build_fov(inverse(b), 256);
  const MinimizerVerdict v = minimizer_check(b, r, fov_b, fov_binv);
  REQUIRE(v.pass());
  REQUIRE(v.norm_bound_margin == Approx(0.0).margin(1e-4));

  // Random normal operator with spectrum in the right half-plane.
  Rng rng(59);
  const Eigen::Index n = 6;
  const Matrix u = random_unitary(n, rng);
  Vector d(n);
  for (Eigen::Index i = 0; i < n; ++i)
    d[i] = Complex(1.0 + rng.uniform(), rng.uniform() - 0.5);
  const Operator nb(u * d.asDiagonal() * u.adjoint());
  const ReductionReport nr = compute_mb(nb);
  const MinimizerVerdict nv = minimizer_check(
      nb, nr, build_fov(nb, 256), build_fov(inverse(nb), 256));
  REQUIRE(nv.pass());
}

TEST_CASE("near singular input is rejected") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = 1e-15;
  REQUIRE_THROWS_AS(compute_mb(Operator(m)), NearSingular);
}
