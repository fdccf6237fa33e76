#include <doctest.h>

#include <cmath>

#include "homogbench/coefficients.hpp"

using namespace homog;

TEST_CASE("constant isotropic elasticity tensor is symmetric") {
  auto A = CoefficientField::from_analytic(
      2, 2, 8,
      [](const double*, int i, int a, int j, int b) {
        double v = 0.0;
        if (i == a && j == b) v += 1.0;                      // lambda_L = 1
        if (i == j && a == b) v += 1.0;                      // mu = 1
        if (i == b && j == a) v += 1.0;
        return v;
      },
      2.0, 4.0, "lame_const");
  auto rep = A.validate_symmetry();
  CHECK(rep.dev_transpose == 0.0);
  CHECK(rep.dev_block == 0.0);
  CHECK(rep.pass);
}

TEST_CASE("builtin A3 symmetry deviations at machine precision") {
  auto A = coefficients::builtin("A3", 32);
  auto rep = A.validate_symmetry();
  CHECK(rep.dev_transpose <= 1e-15);
  CHECK(rep.dev_block <= 1e-15);
}

TEST_CASE("injected defect is reported and fails") {
  auto A = coefficients::builtin("A3", 8);
  // perturb one entry via a modified analytic copy
  auto f = A.analytic();
  auto B = CoefficientField::from_analytic(
      2, 2, 8,
      [f](const double* y, int i, int a, int j, int b) {
        double v = f(y, i, a, j, b);
        if (i == 0 && a == 1 && j == 0 && b == 0 && y[0] == 0.0 && y[1] == 0.0)
          v += 1e-3;
        return v;
      },
      2.0, 9.0, "A3_defect");
  auto rep = B.validate_symmetry();
  CHECK(rep.pass == false);
  CHECK(rep.dev_transpose == doctest::Approx(1e-3).epsilon(1e-6));
}

TEST_CASE("ellipticity of scalar builtins") {
  auto A1 = coefficients::builtin("A1", 256);
  auto [lo, hi] = A1.estimate_ellipticity();
  CHECK(lo == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(hi == doctest::Approx(3.0).epsilon(1e-3));

  auto I = coefficients::constant(1.0, 1, 1, 16);
  auto [li, hi2] = I.estimate_ellipticity();
  CHECK(li == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(hi2 == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("ellipticity of A3: minimum is 2 min(mu)") {
  auto A = coefficients::builtin("A3", 64);
  auto [lo, hi] = A.estimate_ellipticity();
  // min mu = 1 at cos*cos = -1 nodes; max eigenvalue is the trace branch
  // 2 lambda_L + 2 mu = 6 + sin(t) + 2|cos(t)|, maximized at 6 + sqrt(5)
  CHECK(lo == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(hi == doctest::Approx(6.0 + std::sqrt(5.0)).epsilon(2e-3));
  CHECK(lo >= A.nu1() - 1e-8);
  CHECK(hi <= A.nu2() + 1e-8);
}

TEST_CASE("lipschitz estimate") {
  auto C = coefficients::constant(2.0, 2, 1, 16);
  CHECK(C.lipschitz_estimate() == 0.0);
  auto A1 = coefficients::builtin("A1", 1024);
  CHECK(A1.lipschitz_estimate() ==
        doctest::Approx(kTwoPi).epsilon(0.01));  // max |a'| = 2 pi
}

TEST_CASE("builtin dispatch") {
  auto C = coefficients::builtin("CONST(1)", 64);
  CHECK(C.dim() == 1);
  CHECK(C.value(0, 0, 0, 0, 0) == 1.0);
  auto A1 = coefficients::builtin("A1", 1024);
  CHECK(A1.nu1() == 1.0);
  CHECK(A1.nu2() == 3.0);
  CHECK_THROWS_AS(coefficients::builtin("A9", 64), UnknownName);
}

TEST_CASE("ellipticity invariant under refinement for trig coefficients") {
  auto a8 = coefficients::builtin("A2", 8).estimate_ellipticity();
  auto a64 = coefficients::builtin("A2", 64).estimate_ellipticity();
  CHECK(std::abs(a8.first - a64.first) < 1e-10);
  CHECK(std::abs(a8.second - a64.second) < 1e-10);
}
