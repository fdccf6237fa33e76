#include <doctest.h>

#include <cmath>

#include "homogbench/bvp.hpp"

using namespace homog;

TEST_CASE("manufactured clamped solution, constant coefficient, d=1") {
  // u(x) = x^2 (1-x)^2 satisfies u = u' = 0 at both ends;
  // kappa^2 u'''' - u'' = kappa^2 * 24 - (12 x^2 - 12 x + 2)
  auto A = coefficients::constant(1.0, 1, 1, 16);
  const double kappa = 1.0;
  SpatialFn F = [kappa](const double* x) {
    return kappa * kappa * 24.0 - (12.0 * x[0] * x[0] - 12.0 * x[0] + 2.0);
  };
  double prev = 0.0;
  for (int N : {255, 511}) {
    DomainGrid g{1, N};
    DomainSolution u = bvp::solve_perturbed(A, 1.0, kappa, F, g, 1e-12);
    double err = 0.0;
    for (int i = 0; i <= N + 1; ++i) {
      double x = i * g.h();
      err = std::max(err, std::abs(u.values[i] - x * x * (1 - x) * (1 - x)));
    }
    if (prev > 0.0) {
      double order = std::log2(prev / err);
      CHECK(order == doctest::Approx(2.0).epsilon(0.1));
    }
    prev = err;
  }
}

TEST_CASE("zero data gives zero solution") {
  auto A = coefficients::builtin("A1", 256);
  DomainGrid g{1, 127};
  SpatialFn F = [](const double*) { return 0.0; };
  DomainSolution u = bvp::solve_perturbed(A, 0.125, 0.125, F, g, 1e-12);
  for (double v : u.values) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("resolution policy is enforced") {
  auto A = coefficients::builtin("A1", 256);
  DomainGrid g{1, 15};
  SpatialFn F = [](const double*) { return 1.0; };
  CHECK_THROWS_AS(bvp::solve_perturbed(A, 0.01, 0.01, F, g), GridTooCoarse);
}

TEST_CASE("FD solve matches the closed form") {
  const double lambda = 0.1;
  auto A = coefficients::constant(1.0, 1, 1, 16);
  SpatialFn F = [](const double*) { return 1.0; };
  DomainGrid g{1, 4096};
  // the closed-form problem has no oscillation; eps only gates the grid policy
  DomainSolution u = bvp::solve_perturbed(A, 1.0, lambda, F, g, 1e-12);
  bvp::ClampedClosedForm ex = bvp::solve_clamped_closed_form(lambda);
  double err = 0.0;
  for (int i = 0; i <= g.N + 1; ++i)
    err = std::max(err, std::abs(u.values[i] - ex.u(i * g.h())));
  CHECK(err <= 1e-6);
}

TEST_CASE("closed form satisfies the clamped boundary conditions") {
  for (double l : {0.5, 0.1, 0.01}) {
    bvp::ClampedClosedForm s = bvp::solve_clamped_closed_form(l);
    CHECK(std::abs(s.u(0.0)) < 1e-12);
    CHECK(std::abs(s.u(1.0)) < 1e-12);
    double h = 1e-7;
    CHECK(std::abs((s.u(h) - s.u(0.0)) / h) < 1e-5);
    CHECK(std::abs((s.u(1.0) - s.u(1.0 - h)) / h) < 1e-5);
  }
}

TEST_CASE("homogenized 1D solve against the textbook solution") {
  EffectiveTensor T;
  T.dim = 1;
  T.m = 1;
  T.entries = {1.0};
  T.provenance = "test";
  SpatialFn F = [](const double*) { return 1.0; };
  DomainGrid g{1, 255};
  DomainSolution u = bvp::solve_homogenized(T, F, g, 1e-12);
  double err = 0.0;
  for (int i = 0; i <= g.N + 1; ++i) {
    double x = i * g.h();
    err = std::max(err, std::abs(u.values[i] - x * (1 - x) / 2));
  }
  CHECK(err < 1e-10);  // exact for the 3-point stencil with F constant

  // linearity in the coefficient
  T.entries = {std::sqrt(3.0)};
  DomainSolution us = bvp::solve_homogenized(T, F, g, 1e-12);
  CHECK(us.values[128] == doctest::Approx(u.values[128] / std::sqrt(3.0)).epsilon(1e-10));
}

TEST_CASE("manufactured 2D homogenized solution, order 2") {
  EffectiveTensor T;
  T.dim = 2;
  T.m = 1;
  T.entries = {1.0, 0.0, 0.0, 1.0};
  T.provenance = "test";
  const double pi = kTwoPi / 2;
  SpatialFn F = [pi](const double* x) {
    return 2 * pi * pi * std::sin(pi * x[0]) * std::sin(pi * x[1]);
  };
  double prev = 0.0;
  for (int N : {31, 63}) {
    DomainGrid g{2, N};
    DomainSolution u = bvp::solve_homogenized(T, F, g, 1e-12);
    double err = 0.0;
    for (int i = 0; i <= N + 1; ++i)
      for (int j = 0; j <= N + 1; ++j)
        err = std::max(err, std::abs(u.at(i, j) - std::sin(pi * i * g.h()) *
                                                      std::sin(pi * j * g.h())));
    if (prev > 0) CHECK(std::log2(prev / err) == doctest::Approx(2.0).epsilon(0.1));
    prev = err;
  }
}

TEST_CASE("perturbed with constant A equals intermediate with the same tensor") {
  auto A = coefficients::constant(1.5, 1, 1, 16);
  EffectiveTensor T;
  T.dim = 1;
  T.m = 1;
  T.entries = {1.5};
  T.provenance = "test";
  SpatialFn F = [](const double* x) { return std::exp(x[0]); };
  DomainGrid g{1, 511};
  double eps = 0.125, lambda = 1.0;
  DomainSolution a = bvp::solve_perturbed(A, eps, lambda * eps, F, g, 1e-12);
  DomainSolution b = bvp::solve_intermediate(T, eps, lambda, F, g, 1e-12);
  double err = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k)
    err = std::max(err, std::abs(a.values[k] - b.values[k]));
  CHECK(err < 1e-10);
}

TEST_CASE("intermediate with traces reproduces the traced solution when F matches") {
  // if v solves the same operator as u with u's own boundary band fixed,
  // then v = u everywhere
  auto A = coefficients::constant(2.0, 2, 1, 16);
  EffectiveTensor T;
  T.dim = 2;
  T.m = 1;
  T.entries = {2.0, 0.0, 0.0, 2.0};
  T.provenance = "test";
  SpatialFn F = [](const double* x) {
    return std::sin(kTwoPi * x[0] / 2) * x[1];
  };
  DomainGrid g{2, 63};
  double eps = 0.25, lambda = 0.5;
  DomainSolution u = bvp::solve_perturbed(A, eps, lambda * eps, F, g, 1e-12);
  DomainSolution v = bvp::solve_intermediate(T, eps, lambda, F, g, 1e-12, &u);
  double err = 0.0;
  for (std::size_t k = 0; k < u.values.size(); ++k)
    err = std::max(err, std::abs(u.values[k] - v.values[k]));
  CHECK(err < 1e-8);
}

TEST_CASE("region norms against exact integrals") {
  DomainGrid g{1, 1023};
  DomainSolution u;
  u.grid = g;
  u.values.resize(g.full_nodes());
  for (int i = 0; i <= g.N + 1; ++i) {
    double x = i * g.h();
    u.values[i] = x * (1 - x) / 2;
  }
  // ||x(1-x)/2||_L2 = sqrt(1/120)
  CHECK(bvp::norms_on_region(u, bvp::Region::whole(), bvp::RegionNorm::L2) ==
        doctest::Approx(std::sqrt(1.0 / 120.0)).epsilon(1e-3));
  // constant field: zero gradient seminorm on a ball
  DomainSolution c = u;
  for (auto& v : c.values) v = 1.0;
  CHECK(bvp::norms_on_region(c, bvp::Region::ball(0.5, 0.5, 0.25),
                             bvp::RegionNorm::H1Seminorm) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("boundary layer norm decays like t^{3/2} for an H2_0 profile") {
  DomainGrid g{1, 4095};
  DomainSolution u;
  u.grid = g;
  u.values.resize(g.full_nodes());
  for (int i = 0; i <= g.N + 1; ++i) {
    double x = i * g.h();
    u.values[i] = x * x * (1 - x) * (1 - x);
  }
  double prev = 0.0;
  for (double t : {0.2, 0.1, 0.05, 0.025}) {
    double nrm =
        bvp::norms_on_region(u, bvp::Region::layer(t), bvp::RegionNorm::L2);
    if (prev > 0.0) {
      double ratio = prev / nrm;  // halving t
      CHECK(ratio > 2.0);  // faster than t^1 (exact local rate is t^{5/2})
    }
    prev = nrm;
  }
}

TEST_CASE("empty region throws") {
  DomainGrid g{1, 63};
  DomainSolution u;
  u.grid = g;
  u.values.assign(g.full_nodes(), 0.0);
  CHECK_THROWS_AS(bvp::norms_on_region(u, bvp::Region::ball(0.5, 0.5, 1e-6),
                                       bvp::RegionNorm::L2),
                  EmptyRegion);
}

TEST_CASE("grid policy picks the smallest admissible resolution") {
  DomainGrid g = bvp::grid_for(1, 0.125, 0.125);
  CHECK(g.N == 31);  // h = 1/32 = (1/8)/4
  CHECK(g.h() <= 0.125 / 4);
  DomainGrid g2 = bvp::grid_for(1, 0.125, 0.125 * 0.125);
  CHECK(g2.h() <= 0.125 * 0.125 / 4);
}
