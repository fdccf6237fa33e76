#include <doctest.h>

#include <cmath>

#include "homogbench/config.hpp"
#include "homogbench/ratefit.hpp"
#include "homogbench/rates.hpp"

using namespace homog;

TEST_CASE("fit_rate recovers a pure power law") {
  std::vector<std::pair<double, double>> pts;
  for (double x : {0.1, 0.2, 0.4, 0.8}) pts.push_back({x, x * x});
  auto r = rates::fit_rate(pts, "square");
  CHECK(r.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.experiment == "square");
}

TEST_CASE("fit_rate recovers slope and intercept") {
  std::vector<std::pair<double, double>> pts;
  for (double x : {1.0, 2.0, 4.0, 8.0, 16.0}) pts.push_back({x, 3.0 * x});
  auto r = rates::fit_rate(pts);
  CHECK(r.slope == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("fit_rate finds the dominant term of a two-term law") {
  // y = x + x^2; over small x the linear term dominates
  std::vector<std::pair<double, double>> pts;
  for (double x : {1e-4, 2e-4, 4e-4, 8e-4}) pts.push_back({x, x + x * x});
  auto r = rates::fit_rate(pts);
  CHECK(r.slope == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("fit_rate input validation") {
  std::vector<std::pair<double, double>> few = {{1, 1}, {2, 2}, {3, 3}};
  CHECK_THROWS_AS(rates::fit_rate(few), TooFewPoints);
  std::vector<std::pair<double, double>> dup = {{1, 1}, {1, 2}, {3, 3}, {4, 4}};
  CHECK_THROWS_AS(rates::fit_rate(dup), ShapeMismatch);
  std::vector<std::pair<double, double>> zig = {{1, 1}, {3, 2}, {2, 3}, {4, 4}};
  CHECK_THROWS_AS(rates::fit_rate(zig), ShapeMismatch);
  std::vector<std::pair<double, double>> zero = {{1, 0}, {2, 0}, {3, 0}, {4, 0}};
  auto r = rates::fit_rate(zero);
  CHECK(r.identically_zero);
}

TEST_CASE("regime dispatch and bound shapes") {
  CHECK(std::isinf(rates::regime_rho(0.5)));
  CHECK(rates::regime_rho(1.0) == 1.0);
  CHECK(rates::regime_rho(2.0) == 0.0);
  // gamma = 1: bound is kappa + eps = 2 eps
  CHECK(rates::regime_bound(1.0, 0.01) == doctest::Approx(0.02));
  // gamma = 2: (kappa/eps)^2 = eps^2 dominates nothing at small eps
  CHECK(rates::regime_bound(2.0, 0.1) ==
        doctest::Approx(0.01 + 0.1 + 0.01).epsilon(1e-12));
  // gamma = 1/2: (eps/kappa)^2 = eps
  CHECK(rates::regime_bound(0.5, 0.04) ==
        doctest::Approx(0.2 + 0.04 + 0.04).epsilon(1e-12));
}

TEST_CASE("kappa rules") {
  CHECK(rates::kappa_of_rule("eps2", 0.1) == doctest::Approx(0.01));
  CHECK(rates::kappa_of_rule("eps", 0.1) == doctest::Approx(0.1));
  CHECK(rates::kappa_of_rule("sqrt", 0.04) == doctest::Approx(0.2));
  CHECK_THROWS_AS(rates::kappa_of_rule("cube", 0.1), UnknownName);
}

TEST_CASE("config parse, defaults and round trip") {
  auto c = config::parse_config(
      "experiment = regime\n"
      "coeff = A2\n"
      "gamma = 2\n"
      "eps = 0.125, 0.0625\n"
      "# a comment line\n"
      "tol = 1e-8\n");
  CHECK(c.experiment == "regime");
  CHECK(c.coeff == "A2");
  CHECK(c.gamma == 2.0);
  CHECK(c.eps == std::vector<double>{0.125, 0.0625});
  CHECK(c.tol == 1e-8);
  CHECK(c.cell_n == 1024);  // default preserved

  auto c2 = config::parse_config(config::serialize(c));
  CHECK(c2 == c);
}

TEST_CASE("config errors are aggregated, not first-wins") {
  try {
    config::parse_config(
        "experiment = warp\n"
        "gamma = -1\n"
        "bogus_key = 3\n"
        "tol = abc\n");
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(e.issues.size() == 4);
    bool saw_line3 = false;
    for (const auto& i : e.issues)
      if (i.line == 3) saw_line3 = true;
    CHECK(saw_line3);
  }
}

TEST_CASE("config rejects missing experiment and bad cell_n") {
  CHECK_THROWS_AS(config::parse_config("coeff = A1\n"), ConfigError);
  CHECK_THROWS_AS(
      config::parse_config("experiment = cell\ncell_n = 100\n"), ConfigError);
}

TEST_CASE("small regime sweep runs end to end") {
  auto A = coefficients::builtin("A1", 256);
  SpatialFn F = [](const double* x) {
    double z = (x[0] - 0.5) / 0.3;
    return std::abs(z) < 1 ? std::exp(-1.0 / (1 - z * z)) : 0.0;
  };
  auto res = rates::regime_sweep(
      A, 1.0, {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64}, F, 256, 1e-9);
  CHECK(res.branch == "rho=1");
  CHECK(res.fitted_constant > 0.0);
  CHECK(res.pointwise_ok);
  CHECK(res.report.points.size() == 4);
  // errors decrease along the sweep
  for (std::size_t i = 0; i + 1 < res.report.points.size(); ++i)
    CHECK(res.report.points[i + 1].second < res.report.points[i].second);
}

TEST_CASE("excess decay on a smooth homogeneous profile") {
  // for u with constant gradient the excess is identically zero
  auto A = coefficients::constant(1.0, 2, 1, 16);
  auto bundle = cell::solve_corrector(A, 1.0, 1e-9);
  DomainGrid g{2, 127};
  DomainSolution u;
  u.grid = g;
  u.values.resize(g.full_nodes());
  for (int i = 0; i <= g.N + 1; ++i)
    for (int j = 0; j <= g.N + 1; ++j)
      u.values[std::size_t(i) * (g.N + 2) + j] = i * g.h() + 2.0 * j * g.h();
  auto res = rates::excess_decay(u, bundle, 1.0 / 32, 0.5, 0.5,
                                 {0.25, 0.125, 0.0625, 0.03125});
  for (const auto& row : res.rows) CHECK(row.excess <= 1e-10);
}
