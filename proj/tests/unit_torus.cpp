#include <doctest.h>

#include <cmath>
#include <random>

#include "homogbench/field.hpp"

using namespace homog;

namespace {

PeriodicField band_limited_random(int dim, int n, int comps, unsigned seed) {
  // random trig polynomial with frequencies well below Nyquist
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  PeriodicField f(dim, n, comps);
  const int kmax = std::min(5, n / 4);
  auto& d = f.mutable_data();
  for (int c = 0; c < comps; ++c) {
    for (int k1 = -kmax; k1 <= kmax; ++k1)
      for (int k2 = (dim == 1 ? 0 : -kmax); k2 <= (dim == 1 ? 0 : kmax); ++k2) {
        double a = amp(rng), b = amp(rng);
        for (std::size_t g = 0; g < f.nodes(); ++g) {
          double y[2];
          f.node_coord(g, y);
          double ph = kTwoPi * (k1 * y[0] + (dim == 2 ? k2 * y[1] : 0.0));
          d[std::size_t(c) * f.nodes() + g] +=
              a * std::cos(ph) + b * std::sin(ph);
        }
      }
  }
  return f;
}

}  // namespace

TEST_CASE("nodal-spectral round trip") {
  for (int dim : {1, 2}) {
    PeriodicField f = band_limited_random(dim, 32, 2, 7u);
    PeriodicField g = PeriodicField::from_spectral(dim, 32, 2, f.spectral());
    double err = 0.0;
    for (std::size_t i = 0; i < f.data().size(); ++i)
      err = std::max(err, std::abs(f.data()[i] - g.data()[i]));
    CHECK(err < 1e-12 * torus::norm(f, NormKind::Linf));
  }
}

TEST_CASE("gradient of a single mode") {
  PeriodicField f(1, 64, 1);
  f.sample([](const double* y, int) { return std::sin(kTwoPi * y[0]); });
  PeriodicField g = torus::grad(f);
  double err = 0.0;
  for (std::size_t i = 0; i < g.nodes(); ++i) {
    double y = double(i) / 64;
    err = std::max(err, std::abs(g(i) - kTwoPi * std::cos(kTwoPi * y)));
  }
  CHECK(err < 1e-10);
}

TEST_CASE("bilaplacian of a single mode") {
  PeriodicField f(2, 32, 1);
  f.sample([](const double* y, int) { return std::sin(kTwoPi * y[0]); });
  PeriodicField b = torus::bilaplacian(f);
  double c = kTwoPi * kTwoPi * kTwoPi * kTwoPi;
  double err = 0.0;
  for (std::size_t i = 0; i < b.nodes(); ++i)
    err = std::max(err, std::abs(b(i) - c * f(i)));
  CHECK(err < 1e-8);
}

TEST_CASE("div(grad f) equals laplacian(f)") {
  for (int dim : {1, 2}) {
    PeriodicField f = band_limited_random(dim, 32, 1, 11u);
    PeriodicField a = torus::div(torus::grad(f));
    PeriodicField b = torus::laplacian(f);
    double err = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i)
      err = std::max(err, std::abs(a.data()[i] - b.data()[i]));
    CHECK(err < 1e-9 * (1.0 + torus::norm(b, NormKind::Linf)));
  }
}

TEST_CASE("operators commute: grad(laplacian) = laplacian(grad)") {
  PeriodicField f = band_limited_random(2, 32, 1, 13u);
  PeriodicField a = torus::grad(torus::laplacian(f));
  PeriodicField b = torus::laplacian(torus::grad(f));
  double err = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    err = std::max(err, std::abs(a.data()[i] - b.data()[i]));
  CHECK(err < 1e-8 * (1.0 + torus::norm(b, NormKind::Linf)));
}

TEST_CASE("norms of reference fields") {
  PeriodicField f(1, 128, 1);
  f.sample([](const double* y, int) { return std::sin(kTwoPi * y[0]); });
  CHECK(torus::norm(f, NormKind::L2) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  PeriodicField c3(2, 16, 1);
  c3.sample([](const double*, int) { return 3.0; });
  CHECK(torus::norm(c3, NormKind::H1) == doctest::Approx(3.0).epsilon(1e-13));
  // Parseval against the nodal sum
  PeriodicField r = band_limited_random(1, 64, 1, 17u);
  double nodal = 0.0;
  for (double v : r.data()) nodal += v * v;
  nodal = std::sqrt(nodal / double(r.nodes()));
  CHECK(torus::norm(r, NormKind::L2) == doctest::Approx(nodal).epsilon(1e-12));
}

TEST_CASE("mean-zero projection") {
  PeriodicField f = band_limited_random(2, 16, 1, 19u);
  auto& d = f.mutable_data();
  for (double& v : d) v += 4.2;
  PeriodicField g = torus::project_mean_zero(f);
  CHECK(std::abs(g.mean()) < 1e-14);
}

TEST_CASE("mollifier normalization constants") {
  // oracle: adaptive quadrature of the bump profile
  double c1 = torus::mollifier_normalization(1);
  double c2 = torus::mollifier_normalization(2);
  // both must normalize phi to unit mass: re-integrate numerically
  int n = 20000;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    double x = -0.5 + double(i) / n;
    double w = (i == 0 || i == n) ? 0.5 : 1.0;
    s += w * torus::bump_profile(x * x);
  }
  s /= n;
  CHECK(c1 * s == doctest::Approx(1.0).epsilon(1e-8));
  double s2 = 0.0;
  for (int i = 0; i <= n; ++i) {
    double r = 0.5 * double(i) / n;
    double w = (i == 0 || i == n) ? 0.5 : 1.0;
    s2 += w * torus::bump_profile(r * r) * r;
  }
  s2 *= 0.5 / n * kTwoPi;
  CHECK(c2 * s2 == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("smooth reproduces constants and contracts L2") {
  PeriodicField c(1, 256, 1);
  c.sample([](const double*, int) { return 2.5; });
  PeriodicField sc = torus::smooth(c, 0.1);
  double err = 0.0;
  for (std::size_t i = 0; i < sc.nodes(); ++i)
    err = std::max(err, std::abs(sc(i) - 2.5));
  CHECK(err < 1e-12);

  PeriodicField f = band_limited_random(1, 256, 1, 23u);
  PeriodicField sf = torus::smooth(f, 0.05);
  CHECK(torus::norm(sf, NormKind::L2) <= torus::norm(f, NormKind::L2) * (1 + 1e-12));
}

TEST_CASE("smooth first-order bound on sin") {
  PeriodicField f(1, 512, 1);
  f.sample([](const double* y, int) { return std::sin(kTwoPi * y[0]); });
  for (double eps : {0.05, 0.1, 0.2}) {
    PeriodicField sf = torus::smooth(f, eps);
    PeriodicField diff = torus::axpy(-1.0, f, sf);
    double lhs = torus::norm(diff, NormKind::L2);
    double rhs = eps * torus::seminorm(f, 1);
    CHECK(lhs <= rhs);
  }
}

TEST_CASE("smooth preserves positivity") {
  PeriodicField f(1, 256, 1);
  f.sample([](const double* y, int) {
    return std::max(0.0, std::sin(kTwoPi * y[0]));
  });
  PeriodicField sf = torus::smooth(f, 0.07);
  double mn = 0.0;
  for (double v : sf.data()) mn = std::min(mn, v);
  CHECK(mn >= -1e-12);
}

TEST_CASE("trigonometric evaluation matches nodes and off-grid values") {
  PeriodicField f(1, 64, 1);
  f.sample([](const double* y, int) {
    return 0.3 + std::sin(kTwoPi * y[0]) + 0.5 * std::cos(2 * kTwoPi * y[0]);
  });
  double y = 0.3171;
  double exact = 0.3 + std::sin(kTwoPi * y) + 0.5 * std::cos(2 * kTwoPi * y);
  CHECK(torus::eval_trig(f, &y) == doctest::Approx(exact).epsilon(1e-10));
}

TEST_CASE("resample is trigonometric interpolation") {
  PeriodicField f = band_limited_random(2, 16, 1, 29u);
  PeriodicField g = torus::resample(f, 64);
  // check a few nodes of the fine grid against direct evaluation
  for (std::size_t probe : {std::size_t(5), std::size_t(777), std::size_t(3000)}) {
    double y[2] = {double(probe / 64) / 64.0, double(probe % 64) / 64.0};
    CHECK(g(probe) == doctest::Approx(torus::eval_trig(f, y)).epsilon(1e-9));
  }
}
