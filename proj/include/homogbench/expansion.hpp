#pragma once

#include <cmath>
#include <vector>

#include "homogbench/bvp.hpp"
#include "homogbench/cell.hpp"
#include "homogbench/common.hpp"
#include "homogbench/field.hpp"

namespace homog {

/// Boundary cutoff eta_t: 0 on the layer of depth 3t, 1 outside depth 4t,
/// quintic smoothstep in between.
struct CutoffField {
  DomainGrid grid;
  double t = 0.0;
  std::vector<double> values;  // full grid

  double at(int i, int j = 0) const {
    return grid.dim == 1 ? values[i]
                         : values[std::size_t(i) * (grid.N + 2) + j];
  }
};

namespace expansion {

inline double smoothstep_quintic(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
}

inline CutoffField cutoff(const DomainGrid& grid, double t) {
  const double inradius = 0.5;
  if (!(t > 0.0) || 4.0 * t > inradius + 1e-12)
    throw TooThick("cutoff: need 4t <= inradius");
  CutoffField c;
  c.grid = grid;
  c.t = t;
  c.values.assign(grid.full_nodes(), 0.0);
  const int N = grid.N;
  const double h = grid.h();
  for (int i = 0; i <= N + 1; ++i)
    for (int j = 0; j <= (grid.dim == 1 ? 0 : N + 1); ++j) {
      double dist = bvp::detail::boundary_dist(grid, i * h, j * h);
      double v = smoothstep_quintic(dist / t - 3.0);
      if (grid.dim == 1)
        c.values[i] = v;
      else
        c.values[std::size_t(i) * (N + 2) + j] = v;
    }
  return c;
}

namespace detail {

/// Values of every component of a cell field at the grid points x_i/eps
/// (mod 1): returns per-axis index tables plus the field resampled to a
/// common dyadic grid when the positions are dyadic, falling back to direct
/// trigonometric evaluation otherwise.
struct CellSampler {
  const PeriodicField* field = nullptr;
  PeriodicField fine;
  int m = 0;  // positions per axis period; 0 => fallback
  double h_over_eps = 0.0;

  double value(int i, int j, int comp) const {
    if (m > 0) {
      int fi = int(std::size_t(i) * (m / period)) % m;
      int fj = field->dim() == 2 ? int(std::size_t(j) * (m / period)) % m : 0;
      std::size_t node = field->dim() == 1
                             ? std::size_t(fi)
                             : std::size_t(fi) * m + fj;
      return fine(node, comp);
    }
    double y[2] = {std::fmod(i * h_over_eps, 1.0),
                   std::fmod(j * h_over_eps, 1.0)};
    return torus::eval_trig(*field, y, comp);
  }
  int period = 1;  // distinct positions per axis
};

inline CellSampler make_sampler(const PeriodicField& f, double eps,
                                const DomainGrid& grid) {
  CellSampler s;
  s.field = &f;
  s.h_over_eps = grid.h() / eps;
  double Md = eps / grid.h();
  int M = int(std::lround(Md));
  if (std::abs(Md - M) < 1e-9 && is_power_of_two(M)) {
    s.period = M;
    s.m = std::max(M, f.n());
    s.fine = torus::resample(f, s.m);
    s.period = M;
  }
  return s;
}

/// Discrete mollifier weights: the radial bump of radius eps/2 sampled on
/// the solution grid, normalized to unit sum.
struct Mollifier {
  int r = 0;
  std::vector<double> w;  // (2r+1)^dim weights
};

inline Mollifier make_mollifier(int dim, double eps, double h) {
  Mollifier mo;
  mo.r = int(std::floor(eps / (2.0 * h)));
  if (mo.r < 1) throw GridTooCoarse("smooth: mollifier unresolved");
  const int W = 2 * mo.r + 1;
  mo.w.assign(dim == 1 ? W : W * W, 0.0);
  double sum = 0.0;
  for (int a = -mo.r; a <= mo.r; ++a)
    for (int b = (dim == 1 ? 0 : -mo.r); b <= (dim == 1 ? 0 : mo.r); ++b) {
      double z2 = (a * h / eps) * (a * h / eps) +
                  (dim == 2 ? (b * h / eps) * (b * h / eps) : 0.0);
      double v = torus::bump_profile(z2);
      mo.w[dim == 1 ? std::size_t(a + mo.r)
                    : std::size_t(a + mo.r) * W + (b + mo.r)] = v;
      sum += v;
    }
  for (double& v : mo.w) v /= sum;
  return mo;
}

/// Zero-extended convolution of a full-grid nodal array with the mollifier.
inline std::vector<double> convolve(const DomainGrid& g,
                                    const std::vector<double>& f,
                                    const Mollifier& mo) {
  const int N = g.N, W = 2 * mo.r + 1;
  std::vector<double> out(f.size(), 0.0);
  if (g.dim == 1) {
    for (int i = 0; i <= N + 1; ++i) {
      double s = 0.0;
      for (int a = -mo.r; a <= mo.r; ++a) {
        int ii = i + a;
        if (ii < 0 || ii > N + 1) continue;
        s += mo.w[a + mo.r] * f[ii];
      }
      out[i] = s;
    }
  } else {
    for (int i = 0; i <= N + 1; ++i)
      for (int j = 0; j <= N + 1; ++j) {
        double s = 0.0;
        for (int a = -mo.r; a <= mo.r; ++a) {
          int ii = i + a;
          if (ii < 0 || ii > N + 1) continue;
          for (int b = -mo.r; b <= mo.r; ++b) {
            int jj = j + b;
            if (jj < 0 || jj > N + 1) continue;
            s += mo.w[std::size_t(a + mo.r) * W + (b + mo.r)] *
                 f[std::size_t(ii) * (N + 2) + jj];
          }
        }
        out[std::size_t(i) * (N + 2) + j] = s;
      }
  }
  return out;
}

inline std::vector<double> grad_component(const DomainSolution& u, int axis) {
  const int N = u.grid.N;
  std::vector<double> g(u.values.size(), 0.0);
  for (int i = 0; i <= N + 1; ++i)
    for (int j = 0; j <= (u.grid.dim == 1 ? 0 : N + 1); ++j) {
      double v = u.grad(axis, i, j);
      if (u.grid.dim == 1)
        g[i] = v;
      else
        g[std::size_t(i) * (N + 2) + j] = v;
    }
  return g;
}

}  // namespace detail

/// The corrected two-scale difference
///   w = u_eps - u0 + (u0 - G)(1 - eta_t) - eps chi(x/eps) eta_t S_eps(grad u0)
/// with t = (1+lambda) eps; G = 0 here (clamped experiments use homogeneous
/// data). Scalar mode.
inline DomainSolution two_scale_w(const DomainSolution& u_eps,
                                  const DomainSolution& u0,
                                  const CorrectorBundle& bundle, double eps,
                                  double lambda) {
  if (u_eps.grid.N != u0.grid.N || u_eps.grid.dim != u0.grid.dim)
    throw ShapeMismatch("two_scale_w: grid mismatch");
  if (bundle.m != 1) throw ShapeMismatch("two_scale_w: scalar mode only");
  const DomainGrid& g = u_eps.grid;
  const int N = g.N, d = g.dim;
  const double t = (1.0 + lambda) * eps;
  CutoffField eta = cutoff(g, t);
  detail::Mollifier mo = detail::make_mollifier(d, eps, g.h());

  std::vector<std::vector<double>> Sgrad(d);
  for (int ax = 0; ax < d; ++ax)
    Sgrad[ax] = detail::convolve(g, detail::grad_component(u0, ax), mo);

  std::vector<detail::CellSampler> chi(d);
  for (int j = 0; j < d; ++j)
    chi[j] = detail::make_sampler(bundle.column(j, 0), eps, g);

  DomainSolution w;
  w.grid = g;
  w.values.assign(g.full_nodes(), 0.0);
  w.descriptor = "two_scale_w eps=" + std::to_string(eps) +
                 " lambda=" + std::to_string(lambda);
  for (int i = 0; i <= N + 1; ++i)
    for (int j = 0; j <= (d == 1 ? 0 : N + 1); ++j) {
      std::size_t idx = d == 1 ? std::size_t(i)
                               : std::size_t(i) * (N + 2) + j;
      double e = eta.values[idx];
      double corr = 0.0;
      for (int ax = 0; ax < d; ++ax)
        corr += chi[ax].value(i, j, 0) * Sgrad[ax][idx];
      w.values[idx] = u_eps.values[idx] - u0.values[idx] +
                      u0.values[idx] * (1.0 - e) - eps * e * corr;
    }
  return w;
}

/// Region-averaged first-order approximation error
///   ( avg_{B_r} | grad u - (I + grad chi(x/eps)) grad v |^2 )^{1/2}
/// plus the scale bracket (avg_{B_2r}|grad u|^2)^{1/2} + r (avg_{B_2r}|F|^p)^{1/p}.
struct FirstOrderError {
  double lhs = 0.0;
  double bracket = 0.0;
};

inline FirstOrderError first_order_error(const DomainSolution& u_eps,
                                         const DomainSolution& v_int,
                                         const CorrectorBundle& bundle,
                                         double eps, double cx, double cy,
                                         double r, const SpatialFn& F,
                                         double p = 4.0) {
  const DomainGrid& g = u_eps.grid;
  if (v_int.grid.N != g.N) throw ShapeMismatch("first_order_error: grids");
  const int N = g.N, d = g.dim;
  const double h = g.h();
  if (cx - 2 * r < 0 || cx + 2 * r > 1 ||
      (d == 2 && (cy - 2 * r < 0 || cy + 2 * r > 1)))
    throw RegionNotNested("first_order_error: B_2r leaves the domain");

  // grad chi samplers: component (0, ax) of grad of column j
  std::vector<detail::CellSampler> gchi(d);
  std::vector<PeriodicField> gfields;
  gfields.reserve(d);
  for (int j = 0; j < d; ++j) {
    gfields.push_back(torus::grad(bundle.column(j, 0)));
    gchi[j] = detail::make_sampler(gfields.back(), eps, g);
  }

  double acc = 0.0, acc2 = 0.0, accF = 0.0;
  std::size_t cnt = 0, cnt2 = 0;
  bvp::Region Br = bvp::Region::ball(cx, cy, r);
  bvp::Region B2r = bvp::Region::ball(cx, cy, 2 * r);
  for (int i = 1; i <= N; ++i)
    for (int j = 1; j <= (d == 1 ? 1 : N); ++j) {
      double x0 = i * h, x1 = d == 2 ? j * h : 0.0;
      bool in2 = bvp::detail::cell_in_region(g, B2r, x0, x1);
      if (!in2) continue;
      double gu[2] = {u_eps.grad(0, i, j), d == 2 ? u_eps.grad(1, i, j) : 0.0};
      ++cnt2;
      acc2 += gu[0] * gu[0] + gu[1] * gu[1];
      double x[2] = {x0, x1};
      accF += std::pow(std::abs(F(x)), p);
      if (!bvp::detail::cell_in_region(g, Br, x0, x1)) continue;
      double gv[2] = {v_int.grad(0, i, j), d == 2 ? v_int.grad(1, i, j) : 0.0};
      double res2 = 0.0;
      for (int a = 0; a < d; ++a) {
        double val = gu[a] - gv[a];
        for (int c = 0; c < d; ++c)
          val -= gchi[c].value(i, j, a) * gv[c];  // d_a chi_c * d_c v
        res2 += val * val;
      }
      acc += res2;
      ++cnt;
    }
  if (cnt == 0 || cnt2 == 0) throw EmptyRegion("first_order_error: empty ball");
  FirstOrderError out;
  out.lhs = std::sqrt(acc / double(cnt));
  out.bracket = std::sqrt(acc2 / double(cnt2)) +
                r * std::pow(accF / double(cnt2), 1.0 / p);
  return out;
}

}  // namespace expansion
}  // namespace homog
