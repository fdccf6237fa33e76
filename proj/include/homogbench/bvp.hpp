#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "homogbench/coefficients.hpp"
#include "homogbench/common.hpp"
#include "homogbench/effective.hpp"

namespace homog {

/// Uniform interior grid on (0,1)^d: N interior nodes per axis, h = 1/(N+1).
struct DomainGrid {
  int dim = 1;
  int N = 8;
  double h() const { return 1.0 / (N + 1); }
  std::size_t full_nodes() const {
    return dim == 1 ? std::size_t(N + 2) : std::size_t(N + 2) * (N + 2);
  }
  std::size_t interior_nodes() const {
    return dim == 1 ? std::size_t(N) : std::size_t(N) * N;
  }
};

/// Scalar solution sampled on the full grid (boundary included, indices
/// 0..N+1 per axis, x = i*h). Boundary rows hold the prescribed data.
struct DomainSolution {
  DomainGrid grid;
  std::vector<double> values;
  std::string descriptor;
  double residual = 0.0;
  int iterations = 0;

  double at(int i, int j = 0) const {
    return grid.dim == 1 ? values[i] : values[std::size_t(i) * (grid.N + 2) + j];
  }
  double& at(int i, int j = 0) {
    return grid.dim == 1 ? values[i]
                         : values[std::size_t(i) * (grid.N + 2) + j];
  }
  /// Centered-difference gradient component at a full-grid node (interior
  /// only; callers restrict to regions away from the boundary or rely on
  /// zero boundary data).
  double grad(int axis, int i, int j = 0) const {
    const double h = grid.h();
    if (grid.dim == 1) {
      if (i == 0 || i == grid.N + 1) return 0.0;
      return (values[i + 1] - values[i - 1]) / (2 * h);
    }
    if (i == 0 || i == grid.N + 1 || j == 0 || j == grid.N + 1) return 0.0;
    int di = axis == 0, dj = axis == 1;
    return (at(i + di, j + dj) - at(i - di, j - dj)) / (2 * h);
  }
};

using SpatialFn = std::function<double(const double*)>;

namespace bvp {

namespace detail {

/// Direct sparse factorization plus two rounds of iterative refinement;
/// the biharmonic term makes kappa^2/h^4 conditioning too hostile for the
/// simple iterative schemes to certify tight tolerances.
inline Eigen::VectorXd solve_refined(const Eigen::SparseMatrix<double>& A,
                                     const Eigen::VectorXd& F, double tol,
                                     double* out_residual) {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  ldlt.compute(A);
  if (ldlt.info() != Eigen::Success)
    throw SingularSystem("bvp: factorization failed");
  Eigen::VectorXd u = ldlt.solve(F);
  for (int k = 0; k < 2; ++k) {
    Eigen::VectorXd r = F - A * u;
    u += ldlt.solve(r);
  }
  // normwise backward error: the plain residual over ||F|| is bounded below
  // by eps * ||A|| ||u|| / ||F||, which the biharmonic term's kappa^2/h^4
  // scaling pushes far above any useful tolerance
  double a_inf = 0.0;
  {
    Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(A.rows());
    for (int k = 0; k < A.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
        row_sums[it.row()] += std::abs(it.value());
    a_inf = row_sums.maxCoeff();
  }
  double denom = a_inf * u.lpNorm<Eigen::Infinity>() +
                 F.lpNorm<Eigen::Infinity>();
  double rel =
      (F - A * u).lpNorm<Eigen::Infinity>() / std::max(denom, 1e-300);
  if (out_residual) *out_residual = rel;
  if (!(rel <= std::max(tol, 1e-8)))
    throw NoConvergence("bvp: refined residual " + std::to_string(rel));
  return u;
}

/// Per-axis diagonal coefficient a_{axis,axis}(x/eps) evaluated at an
/// arbitrary physical point; analytic when available, periodic linear
/// interpolation of the nodal samples otherwise.
inline double coeff_at(const CoefficientField& A, double eps, int axis,
                       const double* x) {
  double y[2] = {0.0, 0.0};
  for (int k = 0; k < A.dim(); ++k) {
    y[k] = x[k] / eps;
    y[k] -= std::floor(y[k]);
  }
  if (A.analytic()) return A.analytic()(y, axis, 0, axis, 0);
  const int n = A.n();
  if (A.dim() == 1) {
    double p = y[0] * n;
    int i0 = int(std::floor(p)) % n;
    double w = p - std::floor(p);
    return (1 - w) * A.value(i0, 0, 0, 0, 0) +
           w * A.value((i0 + 1) % n, 0, 0, 0, 0);
  }
  double p0 = y[0] * n, p1 = y[1] * n;
  int i0 = int(std::floor(p0)) % n, j0 = int(std::floor(p1)) % n;
  double w0 = p0 - std::floor(p0), w1 = p1 - std::floor(p1);
  auto v = [&](int i, int j) {
    return A.value(std::size_t((i % n)) * n + (j % n), axis, 0, axis, 0);
  };
  return (1 - w0) * (1 - w1) * v(i0, j0) + w0 * (1 - w1) * v(i0 + 1, j0) +
         (1 - w0) * w1 * v(i0, j0 + 1) + w0 * w1 * v(i0 + 1, j0 + 1);
}

struct Assembly {
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs;
};

/// Clamped biharmonic stencil contribution: ghost nodes one step outside the
/// boundary reflect to their mirror interior node (u = 0, normal derivative
/// = 0 on the boundary); boundary nodes themselves carry value 0.
/// Full-grid axis index: 0 and N+1 are boundary, ghosts are -1 and N+2,
/// reflecting to 1 and N respectively.
inline bool reflect_index(int& i, int N) {
  if (i == -1) i = 1;
  else if (i == N + 2) i = N;
  if (i == 0 || i == N + 1) return false;  // boundary node, value 0
  return true;
}

}  // namespace detail

/// kappa^2 Delta^2 u - div(A(x/eps) grad u) = F on (0,1)^d, clamped
/// (u = 0, grad u = 0 on the boundary). Scalar coefficients with diagonal
/// spatial coupling (covers the scalar builtins); constant tensors go
/// through solve_intermediate.
inline DomainSolution solve_perturbed(const CoefficientField& A, double eps,
                                      double kappa, const SpatialFn& F,
                                      const DomainGrid& grid,
                                      double tol = 1e-10) {
  if (A.m() != 1) throw ShapeMismatch("solve_perturbed: scalar mode only");
  if (A.dim() != grid.dim) throw ShapeMismatch("solve_perturbed: dim mismatch");
  if (grid.N < 8) throw GridTooCoarse("solve_perturbed: N >= 8 required");
  const double h = grid.h();
  if (h > std::min(eps, kappa) / 4.0 + 1e-12)
    throw GridTooCoarse("solve_perturbed: h must be <= min(eps,kappa)/4");

  const int N = grid.N, d = grid.dim;
  const double k2 = kappa * kappa;
  detail::Assembly as;
  as.rhs = Eigen::VectorXd::Zero(grid.interior_nodes());

  if (d == 1) {
    auto unk = [&](int i) { return i - 1; };
    static const int off[5] = {-2, -1, 0, 1, 2};
    static const double bi[5] = {1, -4, 6, -4, 1};
    for (int i = 1; i <= N; ++i) {
      double x = i * h;
      as.rhs[unk(i)] = F(&x);
      for (int s = 0; s < 5; ++s) {
        int ii = i + off[s];
        if (!detail::reflect_index(ii, N)) continue;
        as.trip.emplace_back(unk(i), unk(ii), k2 * bi[s] / (h * h * h * h));
      }
      double xm = x - h / 2, xp = x + h / 2;
      double am = detail::coeff_at(A, eps, 0, &xm);
      double ap = detail::coeff_at(A, eps, 0, &xp);
      as.trip.emplace_back(unk(i), unk(i), (am + ap) / (h * h));
      if (i > 1) as.trip.emplace_back(unk(i), unk(i - 1), -am / (h * h));
      if (i < N) as.trip.emplace_back(unk(i), unk(i + 1), -ap / (h * h));
    }
  } else {
    auto unk = [&](int i, int j) { return (i - 1) * N + (j - 1); };
    static const int boff[13][2] = {{0, 0},  {1, 0},  {-1, 0}, {0, 1}, {0, -1},
                                    {1, 1},  {1, -1}, {-1, 1}, {-1, -1},
                                    {2, 0},  {-2, 0}, {0, 2},  {0, -2}};
    static const double bval[13] = {20, -8, -8, -8, -8, 2, 2, 2, 2, 1, 1, 1, 1};
    for (int i = 1; i <= N; ++i)
      for (int j = 1; j <= N; ++j) {
        double x[2] = {i * h, j * h};
        int r = unk(i, j);
        as.rhs[r] = F(x);
        for (int s = 0; s < 13; ++s) {
          int ii = i + boff[s][0], jj = j + boff[s][1];
          if (!detail::reflect_index(ii, N)) continue;
          if (!detail::reflect_index(jj, N)) continue;
          as.trip.emplace_back(r, unk(ii, jj), k2 * bval[s] / (h * h * h * h));
        }
        for (int ax = 0; ax < 2; ++ax) {
          double xm[2] = {x[0], x[1]}, xp[2] = {x[0], x[1]};
          xm[ax] -= h / 2;
          xp[ax] += h / 2;
          double am = detail::coeff_at(A, eps, ax, xm);
          double ap = detail::coeff_at(A, eps, ax, xp);
          as.trip.emplace_back(r, r, (am + ap) / (h * h));
          int im = i - (ax == 0), jm = j - (ax == 1);
          int ip = i + (ax == 0), jp = j + (ax == 1);
          if (im >= 1 && jm >= 1)
            as.trip.emplace_back(r, unk(im, jm), -am / (h * h));
          if (ip <= N && jp <= N)
            as.trip.emplace_back(r, unk(ip, jp), -ap / (h * h));
        }
      }
  }

  Eigen::SparseMatrix<double> M(grid.interior_nodes(), grid.interior_nodes());
  M.setFromTriplets(as.trip.begin(), as.trip.end());
  DomainSolution sol;
  sol.grid = grid;
  sol.values.assign(grid.full_nodes(), 0.0);
  double res = 0.0;
  Eigen::VectorXd u = detail::solve_refined(M, as.rhs, tol, &res);
  sol.residual = res;
  sol.iterations = 1;
  if (d == 1) {
    for (int i = 1; i <= N; ++i) sol.values[i] = u[i - 1];
  } else {
    for (int i = 1; i <= N; ++i)
      for (int j = 1; j <= N; ++j) sol.at(i, j) = u[(i - 1) * N + (j - 1)];
  }
  sol.descriptor = "perturbed eps=" + std::to_string(eps) +
                   " kappa=" + std::to_string(kappa) + " coeff=" + A.name();
  return sol;
}

/// -div(Ahat grad u) = F with homogeneous Dirichlet data, constant tensor.
inline DomainSolution solve_homogenized(const EffectiveTensor& Ahat,
                                        const SpatialFn& F,
                                        const DomainGrid& grid,
                                        double tol = 1e-10) {
  if (Ahat.m != 1) throw ShapeMismatch("solve_homogenized: scalar mode only");
  if (Ahat.dim != grid.dim)
    throw ShapeMismatch("solve_homogenized: dim mismatch");
  const int N = grid.N, d = grid.dim;
  const double h = grid.h();
  detail::Assembly as;
  as.rhs = Eigen::VectorXd::Zero(grid.interior_nodes());

  if (d == 1) {
    double a = Ahat(0, 0, 0, 0);
    for (int i = 1; i <= N; ++i) {
      double x = i * h;
      as.rhs[i - 1] = F(&x);
      as.trip.emplace_back(i - 1, i - 1, 2 * a / (h * h));
      if (i > 1) as.trip.emplace_back(i - 1, i - 2, -a / (h * h));
      if (i < N) as.trip.emplace_back(i - 1, i, -a / (h * h));
    }
  } else {
    auto unk = [&](int i, int j) { return (i - 1) * N + (j - 1); };
    double a11 = Ahat(0, 0, 0, 0), a22 = Ahat(1, 0, 1, 0);
    double a12 = 0.5 * (Ahat(0, 0, 1, 0) + Ahat(1, 0, 0, 0));
    for (int i = 1; i <= N; ++i)
      for (int j = 1; j <= N; ++j) {
        double x[2] = {i * h, j * h};
        int r = unk(i, j);
        as.rhs[r] = F(x);
        as.trip.emplace_back(r, r, 2 * (a11 + a22) / (h * h));
        if (i > 1) as.trip.emplace_back(r, unk(i - 1, j), -a11 / (h * h));
        if (i < N) as.trip.emplace_back(r, unk(i + 1, j), -a11 / (h * h));
        if (j > 1) as.trip.emplace_back(r, unk(i, j - 1), -a22 / (h * h));
        if (j < N) as.trip.emplace_back(r, unk(i, j + 1), -a22 / (h * h));
        if (std::abs(a12) > 1e-14) {
          static const int cs[4][3] = {
              {1, 1, -1}, {1, -1, 1}, {-1, 1, 1}, {-1, -1, -1}};
          for (auto& c : cs) {
            int ii = i + c[0], jj = j + c[1];
            if (ii >= 1 && ii <= N && jj >= 1 && jj <= N)
              as.trip.emplace_back(r, unk(ii, jj),
                                   c[2] * 2 * a12 / (4 * h * h));
          }
        }
      }
  }
  Eigen::SparseMatrix<double> M(grid.interior_nodes(), grid.interior_nodes());
  M.setFromTriplets(as.trip.begin(), as.trip.end());
  DomainSolution sol;
  sol.grid = grid;
  sol.values.assign(grid.full_nodes(), 0.0);
  double res = 0.0;
  Eigen::VectorXd u = detail::solve_refined(M, as.rhs, tol, &res);
  sol.residual = res;
  sol.iterations = 1;
  if (d == 1) {
    for (int i = 1; i <= N; ++i) sol.values[i] = u[i - 1];
  } else {
    for (int i = 1; i <= N; ++i)
      for (int j = 1; j <= N; ++j) sol.at(i, j) = u[(i - 1) * N + (j - 1)];
  }
  sol.descriptor = "homogenized " + Ahat.provenance;
  return sol;
}

/// lambda^2 eps^2 Delta^2 v - div(Ahat grad v) = F, constant tensor, clamped.
/// With `traces` given, the two outermost interior node layers are fixed to
/// that solution's values (discrete v - u in H^2_0); otherwise homogeneous.
inline DomainSolution solve_intermediate(const EffectiveTensor& Ahat,
                                         double eps, double lambda,
                                         const SpatialFn& F,
                                         const DomainGrid& grid,
                                         double tol = 1e-10,
                                         const DomainSolution* traces = nullptr) {
  if (Ahat.m != 1) throw ShapeMismatch("solve_intermediate: scalar mode only");
  if (Ahat.dim != grid.dim)
    throw ShapeMismatch("solve_intermediate: dim mismatch");
  if (traces && traces->grid.N != grid.N)
    throw ShapeMismatch("solve_intermediate: traces grid mismatch");
  const int N = grid.N, d = grid.dim;
  const double h = grid.h();
  const double k2 = lambda * lambda * eps * eps;
  const double kappa = lambda * eps;
  if (kappa > 0 && h > std::min(eps, kappa) / 4.0 + 1e-12)
    throw GridTooCoarse("solve_intermediate: h must be <= min(eps,kappa)/4");

  // fixed band when matching traces: interior layers 1,2 and N-1,N per axis
  auto fixed = [&](int i, int j) {
    if (!traces) return false;
    bool f = i <= 2 || i >= N - 1;
    if (d == 2) f = f || j <= 2 || j >= N - 1;
    return f;
  };
  auto known_value = [&](int i, int j) {
    return traces ? (d == 1 ? traces->values[i] : traces->at(i, j)) : 0.0;
  };

  // map unknowns
  std::vector<int> id(grid.interior_nodes(), -1);
  int nunk = 0;
  for (int i = 1; i <= N; ++i)
    for (int j = 1; j <= (d == 1 ? 1 : N); ++j) {
      std::size_t flat = d == 1 ? std::size_t(i - 1)
                                : std::size_t(i - 1) * N + (j - 1);
      if (!fixed(i, j)) id[flat] = nunk++;
    }
  if (nunk == 0) throw EmptyRegion("solve_intermediate: no unknowns");

  detail::Assembly as;
  as.rhs = Eigen::VectorXd::Zero(nunk);
  auto flat_of = [&](int i, int j) {
    return d == 1 ? std::size_t(i - 1) : std::size_t(i - 1) * N + (j - 1);
  };
  auto couple = [&](int r, int ii, int jj, double v) {
    if (ii < 1 || ii > N || (d == 2 && (jj < 1 || jj > N))) return;  // zero bdry
    if (fixed(ii, jj))
      as.rhs[r] -= v * known_value(ii, jj);
    else
      as.trip.emplace_back(r, id[flat_of(ii, jj)], v);
  };

  double a11 = Ahat(0, 0, 0, 0);
  double a22 = d == 2 ? Ahat(1, 0, 1, 0) : 0.0;
  double a12 = d == 2 ? 0.5 * (Ahat(0, 0, 1, 0) + Ahat(1, 0, 0, 0)) : 0.0;

  static const int boff1[5] = {-2, -1, 0, 1, 2};
  static const double bval1[5] = {1, -4, 6, -4, 1};
  static const int boff2[13][2] = {{0, 0},  {1, 0},  {-1, 0}, {0, 1}, {0, -1},
                                   {1, 1},  {1, -1}, {-1, 1}, {-1, -1},
                                   {2, 0},  {-2, 0}, {0, 2},  {0, -2}};
  static const double bval2[13] = {20, -8, -8, -8, -8, 2, 2, 2, 2, 1, 1, 1, 1};

  for (int i = 1; i <= N; ++i)
    for (int j = 1; j <= (d == 1 ? 1 : N); ++j) {
      if (fixed(i, j)) continue;
      int r = id[flat_of(i, j)];
      double x[2] = {i * h, j * h};
      as.rhs[r] += F(x);
      if (k2 > 0) {
        if (d == 1) {
          for (int s = 0; s < 5; ++s) {
            int ii = i + boff1[s];
            if (!detail::reflect_index(ii, N)) continue;
            couple(r, ii, j, k2 * bval1[s] / (h * h * h * h));
          }
        } else {
          for (int s = 0; s < 13; ++s) {
            int ii = i + boff2[s][0], jj = j + boff2[s][1];
            if (!detail::reflect_index(ii, N)) continue;
            if (!detail::reflect_index(jj, N)) continue;
            couple(r, ii, jj, k2 * bval2[s] / (h * h * h * h));
          }
        }
      }
      if (d == 1) {
        couple(r, i, j, 2 * a11 / (h * h));
        couple(r, i - 1, j, -a11 / (h * h));
        couple(r, i + 1, j, -a11 / (h * h));
      } else {
        couple(r, i, j, 2 * (a11 + a22) / (h * h));
        couple(r, i - 1, j, -a11 / (h * h));
        couple(r, i + 1, j, -a11 / (h * h));
        couple(r, i, j - 1, -a22 / (h * h));
        couple(r, i, j + 1, -a22 / (h * h));
        if (std::abs(a12) > 1e-14) {
          static const int cs[4][3] = {
              {1, 1, -1}, {1, -1, 1}, {-1, 1, 1}, {-1, -1, -1}};
          for (auto& c : cs)
            couple(r, i + c[0], j + c[1], c[2] * 2 * a12 / (4 * h * h));
        }
      }
    }

  Eigen::SparseMatrix<double> M(nunk, nunk);
  M.setFromTriplets(as.trip.begin(), as.trip.end());
  DomainSolution sol;
  sol.grid = grid;
  sol.values.assign(grid.full_nodes(), 0.0);
  double res = 0.0;
  Eigen::VectorXd u = detail::solve_refined(M, as.rhs, tol, &res);
  sol.residual = res;
  sol.iterations = 1;
  for (int i = 1; i <= N; ++i)
    for (int j = 1; j <= (d == 1 ? 1 : N); ++j) {
      double v = fixed(i, j) ? known_value(i, j) : u[id[flat_of(i, j)]];
      if (d == 1)
        sol.values[i] = v;
      else
        sol.at(i, j) = v;
    }
  if (traces && d == 2) {
    // carry the boundary ring too, so gradients match across the seam
    for (int i = 0; i <= N + 1; ++i) {
      sol.at(i, 0) = traces->at(i, 0);
      sol.at(i, N + 1) = traces->at(i, N + 1);
      sol.at(0, i) = traces->at(0, i);
      sol.at(N + 1, i) = traces->at(N + 1, i);
    }
  }
  sol.descriptor = "intermediate lambda=" + std::to_string(lambda) +
                   " eps=" + std::to_string(eps);
  return sol;
}

/// Closed-form solution of lambda^2 u'''' - u'' = 1 on (0,1), clamped:
///   u(x) = -x^2/2 + c0 + c1 x + c2 e^{-x/l} + c3 e^{-(1-x)/l},
/// with the limit profile u0(x) = x(1-x)/2.
struct ClampedClosedForm {
  double lambda;
  double c[4];
  double u(double x) const {
    return -x * x / 2 + c[0] + c[1] * x + c[2] * std::exp(-x / lambda) +
           c[3] * std::exp(-(1.0 - x) / lambda);
  }
  static double u0(double x) { return x * (1.0 - x) / 2.0; }
};

inline ClampedClosedForm solve_clamped_closed_form(double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0))
    throw ShapeMismatch("solve_clamped_closed_form: lambda in (0,1]");
  const double E = std::exp(-1.0 / lambda);
  Eigen::Matrix4d M;
  M << 1, 0, 1, E,
       1, 1, E, 1,
       0, 1, -1 / lambda, E / lambda,
       0, 1, -E / lambda, 1 / lambda;
  Eigen::Vector4d rhs(0.0, 0.5, 0.0, 1.0);
  Eigen::FullPivLU<Eigen::Matrix4d> lu(M);
  if (!lu.isInvertible())
    throw SingularSystem("solve_clamped_closed_form: boundary system singular");
  Eigen::Vector4d c = lu.solve(rhs);
  ClampedClosedForm s;
  s.lambda = lambda;
  for (int k = 0; k < 4; ++k) s.c[k] = c[k];
  return s;
}

// ---------------------------------------------------------------------------
// Region norms.

struct Region {
  enum Kind { Whole, Ball, BoundaryLayer } kind = Whole;
  double center[2] = {0.5, 0.5};
  double r = 0.0;  // ball radius
  double t = 0.0;  // layer thickness: { x : dist(x, boundary) < t }
  static Region whole() { return {}; }
  static Region ball(double cx, double cy, double radius) {
    Region g;
    g.kind = Ball;
    g.center[0] = cx;
    g.center[1] = cy;
    g.r = radius;
    return g;
  }
  static Region layer(double t) {
    Region g;
    g.kind = BoundaryLayer;
    g.t = t;
    return g;
  }
};

enum class RegionNorm { L2, H1Seminorm, LinfGrad, Mean };

namespace detail {

inline double boundary_dist(const DomainGrid& g, double x0, double x1) {
  double d0 = std::min(x0, 1.0 - x0);
  if (g.dim == 1) return d0;
  return std::min(d0, std::min(x1, 1.0 - x1));
}

inline bool cell_in_region(const DomainGrid& g, const Region& reg, double x0,
                           double x1) {
  const double hh = g.h() / 2;
  switch (reg.kind) {
    case Region::Whole:
      return true;
    case Region::Ball: {
      // farthest cell corner inside the ball
      double dx = std::abs(x0 - reg.center[0]) + hh;
      double dy = g.dim == 2 ? std::abs(x1 - reg.center[1]) + hh : 0.0;
      return dx * dx + dy * dy <= reg.r * reg.r;
    }
    case Region::BoundaryLayer:
      return boundary_dist(g, x0, x1) + hh < reg.t;
  }
  return false;
}

}  // namespace detail

/// Midpoint-rule region norms of a solution; gradients by centered
/// differences. Returns the norm (not the average); region_measure gives
/// the discrete |region| for callers that need averaged quantities.
inline double norms_on_region(const DomainSolution& u, const Region& reg,
                              RegionNorm kind) {
  const DomainGrid& g = u.grid;
  const int N = g.N;
  const double h = g.h();
  double acc = 0.0, mx = 0.0;
  std::size_t count = 0;
  for (int i = 0; i <= N + 1; ++i)
    for (int j = 0; j <= (g.dim == 1 ? 0 : N + 1); ++j) {
      double x0 = i * h, x1 = j * h;
      if (!detail::cell_in_region(g, reg, x0, x1)) continue;
      ++count;
      switch (kind) {
        case RegionNorm::L2: {
          double v = g.dim == 1 ? u.values[i] : u.at(i, j);
          acc += v * v;
          break;
        }
        case RegionNorm::Mean: {
          acc += g.dim == 1 ? u.values[i] : u.at(i, j);
          break;
        }
        case RegionNorm::H1Seminorm:
        case RegionNorm::LinfGrad: {
          double gx = u.grad(0, i, j);
          double gy = g.dim == 2 ? u.grad(1, i, j) : 0.0;
          double g2 = gx * gx + gy * gy;
          acc += g2;
          mx = std::max(mx, std::sqrt(g2));
          break;
        }
      }
    }
  if (count == 0) throw EmptyRegion("norms_on_region: no cells in region");
  const double cell = g.dim == 1 ? h : h * h;
  switch (kind) {
    case RegionNorm::L2:
    case RegionNorm::H1Seminorm:
      return std::sqrt(acc * cell);
    case RegionNorm::LinfGrad:
      return mx;
    case RegionNorm::Mean:
      return acc / double(count);
  }
  return 0.0;
}

inline double region_measure(const DomainGrid& g, const Region& reg) {
  const int N = g.N;
  const double h = g.h();
  std::size_t count = 0;
  for (int i = 0; i <= N + 1; ++i)
    for (int j = 0; j <= (g.dim == 1 ? 0 : N + 1); ++j)
      if (detail::cell_in_region(g, reg, i * h, j * h)) ++count;
  if (count == 0) throw EmptyRegion("region_measure: no cells in region");
  return double(count) * (g.dim == 1 ? h : h * h);
}

/// Grid policy: smallest power-of-two-minus-one N with h <= min(eps,kappa)/4.
inline DomainGrid grid_for(int dim, double eps, double kappa) {
  double hmax = std::min(eps, kappa) / 4.0;
  int Np1 = 2;
  while (1.0 / Np1 > hmax) {
    Np1 *= 2;
    if (Np1 > (1 << 24)) throw GridTooCoarse("grid_for: resolution blow-up");
  }
  DomainGrid g;
  g.dim = dim;
  g.N = std::max(Np1 - 1, 8);
  return g;
}

}  // namespace bvp
}  // namespace homog
