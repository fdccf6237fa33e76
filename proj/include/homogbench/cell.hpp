#pragma once

#include <cmath>
#include <vector>

#include "homogbench/coefficients.hpp"
#include "homogbench/common.hpp"
#include "homogbench/field.hpp"

namespace homog {

/// Correctors chi_j^b for one coefficient field at one lambda, one m-vector
/// field per column (j, b), all mean zero. Norms aggregate all columns in
/// root-sum-square sense.
struct CorrectorBundle {
  double lambda = 0.0;
  int dim = 1, m = 1, n = 1;
  std::vector<PeriodicField> chi;  // column index = j*m + b
  double rel_residual = 0.0;
  int iterations = 0;
  double h1_norm = 0.0, d2_norm = 0.0, d3_norm = 0.0;

  const PeriodicField& column(int j, int b) const { return chi[j * m + b]; }
};

namespace cell {

namespace detail {

inline double dot(const PeriodicField& a, const PeriodicField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    s += a.data()[i] * b.data()[i];
  return s / double(a.nodes());
}

/// lambda^2 Delta^2 chi - div(A grad chi), matrix free.
inline PeriodicField apply_op(const CoefficientField& A, double lambda,
                              const PeriodicField& chi) {
  PeriodicField dv = torus::div(A.apply_to_gradient(torus::grad(chi)));
  if (lambda == 0.0) {
    auto& d = dv.mutable_data();
    for (double& v : d) v = -v;
    return dv;
  }
  PeriodicField out = torus::bilaplacian(chi);
  auto& d = out.mutable_data();
  const double l2 = lambda * lambda;
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = l2 * d[i] - dv.data()[i];
  return out;
}

/// Diagonal spectral preconditioner (lambda^2|2pi k|^4 + abar|2pi k|^2)^{-1},
/// with the mean mode projected out.
inline PeriodicField precondition(const PeriodicField& r, double lambda,
                                  double abar) {
  const double l2 = lambda * lambda;
  return torus::detail::apply_even_symbol(r, [l2, abar](double k2) {
    return k2 == 0.0 ? 0.0 : 1.0 / (l2 * k2 * k2 + abar * k2);
  });
}

/// Discrete H^{-2}-weighted residual norm.
inline double hm2_norm(const PeriodicField& r) {
  return std::sqrt(torus::spectral_weighted_sq(
      r, [](double k2) { return 1.0 / ((1.0 + k2) * (1.0 + k2)); }));
}

struct ColumnSolve {
  PeriodicField chi;
  double rel_residual;
  int iterations;
};

inline ColumnSolve solve_column(const CoefficientField& A, double lambda,
                                int j, int b, double tol, double abar,
                                int max_iters) {
  PeriodicField rhs = torus::div(A.column(j, b));
  const double b_norm = hm2_norm(rhs);
  PeriodicField x(A.dim(), A.n(), A.m());
  if (b_norm < 1e-300) return {x, 0.0, 0};  // constant column, chi = 0

  PeriodicField r = rhs;
  PeriodicField z = precondition(r, lambda, abar);
  PeriodicField p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= max_iters; ++it) {
    PeriodicField q = apply_op(A, lambda, p);
    double pq = dot(p, q);
    if (!(pq > 0.0)) throw NoConvergence("cell: CG curvature lost");
    double alpha = rz / pq;
    x = torus::axpy(alpha, p, x);
    r = torus::axpy(-alpha, q, r);
    double rel = hm2_norm(r) / b_norm;
    if (rel <= tol) return {torus::project_mean_zero(x), rel, it};
    z = precondition(r, lambda, abar);
    double rz_new = dot(r, z);
    p = torus::axpy(rz_new / rz, p, z);  // p = z + beta p
    rz = rz_new;
  }
  throw NoConvergence("cell: CG did not reach tolerance");
}

}  // namespace detail

/// Solve the periodic cell problem
///   lambda^2 Delta^2 chi - div(A grad(P + chi)) = 0,  mean(chi) = 0
/// for every column P_j^b, by preconditioned conjugate gradients on the
/// mean-zero subspace. lambda = 0 drops the biharmonic term (classical
/// second-order cell problem).
inline CorrectorBundle solve_corrector(const CoefficientField& A, double lambda,
                                       double tol = 1e-9) {
  if (A.nu1() <= 0.0) throw IllConditioned("cell: nonpositive nu1 metadata");
  if (!(tol > 0.0 && tol <= 1e-4)) throw ShapeMismatch("cell: tol out of range");

  const int d = A.dim(), m = A.m(), dm = d * m;
  auto mu = A.mean_tensor();
  double abar = 0.0;
  for (int I = 0; I < dm; ++I) abar += mu[std::size_t(I) * dm + I];
  abar /= dm;
  const int max_iters = 10 * A.n() * d;

  CorrectorBundle B;
  B.lambda = lambda;
  B.dim = d;
  B.m = m;
  B.n = A.n();
  double res = 0.0;
  int iters = 0;
  double h1 = 0.0, d2 = 0.0, d3 = 0.0;
  for (int j = 0; j < d; ++j)
    for (int b = 0; b < m; ++b) {
      auto cs = detail::solve_column(A, lambda, j, b, tol, abar, max_iters);
      res = std::max(res, cs.rel_residual);
      iters = std::max(iters, cs.iterations);
      double n1 = torus::norm(cs.chi, NormKind::H1);
      double n2 = torus::seminorm(cs.chi, 2);
      double n3 = torus::seminorm(cs.chi, 3);
      h1 += n1 * n1;
      d2 += n2 * n2;
      d3 += n3 * n3;
      B.chi.push_back(std::move(cs.chi));
    }
  B.rel_residual = res;
  B.iterations = iters;
  B.h1_norm = std::sqrt(h1);
  B.d2_norm = std::sqrt(d2);
  B.d3_norm = std::sqrt(d3);
  return B;
}

/// General periodic solve lambda^2 Delta^2 u - div(A grad u) = rhs on the
/// mean-zero subspace (same operator and preconditioner as the corrector
/// columns); rhs must be an m-component field, its mean is projected out.
inline PeriodicField solve_periodic(const CoefficientField& A, double lambda,
                                    const PeriodicField& rhs,
                                    double tol = 1e-9) {
  if (rhs.dim() != A.dim() || rhs.n() != A.n() || rhs.comps() != A.m())
    throw ShapeMismatch("solve_periodic: rhs shape mismatch");
  const int d = A.dim(), dm = d * A.m();
  auto mu = A.mean_tensor();
  double abar = 0.0;
  for (int I = 0; I < dm; ++I) abar += mu[std::size_t(I) * dm + I];
  abar /= dm;
  PeriodicField b = torus::project_mean_zero(rhs);
  const double b_norm = detail::hm2_norm(b);
  PeriodicField x(A.dim(), A.n(), A.m());
  if (b_norm < 1e-300) return x;
  PeriodicField r = b;
  PeriodicField z = detail::precondition(r, lambda, abar);
  PeriodicField p = z;
  double rz = detail::dot(r, z);
  const int max_iters = 10 * A.n() * d;
  for (int it = 1; it <= max_iters; ++it) {
    PeriodicField q = detail::apply_op(A, lambda, p);
    double pq = detail::dot(p, q);
    if (!(pq > 0.0)) throw NoConvergence("solve_periodic: CG curvature lost");
    double alpha = rz / pq;
    x = torus::axpy(alpha, p, x);
    r = torus::axpy(-alpha, q, r);
    if (detail::hm2_norm(r) / b_norm <= tol)
      return torus::project_mean_zero(x);
    z = detail::precondition(r, lambda, abar);
    double rz_new = detail::dot(r, z);
    p = torus::axpy(rz_new / rz, p, z);
    rz = rz_new;
  }
  throw NoConvergence("solve_periodic: CG did not reach tolerance");
}

/// Strong-form residual, recomputed independently of the solver: max over
/// columns of the relative H^{-2}-weighted norm of
///   lambda^2 Delta^2 chi - div(A grad chi) - div(A grad P).
inline double residual(const CoefficientField& A, double lambda,
                       const CorrectorBundle& bundle) {
  double worst = 0.0;
  for (int j = 0; j < A.dim(); ++j)
    for (int b = 0; b < A.m(); ++b) {
      PeriodicField rhs = torus::div(A.column(j, b));
      double bn = detail::hm2_norm(rhs);
      PeriodicField r =
          torus::axpy(-1.0, rhs, detail::apply_op(A, lambda, bundle.column(j, b)));
      double rn = detail::hm2_norm(r);
      worst = std::max(worst, bn < 1e-300 ? rn : rn / bn);
    }
  return worst;
}

struct NormRow {
  double lambda, h1, d2, d3;
};

inline std::vector<NormRow> corrector_norm_sweep(const CoefficientField& A,
                                                 const std::vector<double>& lambdas,
                                                 double tol = 1e-9) {
  std::vector<NormRow> rows;
  for (double l : lambdas) {
    CorrectorBundle b = solve_corrector(A, l, tol);
    rows.push_back({l, b.h1_norm, b.d2_norm, b.d3_norm});
  }
  return rows;
}

}  // namespace cell
}  // namespace homog
