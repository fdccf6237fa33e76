#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "homogbench/bvp.hpp"
#include "homogbench/cell.hpp"
#include "homogbench/common.hpp"
#include "homogbench/effective.hpp"
#include "homogbench/expansion.hpp"
#include "homogbench/ratefit.hpp"

namespace homog::rates {

namespace detail {

inline DomainSolution difference(const DomainSolution& a,
                                 const DomainSolution& b) {
  if (a.grid.N != b.grid.N || a.grid.dim != b.grid.dim)
    throw ShapeMismatch("difference: grid mismatch");
  DomainSolution d = a;
  for (std::size_t k = 0; k < d.values.size(); ++k) d.values[k] -= b.values[k];
  d.descriptor = "difference";
  return d;
}

/// (avg over cells in region of |grad u|^2)^{1/2}.
inline double avg_grad(const DomainSolution& u, const bvp::Region& reg) {
  double nrm = bvp::norms_on_region(u, reg, bvp::RegionNorm::H1Seminorm);
  double meas = bvp::region_measure(u.grid, reg);
  return nrm / std::sqrt(meas);
}

/// (avg over cells in region of |F|^p)^{1/p} for a spatial function.
inline double avg_p(const DomainGrid& g, const SpatialFn& F,
                    const bvp::Region& reg, double p) {
  const int N = g.N;
  const double h = g.h();
  double acc = 0.0;
  std::size_t cnt = 0;
  for (int i = 1; i <= N; ++i)
    for (int j = 1; j <= (g.dim == 1 ? 1 : N); ++j) {
      double x[2] = {i * h, g.dim == 2 ? j * h : 0.0};
      if (!bvp::detail::cell_in_region(g, reg, x[0], x[1])) continue;
      acc += std::pow(std::abs(F(x)), p);
      ++cnt;
    }
  if (cnt == 0) throw EmptyRegion("avg_p: no cells in region");
  return std::pow(acc / double(cnt), 1.0 / p);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Regime sweep: kappa = eps^gamma against the limit tensor selected by
// rho = lim kappa/eps.

struct RegimeResult {
  RateReport report;            // ||u_eps - u0||_L2 vs eps
  std::vector<double> bounds;   // branch bound per eps
  double fitted_constant = 0.0; // geometric mean of err/bound
  bool pointwise_ok = true;     // err <= 2 * fitted_constant * bound everywhere
  double theoretical_exponent = 0.0;
  std::string branch;
};

inline double regime_rho(double gamma) {
  if (gamma < 1.0) return std::numeric_limits<double>::infinity();
  if (gamma == 1.0) return 1.0;
  return 0.0;
}

inline double regime_bound(double gamma, double eps) {
  const double kappa = std::pow(eps, gamma);
  const double ratio = kappa / eps;
  if (gamma < 1.0) return kappa + eps + 1.0 / (ratio * ratio);
  if (gamma == 1.0) return kappa + eps;  // rho = 1, |(kappa/eps)^2 - 1| = 0
  return kappa + eps + ratio * ratio;
}

inline RegimeResult regime_sweep(const CoefficientField& A, double gamma,
                                 const std::vector<double>& eps_list,
                                 const SpatialFn& F, int cell_n = 1024,
                                 double tol = 1e-9) {
  if (!(gamma > 0.0)) throw ShapeMismatch("regime_sweep: gamma must be > 0");
  const double rho = regime_rho(gamma);
  if (gamma > 1.0 && !A.lipschitz())
    throw ShapeMismatch("regime_sweep: rho=0 branch needs Lipschitz metadata");
  CoefficientField Acell = A.n() == cell_n
                               ? A
                               : (A.analytic()
                                      ? CoefficientField::from_analytic(
                                            A.dim(), A.m(), cell_n, A.analytic(),
                                            A.nu1(), A.nu2(), A.name(),
                                            A.lipschitz())
                                      : A);
  EffectiveTensor Ahat = effective::effective_limit(Acell, rho, tol);

  RegimeResult res;
  res.branch = gamma < 1.0 ? "rho=inf" : (gamma == 1.0 ? "rho=1" : "rho=0");
  res.theoretical_exponent =
      gamma < 1.0 ? std::min({gamma, 1.0, 2.0 - 2.0 * gamma})
                  : (gamma == 1.0 ? 1.0 : std::min({1.0, 2.0 * gamma - 2.0}));
  std::vector<std::pair<double, double>> pts;
  for (double eps : eps_list) {
    double kappa = std::pow(eps, gamma);
    DomainGrid grid = bvp::grid_for(A.dim(), eps, kappa);
    DomainSolution u = bvp::solve_perturbed(A, eps, kappa, F, grid);
    DomainSolution u0 = bvp::solve_homogenized(Ahat, F, grid);
    double err = bvp::norms_on_region(detail::difference(u, u0),
                                      bvp::Region::whole(), bvp::RegionNorm::L2);
    pts.push_back({eps, err});
    res.bounds.push_back(regime_bound(gamma, eps));
  }
  res.report = fit_rate(pts, "regime gamma=" + std::to_string(gamma));
  if (!res.report.identically_zero) {
    double logc = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k)
      logc += std::log(pts[k].second / res.bounds[k]);
    res.fitted_constant = std::exp(logc / double(pts.size()));
    for (std::size_t k = 0; k < pts.size(); ++k)
      if (pts[k].second > 2.0 * res.fitted_constant * res.bounds[k])
        res.pointwise_ok = false;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Fixed-lambda sweep: L2 homogenization error and the H1 norm of the
// corrected two-scale difference w.

struct FixedLambdaResult {
  RateReport l2;      // ||u_eps - u0|| vs eps
  RateReport grad_w;  // ||grad w|| vs eps
};

inline FixedLambdaResult fixed_lambda_sweep(const CoefficientField& A,
                                            double lambda,
                                            const std::vector<double>& eps_list,
                                            const SpatialFn& F,
                                            int cell_n = 1024,
                                            double tol = 1e-9) {
  CoefficientField Acell =
      A.analytic() && A.n() != cell_n
          ? CoefficientField::from_analytic(A.dim(), A.m(), cell_n,
                                            A.analytic(), A.nu1(), A.nu2(),
                                            A.name(), A.lipschitz())
          : A;
  CorrectorBundle bundle = cell::solve_corrector(Acell, lambda, tol);
  EffectiveTensor Ahat = effective::homogenize_with(Acell, bundle);

  std::vector<std::pair<double, double>> pts_l2, pts_w;
  for (double eps : eps_list) {
    double kappa = lambda * eps;
    DomainGrid grid = bvp::grid_for(A.dim(), eps, kappa);
    DomainSolution u = bvp::solve_perturbed(A, eps, kappa, F, grid);
    DomainSolution u0 = bvp::solve_homogenized(Ahat, F, grid);
    double err = bvp::norms_on_region(detail::difference(u, u0),
                                      bvp::Region::whole(), bvp::RegionNorm::L2);
    DomainSolution w = expansion::two_scale_w(u, u0, bundle, eps, lambda);
    double werr = bvp::norms_on_region(w, bvp::Region::whole(),
                                       bvp::RegionNorm::H1Seminorm);
    pts_l2.push_back({eps, err});
    pts_w.push_back({eps, werr});
  }
  FixedLambdaResult out;
  out.l2 = fit_rate(pts_l2, "fixed_lambda_l2 lambda=" + std::to_string(lambda));
  out.grad_w =
      fit_rate(pts_w, "fixed_lambda_gradw lambda=" + std::to_string(lambda));
  return out;
}

// ---------------------------------------------------------------------------
// Singular-perturbation rates in lambda (coefficients not oscillating).

enum class SpMode {
  DirichletL2,  // closed-form clamped interval problem, O(lambda)
  PeriodicL2,   // torus problem, O(lambda^2)
  PeriodicH1,   // torus problem, gradient norm, O(lambda)
  DirichletH1   // closed form, gradient norm, O(sqrt(lambda))
};

inline RateReport sp_rate_sweep(const CoefficientField& A,
                                const std::vector<double>& lambda_list,
                                SpMode mode, double tol = 1e-9) {
  std::vector<std::pair<double, double>> pts;
  if (mode == SpMode::DirichletL2 || mode == SpMode::DirichletH1) {
    // lambda^2 u'''' - u'' = 1 clamped; compare against u0 = x(1-x)/2
    const int nq = 1 << 14;  // composite-Simpson resolution
    for (double l : lambda_list) {
      bvp::ClampedClosedForm s = bvp::solve_clamped_closed_form(l);
      auto integrand = [&](double x) {
        if (mode == SpMode::DirichletL2) {
          double d = s.u(x) - bvp::ClampedClosedForm::u0(x);
          return d * d;
        }
        double du = -x + s.c[1] - s.c[2] / l * std::exp(-x / l) +
                    s.c[3] / l * std::exp(-(1.0 - x) / l);
        double du0 = 0.5 - x;
        double d = du - du0;
        return d * d;
      };
      double h = 1.0 / nq, acc = integrand(0.0) + integrand(1.0);
      for (int i = 1; i < nq; ++i) acc += (i % 2 ? 4.0 : 2.0) * integrand(i * h);
      pts.push_back({l, std::sqrt(acc * h / 3.0)});
    }
    return fit_rate(pts, mode == SpMode::DirichletL2 ? "sp_dirichlet_l2"
                                                     : "sp_dirichlet_h1");
  }

  // periodic modes: lambda^2 D^2 u - div(A grad u) = F on the torus with
  // F = sin(2 pi y_1) (mean zero); u0 is the lambda = 0 solution.
  PeriodicField F(A.dim(), A.n(), A.m());
  F.sample([](const double* y, int c) {
    return c == 0 ? std::sin(kTwoPi * y[0]) : 0.0;
  });
  PeriodicField u0 = cell::solve_periodic(A, 0.0, F, tol);
  for (double l : lambda_list) {
    PeriodicField ul = cell::solve_periodic(A, l, F, tol);
    PeriodicField diff = torus::axpy(-1.0, u0, ul);
    double e = mode == SpMode::PeriodicL2 ? torus::norm(diff, NormKind::L2)
                                          : torus::seminorm(diff, 1);
    pts.push_back({l, e});
  }
  return fit_rate(pts, mode == SpMode::PeriodicL2 ? "sp_periodic_l2"
                                                  : "sp_periodic_h1");
}

// ---------------------------------------------------------------------------
// Excess decay: distance from grad u to gradients of corrector-affine fields
// over shrinking balls.

struct ExcessRow {
  double r;
  double excess;
};

struct ExcessResult {
  std::vector<ExcessRow> rows;
  double alpha = 0.0;  // fitted decay exponent (positive = decays with r)
  bool monotone = true;  // non-increasing toward small r, 10% jitter allowed
};

inline ExcessResult excess_decay(const DomainSolution& u,
                                 const CorrectorBundle& bundle, double eps,
                                 double cx, double cy,
                                 const std::vector<double>& r_list) {
  const DomainGrid& g = u.grid;
  const int N = g.N, d = g.dim;
  const double h = g.h();
  for (double r : r_list)
    if (r < eps - 1e-12 || cx - r < 0 || cx + r > 1 ||
        (d == 2 && (cy - r < 0 || cy + r > 1)))
      throw RegionNotNested("excess_decay: ball not admissible");

  std::vector<expansion::detail::CellSampler> gchi(d);
  std::vector<PeriodicField> gf;
  gf.reserve(d);
  for (int c = 0; c < d; ++c) {
    gf.push_back(torus::grad(bundle.column(c, 0)));
    gchi[c] = expansion::detail::make_sampler(gf.back(), eps, g);
  }

  ExcessResult out;
  for (double r : r_list) {
    bvp::Region Br = bvp::Region::ball(cx, cy, r);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
    std::vector<std::array<double, 2>> gus;
    std::vector<std::array<double, 4>> basis;  // b_c axis a at each node
    for (int i = 1; i <= N; ++i)
      for (int j = 1; j <= (d == 1 ? 1 : N); ++j) {
        double x0 = i * h, x1 = d == 2 ? j * h : 0.0;
        if (!bvp::detail::cell_in_region(g, Br, x0, x1)) continue;
        std::array<double, 2> gu = {u.grad(0, i, j),
                                    d == 2 ? u.grad(1, i, j) : 0.0};
        std::array<double, 4> b{};  // b[(c)*2+a] = delta_ac + d_a chi_c
        for (int c = 0; c < d; ++c)
          for (int a = 0; a < d; ++a)
            b[c * 2 + a] = (a == c ? 1.0 : 0.0) + gchi[c].value(i, j, a);
        gus.push_back(gu);
        basis.push_back(b);
      }
    if (gus.empty()) throw EmptyRegion("excess_decay: empty ball");
    for (std::size_t k = 0; k < gus.size(); ++k)
      for (int c = 0; c < d; ++c) {
        for (int c2 = 0; c2 < d; ++c2) {
          double s = 0.0;
          for (int a = 0; a < d; ++a)
            s += basis[k][c * 2 + a] * basis[k][c2 * 2 + a];
          M(c, c2) += s;
        }
        for (int a = 0; a < d; ++a)
          rhs[c] += basis[k][c * 2 + a] * gus[k][a];
      }
    Eigen::VectorXd E = M.ldlt().solve(rhs);
    double acc = 0.0;
    for (std::size_t k = 0; k < gus.size(); ++k)
      for (int a = 0; a < d; ++a) {
        double v = gus[k][a];
        for (int c = 0; c < d; ++c) v -= E[c] * basis[k][c * 2 + a];
        acc += v * v;
      }
    out.rows.push_back({r, std::sqrt(acc / double(gus.size()))});
  }
  // monotone non-increasing toward small r (10% jitter)
  for (std::size_t k = 0; k + 1 < out.rows.size(); ++k) {
    const auto& lo = out.rows[k].r < out.rows[k + 1].r ? out.rows[k]
                                                       : out.rows[k + 1];
    const auto& hi = out.rows[k].r < out.rows[k + 1].r ? out.rows[k + 1]
                                                       : out.rows[k];
    if (lo.excess > 1.1 * hi.excess) out.monotone = false;
  }
  std::vector<std::pair<double, double>> pts;
  for (auto& row : out.rows) pts.push_back({row.r, row.excess});
  out.alpha = fit_rate(pts, "excess_decay").slope;
  return out;
}

// ---------------------------------------------------------------------------
// Large-scale Lipschitz monitor.

struct LipschitzRow {
  std::string rule;
  double eps, kappa;
  double Q;
};

inline double kappa_of_rule(const std::string& rule, double eps) {
  if (rule == "eps2") return eps * eps;
  if (rule == "eps") return eps;
  if (rule == "sqrt") return std::sqrt(eps);
  throw UnknownName("lipschitz_monitor: unknown kappa rule '" + rule + "'");
}

/// Q for one solved field: max over dyadic r in [eps, R/2] of the ball-
/// averaged gradient over B_r, normalized by the B_R average plus the
/// F p-average scale term.
inline double lipschitz_Q(const DomainSolution& u, const SpatialFn& F,
                          double eps, double cx, double cy, double R,
                          double p = 4.0) {
  bvp::Region BR = bvp::Region::ball(cx, cy, R);
  double denom = detail::avg_grad(u, BR) +
                 R * detail::avg_p(u.grid, F, BR, p);
  double Q = 0.0;
  for (double r = eps; r <= R / 2 + 1e-12; r *= 2)
    Q = std::max(Q, detail::avg_grad(u, bvp::Region::ball(cx, cy, r)) / denom);
  return Q;
}

/// Pointwise variant: sup |grad u| over B_{R/8} in the numerator.
inline double lipschitz_Q_pt(const DomainSolution& u, const SpatialFn& F,
                             double cx, double cy, double R, double p = 4.0) {
  bvp::Region BR = bvp::Region::ball(cx, cy, R);
  double denom = detail::avg_grad(u, BR) +
                 R * detail::avg_p(u.grid, F, BR, p);
  double num = bvp::norms_on_region(u, bvp::Region::ball(cx, cy, R / 8),
                                    bvp::RegionNorm::LinfGrad);
  return num / denom;
}

inline std::vector<LipschitzRow> lipschitz_monitor(
    const CoefficientField& A, const std::vector<double>& eps_list,
    const std::vector<std::string>& kappa_rules, const SpatialFn& F,
    double cx = 0.5, double cy = 0.5, double R = 0.25, double p = 4.0) {
  std::vector<LipschitzRow> rows;
  for (const auto& rule : kappa_rules)
    for (double eps : eps_list) {
      double kappa = kappa_of_rule(rule, eps);
      DomainGrid grid = bvp::grid_for(A.dim(), eps, kappa);
      DomainSolution u = bvp::solve_perturbed(A, eps, kappa, F, grid);
      rows.push_back({rule, eps, kappa, lipschitz_Q(u, F, eps, cx, cy, R, p)});
    }
  return rows;
}

}  // namespace homog::rates
