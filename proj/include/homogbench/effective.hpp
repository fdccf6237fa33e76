#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "homogbench/cell.hpp"
#include "homogbench/coefficients.hpp"
#include "homogbench/common.hpp"
#include "homogbench/ratefit.hpp"

namespace homog {

/// Constant effective tensor with its certification report.
struct EffectiveTensor {
  int dim = 1, m = 1;
  std::vector<double> entries;  // (dm) x (dm) row-major, I = i*m+a
  std::string provenance;
  double symmetry_deviation = 0.0;
  double ell_lo = 0.0, ell_hi = 0.0;  // Rayleigh interval on symmetric xi

  int block() const { return dim * m; }
  double operator()(int i, int a, int j, int b) const {
    const int dm = block();
    return entries[std::size_t(i * m + a) * dm + (j * m + b)];
  }
  double frobenius_distance(const EffectiveTensor& o) const {
    double s = 0.0;
    for (std::size_t k = 0; k < entries.size(); ++k) {
      double dv = entries[k] - o.entries[k];
      s += dv * dv;
    }
    return std::sqrt(s);
  }
};

namespace effective {

namespace detail {

/// Extremal Rayleigh values of a constant tensor on symmetric matrices
/// (same Voigt reduction as CoefficientField::estimate_ellipticity).
inline std::pair<double, double> voigt_extremes(int dim, int m,
                                                const std::vector<double>& e) {
  const int dm = dim * m;
  auto at = [&](int i, int a, int j, int b) {
    return e[std::size_t(i * m + a) * dm + (j * m + b)];
  };
  if (m == 1) {
    Eigen::MatrixXd M(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) M(i, j) = at(i, 0, j, 0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
  }
  static const double E[3][2][2] = {
      {{1, 0}, {0, 0}},
      {{0, 0}, {0, 1}},
      {{0, 1.0 / std::sqrt(2.0)}, {1.0 / std::sqrt(2.0), 0}}};
  Eigen::Matrix3d M;
  for (int p = 0; p < 3; ++p)
    for (int q = 0; q < 3; ++q) {
      double s = 0.0;
      for (int i = 0; i < 2; ++i)
        for (int a = 0; a < 2; ++a)
          for (int j = 0; j < 2; ++j)
            for (int b = 0; b < 2; ++b)
              s += at(i, a, j, b) * E[p][i][a] * E[q][j][b];
      M(p, q) = s;
    }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(M);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

inline void certify(EffectiveTensor& T) {
  const int dm = T.block();
  double dev = 0.0;
  for (int I = 0; I < dm; ++I)
    for (int J = 0; J < dm; ++J)
      dev = std::max(dev, std::abs(T.entries[std::size_t(I) * dm + J] -
                                   T.entries[std::size_t(J) * dm + I]));
  if (T.m == T.dim && T.m > 1) {
    for (int i = 0; i < T.dim; ++i)
      for (int a = 0; a < T.m; ++a)
        for (int j = 0; j < T.dim; ++j)
          for (int b = 0; b < T.m; ++b)
            dev = std::max(dev, std::abs(T(i, a, j, b) - T(a, i, j, b)));
  }
  T.symmetry_deviation = dev;
  auto [lo, hi] = voigt_extremes(T.dim, T.m, T.entries);
  T.ell_lo = lo;
  T.ell_hi = hi;
}

}  // namespace detail

/// Plain cell average A-bar.
inline EffectiveTensor average(const CoefficientField& A) {
  EffectiveTensor T;
  T.dim = A.dim();
  T.m = A.m();
  T.entries = A.mean_tensor();
  T.provenance = "average";
  detail::certify(T);
  return T;
}

/// Effective tensor from a solved corrector bundle:
///   entries = cell average of A + A grad(chi^lambda).
inline EffectiveTensor homogenize_with(const CoefficientField& A,
                                       const CorrectorBundle& bundle) {
  const int d = A.dim(), m = A.m(), dm = d * m;
  EffectiveTensor T;
  T.dim = d;
  T.m = m;
  T.entries = A.mean_tensor();
  for (int j = 0; j < d; ++j)
    for (int b = 0; b < m; ++b) {
      PeriodicField Ag =
          A.apply_to_gradient(torus::grad(bundle.column(j, b)));
      for (int a = 0; a < m; ++a)
        for (int i = 0; i < d; ++i)
          T.entries[std::size_t(i * m + a) * dm + (j * m + b)] +=
              Ag.mean(a * d + i);
    }
  T.provenance = "lambda=" + std::to_string(bundle.lambda);
  detail::certify(T);
  return T;
}

inline EffectiveTensor homogenize(const CoefficientField& A, double lambda,
                                  double tol = 1e-9) {
  return homogenize_with(A, cell::solve_corrector(A, lambda, tol));
}

/// The limit tensor selected by rho = lim kappa/eps: the plain average for
/// rho = infinity, the lambda = rho effective tensor otherwise (including
/// the classical rho = 0 tensor).
inline EffectiveTensor effective_limit(const CoefficientField& A, double rho,
                                       double tol = 1e-9) {
  if (std::isinf(rho)) return average(A);
  if (!(rho >= 0.0)) throw ShapeMismatch("effective_limit: rho must be >= 0");
  EffectiveTensor T = homogenize(A, rho, tol);
  T.provenance = "rho=" + std::to_string(rho);
  return T;
}

/// Flux discrepancy field B and its antisymmetric potential.
/// Component layouts (matching torus::div over the trailing axis):
///   B:   comp ((j*m+b)*m + a)*d + i            = B_{ij}^{ab}
///   pot: comp ((((j*m+b)*m + a)*d + i))*d + k  = pot_{kij}^{ab}
struct FluxBundle {
  PeriodicField B;
  PeriodicField pot;
  double mean_abs_B = 0.0;    // max |mean B entry|
  double div_B_norm = 0.0;    // L2 of the d-divergence of B over i
  double pot_recon_err = 0.0; // || d_k pot_kij - B_ij ||_L2
  double antisym_err = 0.0;   // max |pot_kij + pot_ikj|
};

inline FluxBundle flux(const CoefficientField& A, double lambda,
                       const CorrectorBundle& bundle,
                       const EffectiveTensor& Ahat) {
  const int d = A.dim(), m = A.m();
  const int ncols = d * m * m;  // (j,b,a) combinations
  const int n = A.n();
  FluxBundle F{PeriodicField(d, n, ncols * d), PeriodicField(d, n, ncols * d * d)};
  const std::size_t ns = F.B.nodes();
  auto& Bd = F.B.mutable_data();

  for (int j = 0; j < d; ++j)
    for (int b = 0; b < m; ++b) {
      const PeriodicField& chi = bundle.column(j, b);
      PeriodicField gl = torus::grad(torus::laplacian(chi));  // (a,i) = a*d+i
      PeriodicField Ag = A.apply_to_gradient(torus::grad(chi));
      const double l2 = lambda * lambda;
      for (int a = 0; a < m; ++a)
        for (int i = 0; i < d; ++i) {
          int c = ((j * m + b) * m + a) * d + i;
          double* out = Bd.data() + std::size_t(c) * ns;
          const double* g1 = gl.data().data() + std::size_t(a * d + i) * ns;
          const double* g2 = Ag.data().data() + std::size_t(a * d + i) * ns;
          const double ahat = Ahat(i, a, j, b);
          for (std::size_t g = 0; g < ns; ++g)
            out[g] = l2 * g1[g] - g2[g] - A.value(g, i, a, j, b) + ahat;
        }
    }

  for (int c = 0; c < ncols * d; ++c)
    F.mean_abs_B = std::max(F.mean_abs_B, std::abs(F.B.mean(c)));
  PeriodicField divB = torus::div(F.B);
  F.div_B_norm = torus::norm(divB, NormKind::L2);
  if (F.div_B_norm > 1e-6)
    throw DivergenceNotZero("flux: div B too large (unconverged corrector?)");

  // f_{ij} = Delta^{-1} B_{ij} on mean-zero fields, pot_{kij} = d_k f_ij - d_i f_kj
  PeriodicField f = torus::detail::apply_even_symbol(
      F.B, [](double k2) { return k2 == 0.0 ? 0.0 : -1.0 / k2; });
  PeriodicField gf = torus::grad(f);  // comp (c, k) = c*d + k, c = col*d + i
  auto& Pd = F.pot.mutable_data();
  for (int col = 0; col < ncols; ++col)
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k) {
        double* out = Pd.data() + std::size_t((col * d + i) * d + k) * ns;
        const double* dk_fi =
            gf.data().data() + std::size_t((col * d + i) * d + k) * ns;
        const double* di_fk =
            gf.data().data() + std::size_t((col * d + k) * d + i) * ns;
        for (std::size_t g = 0; g < ns; ++g) out[g] = dk_fi[g] - di_fk[g];
      }

  // checks: reconstruction d_k pot_kij = B_ij and antisymmetry in (k,i)
  PeriodicField recon = torus::div(F.pot);
  double err2 = 0.0;
  for (std::size_t idx = 0; idx < recon.data().size(); ++idx) {
    double e = recon.data()[idx] - F.B.data()[idx];
    err2 += e * e;
  }
  F.pot_recon_err = std::sqrt(err2 / double(ns));
  for (int col = 0; col < ncols; ++col)
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k) {
        const double* p1 = Pd.data() + std::size_t((col * d + i) * d + k) * ns;
        const double* p2 = Pd.data() + std::size_t((col * d + k) * d + i) * ns;
        for (std::size_t g = 0; g < ns; ++g)
          F.antisym_err = std::max(F.antisym_err, std::abs(p1[g] + p2[g]));
      }
  return F;
}

struct ContinuityRow {
  double lambda1, lambda2, distance, ratio;  // ratio = dist / |1-(l1/l2)^2|
};

struct AsymptoticsReport {
  RateReport small_lambda;  // |Ahat^l - Ahat^0| vs l
  RateReport large_lambda;  // |Ahat^l - Abar| vs l
  std::vector<ContinuityRow> continuity;
};

/// Sweeps of the effective tensor against its two limits, with log-log fits,
/// plus the continuity ratios along adjacent lambda pairs.
inline AsymptoticsReport lambda_asymptotics(const CoefficientField& A,
                                            std::vector<double> small_list,
                                            std::vector<double> large_list,
                                            double tol = 1e-9) {
  if (!small_list.empty() && !A.lipschitz())
    throw ShapeMismatch(
        "lambda_asymptotics: small-lambda sweep needs Lipschitz metadata");
  EffectiveTensor Abar = average(A);
  EffectiveTensor A0 = homogenize(A, 0.0, tol);

  AsymptoticsReport rep;
  std::vector<double> all;
  std::vector<EffectiveTensor> tensors;
  std::vector<std::pair<double, double>> small_pts, large_pts;
  for (double l : small_list) {
    EffectiveTensor T = homogenize(A, l, tol);
    small_pts.push_back({l, T.frobenius_distance(A0)});
    all.push_back(l);
    tensors.push_back(std::move(T));
  }
  for (double l : large_list) {
    EffectiveTensor T = homogenize(A, l, tol);
    large_pts.push_back({l, T.frobenius_distance(Abar)});
    all.push_back(l);
    tensors.push_back(std::move(T));
  }
  rep.small_lambda = rates::fit_rate(std::move(small_pts), "effective_small_lambda");
  rep.large_lambda = rates::fit_rate(std::move(large_pts), "effective_large_lambda");
  for (std::size_t k = 0; k + 1 < all.size(); ++k) {
    double denom = std::abs(1.0 - (all[k] / all[k + 1]) * (all[k] / all[k + 1]));
    double dist = tensors[k].frobenius_distance(tensors[k + 1]);
    rep.continuity.push_back(
        {all[k], all[k + 1], dist,
         denom > 0.0 ? dist / denom : std::numeric_limits<double>::quiet_NaN()});
  }
  return rep;
}

}  // namespace effective
}  // namespace homog
