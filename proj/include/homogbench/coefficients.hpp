#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "homogbench/common.hpp"
#include "homogbench/field.hpp"

namespace homog {

struct SymmetryReport {
  double dev_transpose = 0.0;   // a_{ij}^{ab} vs a_{ji}^{ba}
  double dev_block = 0.0;       // a_{ij}^{ab} vs a_{aj}^{ib} (elasticity only)
  bool pass = false;
};

/// Periodic coefficient tensor a_{ij}^{ab}(y) sampled at y_g = g/n on the
/// unit cell. Scalar mode m=1 stores a_{ij}; elasticity mode m=d stores the
/// full rank-4 tensor. Entries are addressed by the flattened row/column
/// indices I = i*m+a, J = j*m+b of the (d*m) x (d*m) node-local matrix.
class CoefficientField {
 public:
  using Analytic = std::function<double(const double* y, int i, int a, int j,
                                        int b)>;

  CoefficientField(int dim, int m, int n)
      : dim_(dim), m_(m), n_(n),
        values_(nodes() * block() * block(), 0.0) {
    if (dim < 1 || dim > 2) throw ShapeMismatch("dim must be 1 or 2");
    if (m != 1 && m != dim) throw ShapeMismatch("m must be 1 or dim");
    if (!is_power_of_two(n)) throw ShapeMismatch("n must be a power of two");
  }

  int dim() const { return dim_; }
  int m() const { return m_; }
  int n() const { return n_; }
  int block() const { return dim_ * m_; }
  std::size_t nodes() const { return fft::nodal_size(dim_, n_); }

  double nu1() const { return nu1_; }
  double nu2() const { return nu2_; }
  std::optional<double> lipschitz() const { return lipschitz_; }
  const std::string& name() const { return name_; }
  const Analytic& analytic() const { return analytic_; }

  double value(std::size_t node, int i, int a, int j, int b) const {
    const int dm = block();
    return values_[(node * dm + (i * m_ + a)) * dm + (j * m_ + b)];
  }

  /// Build from a pointwise formula; also retained for off-grid evaluation.
  static CoefficientField from_analytic(int dim, int m, int n, Analytic f,
                                        double nu1, double nu2,
                                        std::string name,
                                        std::optional<double> lip = {}) {
    CoefficientField A(dim, m, n);
    A.analytic_ = std::move(f);
    A.nu1_ = nu1;
    A.nu2_ = nu2;
    A.name_ = std::move(name);
    A.lipschitz_ = lip;
    const int dm = A.block();
    double y[2];
    PeriodicField probe(dim, n, 1);  // coordinate helper
    for (std::size_t g = 0; g < A.nodes(); ++g) {
      probe.node_coord(g, y);
      for (int i = 0; i < dim; ++i)
        for (int a = 0; a < m; ++a)
          for (int j = 0; j < dim; ++j)
            for (int b = 0; b < m; ++b)
              A.values_[(g * dm + (i * m + a)) * dm + (j * m + b)] =
                  A.analytic_(y, i, a, j, b);
    }
    return A;
  }

  SymmetryReport validate_symmetry() const {
    SymmetryReport r;
    for (std::size_t g = 0; g < nodes(); ++g)
      for (int i = 0; i < dim_; ++i)
        for (int a = 0; a < m_; ++a)
          for (int j = 0; j < dim_; ++j)
            for (int b = 0; b < m_; ++b) {
              double v = value(g, i, a, j, b);
              r.dev_transpose =
                  std::max(r.dev_transpose, std::abs(v - value(g, j, b, i, a)));
              if (m_ == dim_ && m_ > 1)
                r.dev_block =
                    std::max(r.dev_block, std::abs(v - value(g, a, i, j, b)));
            }
    r.pass = r.dev_transpose <= 1e-12 && r.dev_block <= 1e-12;
    return r;
  }

  /// Extremal eigenvalues of the quadratic form restricted to symmetric
  /// matrices xi (Voigt reduction), min/max over nodes.
  std::pair<double, double> estimate_ellipticity() const {
    if (!validate_symmetry().pass)
      throw NonSymmetric("estimate_ellipticity: symmetry check failed");
    double lo = 1e300, hi = -1e300;
    if (m_ == 1) {
      // symmetric xi is any vector; form is the d x d matrix a_{ij}
      for (std::size_t g = 0; g < nodes(); ++g) {
        Eigen::MatrixXd M(dim_, dim_);
        for (int i = 0; i < dim_; ++i)
          for (int j = 0; j < dim_; ++j) M(i, j) = value(g, i, 0, j, 0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
        lo = std::min(lo, es.eigenvalues().minCoeff());
        hi = std::max(hi, es.eigenvalues().maxCoeff());
      }
      return {lo, hi};
    }
    // m == d == 2: orthonormal basis of symmetric 2x2 matrices
    // E1 = e11, E2 = e22, E3 = (e12 + e21)/sqrt(2); entries E[p](i,a)
    static const double E[3][2][2] = {
        {{1, 0}, {0, 0}},
        {{0, 0}, {0, 1}},
        {{0, 1.0 / std::sqrt(2.0)}, {1.0 / std::sqrt(2.0), 0}}};
    for (std::size_t g = 0; g < nodes(); ++g) {
      Eigen::Matrix3d M;
      for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q) {
          double s = 0.0;
          for (int i = 0; i < 2; ++i)
            for (int a = 0; a < 2; ++a)
              for (int j = 0; j < 2; ++j)
                for (int b = 0; b < 2; ++b)
                  s += value(g, i, a, j, b) * E[p][i][a] * E[q][j][b];
          M(p, q) = s;
        }
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(M);
      lo = std::min(lo, es.eigenvalues().minCoeff());
      hi = std::max(hi, es.eigenvalues().maxCoeff());
    }
    return {lo, hi};
  }

  /// Max over grid edges of |A(y+h e_ax) - A(y)|_F / h; lower bound for the
  /// true Lipschitz constant, converging under refinement for smooth A.
  double lipschitz_estimate() const {
    if (n_ < 4) throw GridTooCoarse("lipschitz_estimate: n >= 4 required");
    const int dm = block();
    const double h = 1.0 / n_;
    auto node_at = [&](int i0, int i1) {
      i0 = (i0 % n_ + n_) % n_;
      i1 = (i1 % n_ + n_) % n_;
      return dim_ == 1 ? std::size_t(i0) : std::size_t(i0) * n_ + i1;
    };
    double best = 0.0;
    for (int i0 = 0; i0 < n_; ++i0)
      for (int i1 = 0; i1 < (dim_ == 1 ? 1 : n_); ++i1)
        for (int ax = 0; ax < dim_; ++ax) {
          std::size_t g = node_at(i0, i1);
          std::size_t g2 = node_at(i0 + (ax == 0), i1 + (ax == 1));
          double s = 0.0;
          for (int I = 0; I < dm; ++I)
            for (int J = 0; J < dm; ++J) {
              double dv = values_[(g2 * dm + I) * dm + J] -
                          values_[(g * dm + I) * dm + J];
              s += dv * dv;
            }
          best = std::max(best, std::sqrt(s) / h);
        }
    return best;
  }

  /// (A G)_{(a,i)} = sum_{j,b} a_{ij}^{ab} G_{(b,j)} nodally, with the
  /// gradient layout of torus::grad: component (c, axis) = c*dim + axis.
  PeriodicField apply_to_gradient(const PeriodicField& G) const {
    if (G.dim() != dim_ || G.n() != n_ || G.comps() != m_ * dim_)
      throw ShapeMismatch("apply_to_gradient: shape mismatch");
    PeriodicField out(dim_, n_, m_ * dim_);
    auto& o = out.mutable_data();
    const std::size_t ns = nodes();
    for (int a = 0; a < m_; ++a)
      for (int i = 0; i < dim_; ++i)
        for (int b = 0; b < m_; ++b)
          for (int j = 0; j < dim_; ++j) {
            double* op = o.data() + std::size_t(a * dim_ + i) * ns;
            const double* gp = G.data().data() + std::size_t(b * dim_ + j) * ns;
            for (std::size_t g = 0; g < ns; ++g)
              op[g] += value(g, i, a, j, b) * gp[g];
          }
    return out;
  }

  /// Column field y -> a_{i.}^{a.} e_j^b as an (a, i) vector field; this is
  /// A applied to the constant gradient of P_j^b.
  PeriodicField column(int j, int b) const {
    PeriodicField out(dim_, n_, m_ * dim_);
    auto& o = out.mutable_data();
    const std::size_t ns = nodes();
    for (int a = 0; a < m_; ++a)
      for (int i = 0; i < dim_; ++i) {
        double* op = o.data() + std::size_t(a * dim_ + i) * ns;
        for (std::size_t g = 0; g < ns; ++g) op[g] = value(g, i, a, j, b);
      }
    return out;
  }

  /// Nodal mean of each entry; (dm) x (dm) row-major.
  std::vector<double> mean_tensor() const {
    const int dm = block();
    std::vector<double> mu(std::size_t(dm) * dm, 0.0);
    for (std::size_t g = 0; g < nodes(); ++g)
      for (int I = 0; I < dm; ++I)
        for (int J = 0; J < dm; ++J)
          mu[std::size_t(I) * dm + J] += values_[(g * dm + I) * dm + J];
    for (double& v : mu) v /= double(nodes());
    return mu;
  }

 private:
  int dim_, m_, n_;
  std::vector<double> values_;
  double nu1_ = 0.0, nu2_ = 0.0;
  std::optional<double> lipschitz_;
  std::string name_;
  Analytic analytic_;
};

namespace coefficients {

inline CoefficientField constant(double c, int dim, int m, int n) {
  return CoefficientField::from_analytic(
      dim, m, n,
      [c](const double*, int i, int a, int j, int b) {
        return (i == j && a == b) ? c : 0.0;
      },
      c, c, "CONST(" + std::to_string(c) + ")", 0.0);
}

/// Named test coefficients. Accepted: A1, A2, A3, CONST(c).
inline CoefficientField builtin(const std::string& name, int n) {
  if (name == "A1") {
    return CoefficientField::from_analytic(
        1, 1, n,
        [](const double* y, int, int, int, int) {
          return 2.0 + std::sin(kTwoPi * y[0]);
        },
        1.0, 3.0, "A1", kTwoPi);
  }
  if (name == "A2") {
    return CoefficientField::from_analytic(
        2, 1, n,
        [](const double* y, int i, int, int j, int) {
          return i == j ? 2.0 + std::sin(kTwoPi * y[0]) * std::sin(kTwoPi * y[1])
                        : 0.0;
        },
        1.0, 3.0, "A2", kTwoPi);
  }
  if (name == "A3") {
    // isotropic elasticity: lambda_L d_{ia}d_{jb} + mu (d_{ij}d^{ab} + d_{ib}d_{ja})
    auto f = [](const double* y, int i, int a, int j, int b) {
      double mu = 2.0 + std::cos(kTwoPi * y[0]) * std::cos(kTwoPi * y[1]);
      double lam = 1.0 + 0.5 * std::sin(kTwoPi * y[0]);
      double v = 0.0;
      if (i == a && j == b) v += lam;
      if (i == j && a == b) v += mu;
      if (i == b && j == a) v += mu;
      return v;
    };
    double lip = std::sqrt(2.0) * kTwoPi * 4.0;  // crude upper bound, metadata only
    return CoefficientField::from_analytic(2, 2, n, f, 2.0, 9.0, "A3", lip);
  }
  if (name.rfind("CONST(", 0) == 0 && name.back() == ')') {
    double c = std::stod(name.substr(6, name.size() - 7));
    return constant(c, 1, 1, n);
  }
  throw UnknownName("builtin: unknown coefficient '" + name + "'");
}

}  // namespace coefficients
}  // namespace homog
