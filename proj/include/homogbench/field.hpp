#pragma once

#include <algorithm>
#include <cassert>
#include <complex>
#include <functional>
#include <numeric>
#include <vector>

#include "homogbench/common.hpp"
#include "homogbench/fft.hpp"

namespace homog {

enum class NormKind { L2, H1, H2, Linf };

/// Periodic nodal field on the unit cell [0,1)^d, d in {1,2}, sampled at
/// y_g = g/n. Multi-component fields store one contiguous n^d block per
/// component. Spectral coefficients are cached lazily and invalidated on
/// mutation.
class PeriodicField {
 public:
  PeriodicField() = default;
  PeriodicField(int dim, int n, int comps)
      : dim_(dim), n_(n), comps_(comps),
        data_(std::size_t(comps) * fft::nodal_size(dim, n), 0.0) {
    if (dim < 1 || dim > 2) throw ShapeMismatch("dim must be 1 or 2");
    if (!is_power_of_two(n)) throw ShapeMismatch("n must be a power of two");
  }

  int dim() const { return dim_; }
  int n() const { return n_; }
  int comps() const { return comps_; }
  std::size_t nodes() const { return fft::nodal_size(dim_, n_); }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& mutable_data() {
    spectral_valid_ = false;
    return data_;
  }

  double operator()(std::size_t node, int c = 0) const {
    return data_[std::size_t(c) * nodes() + node];
  }

  /// Nodal coordinate of flat index `node`.
  void node_coord(std::size_t node, double* y) const {
    if (dim_ == 1) {
      y[0] = double(node) / n_;
    } else {
      y[0] = double(node / n_) / n_;
      y[1] = double(node % n_) / n_;
    }
  }

  /// Fill from a nodal function f(y, comp).
  void sample(const std::function<double(const double*, int)>& f) {
    auto& d = mutable_data();
    double y[2];
    for (int c = 0; c < comps_; ++c)
      for (std::size_t g = 0; g < nodes(); ++g) {
        node_coord(g, y);
        d[std::size_t(c) * nodes() + g] = f(y, c);
      }
  }

  const std::vector<std::complex<double>>& spectral() const {
    if (!spectral_valid_) {
      const std::size_t sz = fft::spectral_size(dim_, n_);
      spectral_.assign(std::size_t(comps_) * sz, {});
      for (int c = 0; c < comps_; ++c)
        fft::forward(dim_, n_, data_.data() + std::size_t(c) * nodes(),
                     spectral_.data() + std::size_t(c) * sz);
      spectral_valid_ = true;
    }
    return spectral_;
  }

  /// Construct from spectral coefficients (takes the inverse transform).
  static PeriodicField from_spectral(int dim, int n, int comps,
                                     const std::vector<std::complex<double>>& s) {
    PeriodicField f(dim, n, comps);
    const std::size_t sz = fft::spectral_size(dim, n);
    for (int c = 0; c < comps; ++c)
      fft::inverse(dim, n, s.data() + std::size_t(c) * sz,
                   f.data_.data() + std::size_t(c) * f.nodes());
    return f;
  }

  double mean(int c = 0) const {
    const double* p = data_.data() + std::size_t(c) * nodes();
    return std::accumulate(p, p + nodes(), 0.0) / double(nodes());
  }

 private:
  int dim_ = 1, n_ = 1, comps_ = 1;
  std::vector<double> data_;
  mutable std::vector<std::complex<double>> spectral_;
  mutable bool spectral_valid_ = false;
};

namespace torus {

namespace detail {

/// Visit every spectral mode: cb(comp, flat_index, k1, k2, multiplicity).
/// k are signed integer frequencies; multiplicity is the Parseval weight of
/// the r2c half-spectrum entry.
template <class Cb>
void for_modes(int dim, int n, int comps, Cb&& cb) {
  const std::size_t sz = fft::spectral_size(dim, n);
  for (int c = 0; c < comps; ++c) {
    if (dim == 1) {
      for (int j = 0; j <= n / 2; ++j) {
        double mult = (j == 0 || j == n / 2) ? 1.0 : 2.0;
        cb(c, std::size_t(c) * sz + j, j, 0, mult);
      }
    } else {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j <= n / 2; ++j) {
          double mult = (j == 0 || j == n / 2) ? 1.0 : 2.0;
          cb(c, std::size_t(c) * sz + std::size_t(i) * (n / 2 + 1) + j,
             fft::freq(i, n), j, mult);
        }
    }
  }
}

/// Signed frequency with the Nyquist mode dropped (odd-derivative symbol).
inline double kd(int k, int n) {
  return (k == n / 2 || k == -n / 2) ? 0.0 : double(k);
}

}  // namespace detail

/// Gradient: comps -> comps*dim, component layout (c, axis) = c*dim + axis.
inline PeriodicField grad(const PeriodicField& f) {
  const int d = f.dim(), n = f.n(), c = f.comps();
  const std::size_t sz = fft::spectral_size(d, n);
  const auto& s = f.spectral();
  std::vector<std::complex<double>> out(std::size_t(c) * d * sz);
  detail::for_modes(d, n, c, [&](int comp, std::size_t idx, int k1, int k2,
                                 double) {
    std::complex<double> v = s[idx];
    std::size_t loc = idx - std::size_t(comp) * sz;
    double ks[2] = {detail::kd(k1, n), double(k2 == n / 2 && d > 1 ? 0 : k2)};
    if (d == 1) ks[0] = detail::kd(k1, n);
    for (int ax = 0; ax < d; ++ax)
      out[(std::size_t(comp) * d + ax) * sz + loc] =
          std::complex<double>(0.0, kTwoPi * ks[ax]) * v;
  });
  return PeriodicField::from_spectral(d, n, c * d, out);
}

/// Divergence over the trailing axis index of a (c, axis) field.
inline PeriodicField div(const PeriodicField& F) {
  const int d = F.dim(), n = F.n();
  if (F.comps() % d != 0) throw ShapeMismatch("div: comps not divisible by dim");
  const int c = F.comps() / d;
  const std::size_t sz = fft::spectral_size(d, n);
  const auto& s = F.spectral();
  std::vector<std::complex<double>> out(std::size_t(c) * sz);
  detail::for_modes(d, n, c * d, [&](int comp, std::size_t idx, int k1, int k2,
                                     double) {
    int cc = comp / d, ax = comp % d;
    std::size_t loc = idx - std::size_t(comp) * sz;
    double ks[2] = {detail::kd(k1, n), double(k2 == n / 2 && d > 1 ? 0 : k2)};
    out[std::size_t(cc) * sz + loc] +=
        std::complex<double>(0.0, kTwoPi * ks[ax]) * s[idx];
  });
  return PeriodicField::from_spectral(d, n, c, out);
}

namespace detail {

inline PeriodicField apply_even_symbol(const PeriodicField& f,
                                       const std::function<double(double)>& sym) {
  const int d = f.dim(), n = f.n(), c = f.comps();
  const auto& s = f.spectral();
  std::vector<std::complex<double>> out(s.size());
  for_modes(d, n, c, [&](int, std::size_t idx, int k1, int k2, double) {
    double k2abs = kTwoPi * kTwoPi * (double(k1) * k1 + double(k2) * k2);
    out[idx] = sym(k2abs) * s[idx];
  });
  return PeriodicField::from_spectral(d, n, c, out);
}

}  // namespace detail

inline PeriodicField laplacian(const PeriodicField& f) {
  return detail::apply_even_symbol(f, [](double k2) { return -k2; });
}

inline PeriodicField bilaplacian(const PeriodicField& f) {
  return detail::apply_even_symbol(f, [](double k2) { return k2 * k2; });
}

inline PeriodicField project_mean_zero(const PeriodicField& f) {
  PeriodicField g = f;
  auto& d = g.mutable_data();
  for (int c = 0; c < f.comps(); ++c) {
    double m = f.mean(c);
    for (std::size_t i = 0; i < f.nodes(); ++i)
      d[std::size_t(c) * f.nodes() + i] -= m;
  }
  return g;
}

/// Sum over all components of the Parseval weight `w(|2pi k~|^2)` applied to
/// |f_hat|^2; Nyquist frequencies dropped, consistent with grad/div above.
inline double spectral_weighted_sq(const PeriodicField& f,
                                   const std::function<double(double)>& w) {
  const auto& s = f.spectral();
  const double norm = double(f.nodes());
  double acc = 0.0;
  // even weights see the true |k|, Nyquist included (the odd-derivative
  // Nyquist drop in detail::kd does not apply to norms)
  detail::for_modes(f.dim(), f.n(), f.comps(),
                    [&](int, std::size_t idx, int k1, int k2, double mult) {
                      double kk1 = k1, kk2 = k2;
                      double k2abs = kTwoPi * kTwoPi * (kk1 * kk1 + kk2 * kk2);
                      acc += mult * w(k2abs) * std::norm(s[idx] / norm);
                    });
  return acc;
}

inline double norm(const PeriodicField& f, NormKind kind) {
  switch (kind) {
    case NormKind::L2:
      return std::sqrt(spectral_weighted_sq(f, [](double) { return 1.0; }));
    case NormKind::H1:
      return std::sqrt(
          spectral_weighted_sq(f, [](double k2) { return 1.0 + k2; }));
    case NormKind::H2:
      return std::sqrt(spectral_weighted_sq(
          f, [](double k2) { return 1.0 + k2 + k2 * k2; }));
    case NormKind::Linf: {
      double m = 0.0;
      for (double v : f.data()) m = std::max(m, std::abs(v));
      return m;
    }
  }
  return 0.0;
}

/// Seminorm |f|_{H^m} = || grad^m f ||_{L2}, m = 1, 2, 3.
inline double seminorm(const PeriodicField& f, int order) {
  return std::sqrt(spectral_weighted_sq(f, [order](double k2) {
    double w = 1.0;
    for (int i = 0; i < order; ++i) w *= k2;
    return w;
  }));
}

/// Nodal product h = f * g for matching shapes, or scalar g broadcast.
inline PeriodicField multiply(const PeriodicField& f, const PeriodicField& g) {
  if (f.dim() != g.dim() || f.n() != g.n())
    throw ShapeMismatch("multiply: grid mismatch");
  if (g.comps() != 1 && g.comps() != f.comps())
    throw ShapeMismatch("multiply: component mismatch");
  PeriodicField h = f;
  auto& d = h.mutable_data();
  for (int c = 0; c < f.comps(); ++c) {
    int gc = g.comps() == 1 ? 0 : c;
    for (std::size_t i = 0; i < f.nodes(); ++i)
      d[std::size_t(c) * f.nodes() + i] *= g(i, gc);
  }
  return h;
}

inline PeriodicField axpy(double a, const PeriodicField& x,
                          const PeriodicField& y) {
  if (x.dim() != y.dim() || x.n() != y.n() || x.comps() != y.comps())
    throw ShapeMismatch("axpy: shape mismatch");
  PeriodicField z = y;
  auto& d = z.mutable_data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += a * x.data()[i];
  return z;
}

// ---------------------------------------------------------------------------
// Mollifier S_eps: convolution with the standard bump supported in B(0, 1/2).

/// Unnormalized bump profile on |x| < 1/2.
inline double bump_profile(double r2) {
  // r2 = |x|^2
  double q = 1.0 - 4.0 * r2;
  return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
}

namespace detail {

inline double simpson(const std::function<double(double)>& f, double a,
                      double b, int n) {
  double h = (b - a) / n, acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return acc * h / 3.0;
}

inline double adaptive(const std::function<double(double)>& f, double a,
                       double b, double tol) {
  int n = 64;
  double prev = simpson(f, a, b, n);
  for (int it = 0; it < 24; ++it) {
    n *= 2;
    double cur = simpson(f, a, b, n);
    if (std::abs(cur - prev) < tol * std::abs(cur)) return cur;
    prev = cur;
  }
  return prev;
}

}  // namespace detail

/// Normalization constant c_d with int phi = 1, phi = c_d exp(-1/(1-4|x|^2)).
inline double mollifier_normalization(int dim) {
  if (dim == 1) {
    double I = detail::adaptive([](double x) { return bump_profile(x * x); },
                                -0.5, 0.5, 1e-14);
    return 1.0 / I;
  }
  // 2D: radial, int = 2 pi int_0^{1/2} phi(r) r dr
  double I = detail::adaptive(
      [](double r) { return bump_profile(r * r) * r; }, 0.0, 0.5, 1e-14);
  return 1.0 / (kTwoPi * I);
}

/// S_eps(f): periodic convolution with the sampled mollifier, discretely
/// renormalized so constants are reproduced exactly.
inline PeriodicField smooth(const PeriodicField& f, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw EpsilonOutOfRange("smooth: eps");
  const int d = f.dim(), n = f.n();
  PeriodicField phi(d, n, 1);
  {
    auto& pd = phi.mutable_data();
    double y[2];
    for (std::size_t g = 0; g < phi.nodes(); ++g) {
      phi.node_coord(g, y);
      double r2 = 0.0;
      for (int ax = 0; ax < d; ++ax) {
        double x = y[ax] > 0.5 ? y[ax] - 1.0 : y[ax];  // min-image
        r2 += (x / eps) * (x / eps);
      }
      pd[g] = bump_profile(r2);
    }
  }
  const auto& ph = phi.spectral();
  const double phi0 = ph[0].real();
  if (phi0 <= 0.0)
    throw EpsilonOutOfRange("smooth: mollifier unresolved at this n");
  const auto& s = f.spectral();
  const std::size_t sz = fft::spectral_size(d, n);
  std::vector<std::complex<double>> out(s.size());
  for (int c = 0; c < f.comps(); ++c)
    for (std::size_t i = 0; i < sz; ++i)
      out[std::size_t(c) * sz + i] = s[std::size_t(c) * sz + i] * ph[i] / phi0;
  return PeriodicField::from_spectral(d, n, f.comps(), out);
}

// ---------------------------------------------------------------------------
// Trigonometric evaluation off the nodal grid.

/// Evaluate component c of f at an arbitrary point by direct Fourier sum.
inline double eval_trig(const PeriodicField& f, const double* y, int c = 0) {
  const int d = f.dim(), n = f.n();
  const auto& s = f.spectral();
  const std::size_t sz = fft::spectral_size(d, n);
  const double norm = double(f.nodes());
  double acc = 0.0;
  detail::for_modes(d, n, 1, [&](int, std::size_t idx, int k1, int k2,
                                 double mult) {
    double kk1 = detail::kd(k1, n);
    double kk2 = (d > 1 && k2 == n / 2) ? 0.0 : double(k2);
    double phase = kTwoPi * (kk1 * y[0] + (d > 1 ? kk2 * y[1] : 0.0));
    std::complex<double> v = s[std::size_t(c) * sz + idx] / norm;
    acc += mult * (v.real() * std::cos(phase) - v.imag() * std::sin(phase));
  });
  return acc;
}

/// Resample all components onto a uniform grid of m >= n points per axis
/// (trigonometric interpolation via zero padding). m must be a power of two.
inline PeriodicField resample(const PeriodicField& f, int m) {
  const int d = f.dim(), n = f.n();
  if (m == n) return f;
  if (m < n || !is_power_of_two(m))
    throw ShapeMismatch("resample: m must be a power of two >= n");
  const auto& s = f.spectral();
  const std::size_t szn = fft::spectral_size(d, n);
  const std::size_t szm = fft::spectral_size(d, m);
  const double scale = double(fft::nodal_size(d, m)) / double(f.nodes());
  std::vector<std::complex<double>> out(std::size_t(f.comps()) * szm);
  for (int c = 0; c < f.comps(); ++c) {
    detail::for_modes(d, n, 1, [&](int, std::size_t idx, int k1, int k2,
                                   double) {
      // drop Nyquist modes of the source grid
      if (k1 == n / 2 || k1 == -n / 2 || (d > 1 && k2 == n / 2)) return;
      std::size_t dst;
      if (d == 1) {
        dst = std::size_t(k1);  // 1D half spectrum: k1 = j >= 0
      } else {
        int i1 = k1 >= 0 ? k1 : k1 + m;
        dst = std::size_t(i1) * (m / 2 + 1) + k2;
      }
      out[std::size_t(c) * szm + dst] = s[std::size_t(c) * szn + idx] * scale;
    });
  }
  return PeriodicField::from_spectral(d, m, f.comps(), out);
}

}  // namespace torus
}  // namespace homog
