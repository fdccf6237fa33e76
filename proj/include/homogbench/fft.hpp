#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <vector>

#include "homogbench/common.hpp"

namespace homog::fft {

// FFTW planning is not thread safe; execution on distinct buffers via the
// *_dft_* "new array" interface is. All plans are created under a global
// mutex and cached per (dim, n, direction).

namespace detail {

inline std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

struct PlanKey {
  int dim, n, forward;
  bool operator<(const PlanKey& o) const {
    if (dim != o.dim) return dim < o.dim;
    if (n != o.n) return n < o.n;
    return forward < o.forward;
  }
};

inline fftw_plan get_plan(int dim, int n, bool forward) {
  static std::map<PlanKey, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(plan_mutex());
  PlanKey key{dim, n, forward ? 1 : 0};
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  const std::size_t nreal = dim == 1 ? std::size_t(n) : std::size_t(n) * n;
  const std::size_t ncplx =
      dim == 1 ? std::size_t(n / 2 + 1) : std::size_t(n) * (n / 2 + 1);
  std::vector<double> re(nreal);
  std::vector<std::complex<double>> sp(ncplx);
  fftw_plan p;
  auto* c = reinterpret_cast<fftw_complex*>(sp.data());
  if (dim == 1) {
    p = forward ? fftw_plan_dft_r2c_1d(n, re.data(), c, FFTW_ESTIMATE)
                : fftw_plan_dft_c2r_1d(n, c, re.data(), FFTW_ESTIMATE);
  } else {
    p = forward ? fftw_plan_dft_r2c_2d(n, n, re.data(), c, FFTW_ESTIMATE)
                : fftw_plan_dft_c2r_2d(n, n, c, re.data(), FFTW_ESTIMATE);
  }
  cache.emplace(key, p);
  return p;
}

}  // namespace detail

inline std::size_t spectral_size(int dim, int n) {
  return dim == 1 ? std::size_t(n / 2 + 1) : std::size_t(n) * (n / 2 + 1);
}

inline std::size_t nodal_size(int dim, int n) {
  return dim == 1 ? std::size_t(n) : std::size_t(n) * n;
}

/// Real-to-complex transform (unnormalized, FFTW convention).
inline void forward(int dim, int n, const double* in,
                    std::complex<double>* out) {
  fftw_plan p = detail::get_plan(dim, n, true);
  std::vector<double> tmp(in, in + nodal_size(dim, n));
  fftw_execute_dft_r2c(p, tmp.data(), reinterpret_cast<fftw_complex*>(out));
}

/// Complex-to-real inverse; divides by n^dim so inverse(forward(f)) == f.
inline void inverse(int dim, int n, const std::complex<double>* in,
                    double* out) {
  fftw_plan p = detail::get_plan(dim, n, false);
  std::vector<std::complex<double>> tmp(in, in + spectral_size(dim, n));
  fftw_execute_dft_c2r(p, reinterpret_cast<fftw_complex*>(tmp.data()), out);
  const double scale = 1.0 / double(nodal_size(dim, n));
  for (std::size_t i = 0; i < nodal_size(dim, n); ++i) out[i] *= scale;
}

/// Signed integer frequency of r2c index along a full axis of length n.
inline int freq(int idx, int n) { return idx <= n / 2 ? idx : idx - n; }

}  // namespace homog::fft
