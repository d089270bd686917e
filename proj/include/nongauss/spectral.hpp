#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "nongauss/grid.hpp"

// Densities are recovered from characteristic functions on a padded grid of
// M = 2N nodes that extends the target grid by N/2 cells on each side. The
// conjugate frequencies are t_k = 2 pi k / (M dx), k in [-M/2, M/2).

namespace nongauss::spectral {

using complex = std::complex<double>;

namespace detail {

struct FftwFree {
  void operator()(fftw_complex* p) const noexcept { fftw_free(p); }
};
using Buffer = std::unique_ptr<fftw_complex[], FftwFree>;

inline Buffer allocate(std::size_t n) {
  return Buffer(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)));
}

// FFTW planning is not thread safe; execution with new-array execute is.
// Plans are made once per (size, sign) on fftw_malloc'd buffers, so every
// later buffer has the same alignment and results are bit-reproducible.
inline fftw_plan plan_for(std::size_t n, int sign) {
  static std::mutex mutex;
  static std::map<std::pair<std::size_t, int>, fftw_plan> plans;
  std::lock_guard lock(mutex);
  auto it = plans.find({n, sign});
  if (it != plans.end()) return it->second;
  Buffer in = allocate(n);
  Buffer out = allocate(n);
  fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), in.get(), out.get(), sign,
                                    FFTW_ESTIMATE);
  plans.emplace(std::pair{n, sign}, plan);
  return plan;
}

inline void execute(std::size_t n, int sign, fftw_complex* in, fftw_complex* out) {
  fftw_execute_dft(plan_for(n, sign), in, out);
}

}  // namespace detail

inline std::size_t padded_size(const GridSpec& spec) { return 2 * spec.points(); }

inline double frequency(const GridSpec& spec, long k) {
  return 2.0 * std::numbers::pi * static_cast<double>(k) /
         (static_cast<double>(padded_size(spec)) * spec.spacing());
}

/// Function values on the target grid plus the signed mass the inversion
/// put on the padding outside [-L, L].
struct Rendered {
  std::vector<double> values;
  double outside_mass = 0.0;
};

/// Transform samples indexed by k + M/2, k in [-M/2, M/2), back to the grid.
inline Rendered render_spectrum(const GridSpec& spec, const std::vector<complex>& spectrum) {
  const std::size_t n = spec.points();
  const std::size_t m = padded_size(spec);
  const long half = static_cast<long>(m / 2);
  auto in = detail::allocate(m);
  auto out = detail::allocate(m);
  const double scale = 1.0 / (static_cast<double>(m) * spec.spacing());
  for (long k = -half; k < half; ++k) {
    // exp(-i t_k y_0) with y_0 = -L - (N/2) dx reduces to (-1)^k exp(-i pi k / M).
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    const complex phase =
        sign * std::polar(1.0, -std::numbers::pi * static_cast<double>(k) / static_cast<double>(m));
    const complex c = spectrum[static_cast<std::size_t>(k + half)] * phase * scale;
    const std::size_t slot = static_cast<std::size_t>((k + static_cast<long>(m)) % static_cast<long>(m));
    in[slot][0] = c.real();
    in[slot][1] = c.imag();
  }
  detail::execute(m, FFTW_FORWARD, in.get(), out.get());

  Rendered r;
  r.values.resize(n);
  const std::size_t offset = n / 2;
  long double outside = 0.0L;
  for (std::size_t j = 0; j < m; ++j) {
    const double v = out[j][0];
    if (j >= offset && j < offset + n) {
      r.values[j - offset] = v;
    } else {
      outside += static_cast<long double>(v) * spec.spacing();
    }
  }
  r.outside_mass = static_cast<double>(outside);
  return r;
}

/// Samples a characteristic-function-like transform on the conjugate axis.
/// Only t >= 0 is evaluated; negative frequencies use Hermitian symmetry.
template <class Cf>
std::vector<complex> sample_transform(const GridSpec& spec, Cf&& cf) {
  const std::size_t m = padded_size(spec);
  const long half = static_cast<long>(m / 2);
  std::vector<complex> spectrum(m);
  for (long k = 0; k < half; ++k) {
    const complex v = cf(frequency(spec, k));
    spectrum[static_cast<std::size_t>(k + half)] = v;
    if (k > 0) spectrum[static_cast<std::size_t>(half - k)] = std::conj(v);
  }
  spectrum[0] = complex(cf(frequency(spec, half)).real(), 0.0);
  return spectrum;
}

/// Low-pass window: 1 up to half the Nyquist frequency, then a C-infinity
/// step down to 0 at Nyquist. Being flat at the origin it leaves every moment
/// of the rendered density unchanged, and it keeps the ringing of non-smooth
/// densities local instead of spreading it over the whole grid.
inline double window(const GridSpec& spec, double t) {
  const double nyquist = std::numbers::pi / spec.spacing();
  const double u = (std::abs(t) - 0.5 * nyquist) / (0.5 * nyquist);
  if (u <= 0.0) return 1.0;
  if (u >= 1.0) return 0.0;
  const double rise = std::exp(-1.0 / u);
  const double fall = std::exp(-1.0 / (1.0 - u));
  return fall / (rise + fall);
}

/// Inverse transform of t -> cf(t) sampled on the grid nodes, low-pass
/// windowed.
template <class Cf>
Rendered render(const GridSpec& spec, Cf&& cf) {
  return render_spectrum(spec, sample_transform(spec, [&](double t) {
                           const double w = window(spec, t);
                           return w == 0.0 ? complex(0.0, 0.0) : w * cf(t);
                         }));
}

/// Trapezoid approximation of E[exp(i t_k X)] for a grid density at every
/// conjugate frequency, indexed like render_spectrum's input.
inline std::vector<complex> grid_transform(const DensityGrid& f) {
  const GridSpec& spec = f.spec();
  const std::size_t n = spec.points();
  const std::size_t m = padded_size(spec);
  const long half = static_cast<long>(m / 2);
  auto in = detail::allocate(m);
  auto out = detail::allocate(m);
  for (std::size_t j = 0; j < m; ++j) {
    in[j][0] = j < n ? spec.trapezoid_weight(j) * f[j] : 0.0;
    in[j][1] = 0.0;
  }
  detail::execute(m, FFTW_BACKWARD, in.get(), out.get());
  std::vector<complex> spectrum(m);
  for (long k = -half; k < half; ++k) {
    const std::size_t slot = static_cast<std::size_t>((k + static_cast<long>(m)) % static_cast<long>(m));
    // x_j = -L + j dx, so exp(i t_k x_j) = exp(-i t_k L) exp(2 pi i k j / M).
    const long cycles = (k * static_cast<long>(n - 1)) % static_cast<long>(2 * m);
    const double t_l = std::numbers::pi * static_cast<double>(cycles) / static_cast<double>(m);
    spectrum[static_cast<std::size_t>(k + half)] =
        complex(out[slot][0], out[slot][1]) * std::polar(1.0, -t_l);
  }
  return spectrum;
}

}  // namespace nongauss::spectral
