#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <concepts>
#include <string>
#include <vector>

#include "nongauss/convolve.hpp"
#include "nongauss/distribution.hpp"
#include "nongauss/entropy.hpp"
#include "nongauss/grid.hpp"
#include "nongauss/parallel.hpp"
#include "nongauss/spectral.hpp"

// Scalar Gaussian channel Y = W + sqrt(q) X with W ~ N(0, 1) independent of X.

namespace nongauss {

/// Signal-to-noise ratio q >= 0.
class SnrValue {
 public:
  explicit SnrValue(double q) : q_(q) {
    if (!(q >= 0.0) || !std::isfinite(q)) {
      throw Error(ErrorCode::InvalidArgument, "snr must be finite and >= 0");
    }
  }
  double value() const noexcept { return q_; }
  friend auto operator<=>(const SnrValue&, const SnrValue&) = default;

 private:
  double q_;
};

/// A channel input described by its characteristic function.
template <class L>
concept ChannelLaw = requires(const L& law, double t) {
  { law.cf(t) } -> std::convertible_to<complex>;
  { law.cf_weighted(t) } -> std::convertible_to<complex>;
  { law.mean() } -> std::convertible_to<double>;
  { law.variance() } -> std::convertible_to<double>;
  { law.atoms() } -> std::convertible_to<std::vector<Atom>>;
};

struct ChannelPoint {
  SnrValue q;
  DensityGrid output_density;
  NonGaussianness divergence;
};

/// MMSE of the input, of its Gaussian counterpart, and D(q) over an SNR grid.
struct MmseCurve {
  std::vector<double> q;
  std::vector<double> mmse_x;
  std::vector<double> mmse_gaussian;
  std::vector<double> divergence;
};

/// |lhs - rhs| against a fixed tolerance.
struct IdentityCheck {
  double lhs;
  double rhs;
  double residual;
  double tolerance;
  bool passed;
};

inline constexpr double kImmseTolerance = 1e-4;
inline constexpr double kCmmseTolerance = 5e-4;

inline double gaussian_mmse(double variance, double q) {
  return variance / (1.0 + q * variance);
}

/// Geometric grid from 1e-3 to 1e2 (40 points) preceded by q = 0.
inline std::vector<double> default_snr_grid() {
  std::vector<double> q{0.0};
  for (int k = 0; k < 40; ++k) q.push_back(std::pow(10.0, -3.0 + 5.0 * k / 39.0));
  return q;
}

/// Centered finite-difference step used by the derivative identity.
inline double default_fd_step(double q) { return std::max(1e-3, q / 100.0); }

namespace detail {

// Density of the standardized output (W + sqrt(q) X) / s, s^2 = 1 + q var,
// together with g(y) = E[X; Y in dy] / dy on the same nodes. Divergence and
// conditional means are invariant under the rescaling, so one grid serves
// every q.
struct StandardizedOutput {
  std::vector<double> density;
  std::vector<double> weighted;
  GridSpec spec;
  double second_moment;  // E[X^2]
};

template <ChannelLaw L>
StandardizedOutput standardized_output(const L& law, double q, const GridSpec& spec,
                                       bool with_weighted) {
  const double var = law.variance();
  const double s = std::sqrt(1.0 + q * var);
  const double rq = std::sqrt(q);
  const double m = law.mean();
  StandardizedOutput out{{}, {}, spec, var + m * m};

  const auto atoms = law.atoms();
  if (!atoms.empty()) {
    out.density.assign(spec.points(), 0.0);
    if (with_weighted) out.weighted.assign(spec.points(), 0.0);
    for (std::size_t j = 0; j < spec.points(); ++j) {
      const double y = s * spec.node(j);
      for (const auto& a : atoms) {
        const double k = a.probability * s * detail::normal_pdf(y - rq * a.location);
        out.density[j] += k;
        if (with_weighted) out.weighted[j] += a.location * k;
      }
    }
    double tail = 0.0;
    for (const auto& a : atoms) {
      const double c = rq * a.location / s;
      tail += a.probability * (detail::normal_upper(s * (spec.half_width() - c)) +
                               detail::normal_upper(s * (spec.half_width() + c)));
    }
    if (tail > 1e-12) {
      throw Error(ErrorCode::GridTooNarrow, "channel output tail outside the grid");
    }
    return out;
  }

  const double inv_var = 1.0 / (s * s);
  auto density = spectral::render(spec, [&](double t) {
    return std::exp(-0.5 * t * t * inv_var) * complex(law.cf(rq * t / s));
  });
  if (std::abs(density.outside_mass) > kAliasTolerance) {
    throw Error(ErrorCode::GridTooNarrow,
                "channel output at q=" + std::to_string(q) + " leaks mass " +
                    std::to_string(density.outside_mass) + " outside the grid");
  }
  out.density = std::move(density.values);
  if (with_weighted) {
    out.weighted = spectral::render(spec, [&](double t) {
                     return std::exp(-0.5 * t * t * inv_var) *
                            complex(law.cf_weighted(rq * t / s));
                   }).values;
  }
  return out;
}

// Same quantities by direct quadrature over a sampled input density.
inline StandardizedOutput standardized_output(const DensityGrid& law, double q,
                                              const GridSpec& spec, bool with_weighted) {
  const GridSpec& in = law.spec();
  const double var = law.variance();
  const double m = law.mean();
  const double s = std::sqrt(1.0 + q * var);
  const double rq = std::sqrt(q);
  StandardizedOutput out{std::vector<double>(spec.points(), 0.0), {}, spec, var + m * m};
  if (with_weighted) out.weighted.assign(spec.points(), 0.0);
  constexpr double kReach = 9.0;
  for (std::size_t k = 0; k < spec.points(); ++k) {
    const double y = s * spec.node(k);
    std::size_t lo = 0;
    std::size_t hi = in.points();
    if (rq > 0.0) {
      const double dx = in.spacing();
      const double xlo = (y - kReach) / rq;
      const double xhi = (y + kReach) / rq;
      lo = static_cast<std::size_t>(
          std::clamp(std::floor((xlo + in.half_width()) / dx), 0.0, double(in.points())));
      hi = static_cast<std::size_t>(
          std::clamp(std::ceil((xhi + in.half_width()) / dx) + 1.0, 0.0, double(in.points())));
    }
    long double f = 0.0L;
    long double g = 0.0L;
    for (std::size_t j = lo; j < hi; ++j) {
      const double x = in.node(j);
      const long double w = in.trapezoid_weight(j) * law[j] * detail::normal_pdf(y - rq * x);
      f += w;
      g += w * x;
    }
    out.density[k] = static_cast<double>(s * f / law.mass());
    if (with_weighted) out.weighted[k] = static_cast<double>(s * g / law.mass());
  }
  const long double mass = trapezoid(spec, [&](std::size_t j) { return out.density[j]; });
  if (std::abs(1.0L - mass) > 1e-9L) {
    throw Error(ErrorCode::GridTooNarrow, "channel output does not fit the grid");
  }
  return out;
}

inline double output_mmse(const StandardizedOutput& out) {
  const double peak = *std::max_element(out.density.begin(), out.density.end());
  const double floor = 1e-13 * peak;
  const long double explained = trapezoid(out.spec, [&](std::size_t j) -> long double {
    const double f = out.density[j];
    if (f <= floor) return 0.0L;
    const long double g = out.weighted[j];
    return g * g / f;
  });
  return static_cast<double>(out.second_moment - explained);
}

inline NonGaussianness output_divergence(StandardizedOutput& out) {
  return non_gaussianness(renormalize(out.spec, std::move(out.density)));
}

}  // namespace detail

/// Density of W + sqrt(q) X on `spec`. Discrete inputs are evaluated as exact
/// Gaussian mixtures, sampled inputs by direct quadrature.
template <class L>
  requires ChannelLaw<L> || std::same_as<L, DensityGrid>
DensityGrid channel_output_density(const L& law, SnrValue q, const GridSpec& spec) {
  const double rq = std::sqrt(q.value());
  if constexpr (std::same_as<L, DensityGrid>) {
    // Unit scale: reuse the standardized machinery with s = 1 by working on
    // the output grid directly.
    std::vector<double> values(spec.points(), 0.0);
    const GridSpec& in = law.spec();
    for (std::size_t k = 0; k < spec.points(); ++k) {
      const double y = spec.node(k);
      long double f = 0.0L;
      for (std::size_t j = 0; j < in.points(); ++j) {
        const double z = y - rq * in.node(j);
        if (std::abs(z) > 9.0) continue;
        f += in.trapezoid_weight(j) * law[j] * detail::normal_pdf(z);
      }
      values[k] = static_cast<double>(f / law.mass());
    }
    const long double mass = trapezoid(spec, [&](std::size_t j) { return values[j]; });
    if (std::abs(1.0L - mass) > 1e-9L) {
      throw Error(ErrorCode::GridTooNarrow, "channel output does not fit the grid");
    }
    return renormalize(spec, std::move(values));
  } else {
    const auto atoms = law.atoms();
    if (!atoms.empty()) {
      double tail = 0.0;
      std::vector<double> values(spec.points(), 0.0);
      for (const auto& a : atoms) {
        const double c = rq * a.location;
        tail += a.probability * (detail::normal_upper(spec.half_width() - c) +
                                 detail::normal_upper(spec.half_width() + c));
        for (std::size_t j = 0; j < spec.points(); ++j) {
          values[j] += a.probability * detail::normal_pdf(spec.node(j) - c);
        }
      }
      if (tail > 1e-12) {
        throw Error(ErrorCode::GridTooNarrow, "channel output tail outside the grid");
      }
      return renormalize(spec, std::move(values));
    }
    auto rendered = spectral::render(spec, [&](double t) {
      return std::exp(-0.5 * t * t) * complex(law.cf(rq * t));
    });
    if (std::abs(rendered.outside_mass) > kAliasTolerance) {
      throw Error(ErrorCode::GridTooNarrow,
                  "grid too narrow for output variance " +
                      std::to_string(1.0 + q.value() * law.variance()));
    }
    return renormalize(spec, std::move(rendered.values));
  }
}

/// D(W + sqrt(q) X), evaluated on the standardized output.
template <class L>
NonGaussianness channel_divergence(const L& law, SnrValue q, const GridSpec& spec) {
  auto out = detail::standardized_output(law, q.value(), spec, false);
  return detail::output_divergence(out);
}

/// Output density, divergence and SNR bundled.
template <class L>
ChannelPoint channel_point(const L& law, SnrValue q, const GridSpec& spec) {
  auto out = detail::standardized_output(law, q.value(), spec, false);
  DensityGrid density = renormalize(spec, std::move(out.density));
  NonGaussianness d = non_gaussianness(density);
  return {q, std::move(density), d};
}

/// E[(X - E[X | Y])^2]; equals the input variance at q = 0.
template <class L>
double mmse(const L& law, SnrValue q, const GridSpec& spec) {
  if (q.value() == 0.0) return law.variance();
  auto out = detail::standardized_output(law, q.value(), spec, true);
  return detail::output_mmse(out);
}

/// MMSE, Gaussian-reference MMSE and divergence at each q (points run in
/// parallel and are merged by index).
template <class L>
MmseCurve divergence_curve(const L& law, const std::vector<double>& q_grid,
                           const GridSpec& spec) {
  if (!std::is_sorted(q_grid.begin(), q_grid.end())) {
    throw Error(ErrorCode::InvalidArgument, "snr grid must be ascending");
  }
  MmseCurve curve;
  curve.q = q_grid;
  curve.mmse_x.resize(q_grid.size());
  curve.mmse_gaussian.resize(q_grid.size());
  curve.divergence.resize(q_grid.size());
  const double var = law.variance();
  parallel_for(q_grid.size(), [&](std::size_t i) {
    const SnrValue q(q_grid[i]);
    auto out = detail::standardized_output(law, q.value(), spec, true);
    curve.mmse_x[i] = q.value() == 0.0 ? var : detail::output_mmse(out);
    curve.mmse_gaussian[i] = gaussian_mmse(var, q.value());
    curve.divergence[i] = detail::output_divergence(out).value;
  });
  return curve;
}

namespace detail {

inline double conditional_mean_sum(double y, double rq, std::span<const double> x,
                                   std::span<const double> weight) {
  long double num = 0.0L;
  long double den = 0.0L;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (weight[j] == 0.0) continue;
    const long double k = weight[j] * detail::normal_pdf(y - rq * x[j]);
    num += k * x[j];
    den += k;
  }
  if (!(den > static_cast<long double>(DBL_MIN))) {
    throw Error(ErrorCode::TailUnderflow,
                "observation y=" + std::to_string(y) + " has vanishing likelihood");
  }
  return static_cast<double>(num / den);
}

inline double conditional_mean_grid(double y, const DensityGrid& f, double rq) {
  std::vector<double> x(f.size());
  std::vector<double> w(f.size());
  for (std::size_t j = 0; j < f.size(); ++j) {
    x[j] = f.spec().node(j);
    w[j] = f.spec().trapezoid_weight(j) * f[j];
  }
  return conditional_mean_sum(y, rq, x, w);
}

}  // namespace detail

/// E[X | W + sqrt(q) X = y]; exact sum for discrete laws, quadrature over
/// the default grid otherwise.
inline double conditional_mean(double y, const SourceDistribution& law, SnrValue q) {
  if (!(q.value() > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "conditional mean needs q > 0");
  }
  const double rq = std::sqrt(q.value());
  const auto atoms = law.atoms();
  if (!atoms.empty()) {
    std::vector<double> x;
    std::vector<double> w;
    for (const auto& a : atoms) {
      x.push_back(a.location);
      w.push_back(a.probability);
    }
    return detail::conditional_mean_sum(y, rq, x, w);
  }
  return detail::conditional_mean_grid(y, pdf_of(law, default_grid(law)), rq);
}

inline double conditional_mean(double y, const DensityGrid& law, SnrValue q) {
  if (!(q.value() > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "conditional mean needs q > 0");
  }
  return detail::conditional_mean_grid(y, law, std::sqrt(q.value()));
}

/// Checks MMSE_G(q) - MMSE_X(q) = 2 dD/dq with a centered difference of step h.
template <class L>
IdentityCheck immse_identity_check(const L& law, SnrValue q, double h, const GridSpec& spec,
                                   double tolerance = kImmseTolerance) {
  if (!(h > 0.0) || !(q.value() > h)) {
    throw Error(ErrorCode::InvalidArgument, "derivative check needs q > h > 0");
  }
  const double gap = gaussian_mmse(law.variance(), q.value()) - mmse(law, q, spec);
  const double up = channel_divergence(law, SnrValue(q.value() + h), spec).value;
  const double down = channel_divergence(law, SnrValue(q.value() - h), spec).value;
  const double lhs = 0.5 * gap;
  const double rhs = (up - down) / (2.0 * h);
  const double residual = std::abs(lhs - rhs);
  return {lhs, rhs, residual, tolerance, residual < tolerance};
}

/// Constant-signal form of the causal identity: the SNR integral of the MMSE
/// gap over [0, Q] equals 2 D(Q).
template <class L>
IdentityCheck cmmse_identity_check(const L& law, SnrValue big_q, const GridSpec& spec,
                                   double tolerance = kCmmseTolerance) {
  if (!(big_q.value() > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "integral check needs Q > 0");
  }
  const double var = law.variance();
  auto m = [&](double s) { return s <= 0.0 ? var : mmse(law, SnrValue(s), spec); };
  double error = 0.0;
  const double lhs = std::log1p(big_q.value() * var) -
                     boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
                         m, 0.0, big_q.value(), 12, 1e-10, &error);
  const double rhs = 2.0 * channel_divergence(law, big_q, spec).value;
  const double residual = std::abs(lhs - rhs);
  return {lhs, rhs, residual, tolerance, residual < tolerance};
}

}  // namespace nongauss
