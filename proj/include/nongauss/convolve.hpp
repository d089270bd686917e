#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "nongauss/distribution.hpp"
#include "nongauss/grid.hpp"
#include "nongauss/spectral.hpp"

namespace nongauss {

/// Signed spectral mass allowed to land outside [-L, L] before a rendered
/// density is rejected as aliased.
inline constexpr double kAliasTolerance = 1e-10;

namespace detail {

inline complex ipow(complex z, unsigned n) {
  complex out(1.0, 0.0);
  while (n > 0) {
    if (n & 1u) out *= z;
    n >>= 1u;
    if (n > 0) z *= z;
  }
  return out;
}

}  // namespace detail

/// Law of S_n = n^{-1/2} (X_1 + ... + X_n) for i.i.d. X_i, described through
/// its characteristic function.
class NormalizedSum {
 public:
  NormalizedSum(SourceDistribution base, int n) : base_(std::move(base)), n_(n) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
    root_n_ = std::sqrt(static_cast<double>(n));
  }

  const SourceDistribution& base() const noexcept { return base_; }
  int n() const noexcept { return n_; }

  double mean() const { return root_n_ * base_.mean(); }
  double variance() const { return base_.variance(); }
  bool has_density() const noexcept { return base_.has_density(); }
  std::vector<Atom> atoms() const { return n_ == 1 ? base_.atoms() : std::vector<Atom>{}; }
  std::string name() const { return base_.name() + "/sum" + std::to_string(n_); }

  complex cf(double t) const {
    return detail::ipow(base_.cf(t / root_n_), static_cast<unsigned>(n_));
  }

  complex cf_weighted(double t) const {
    const double u = t / root_n_;
    return root_n_ * detail::ipow(base_.cf(u), static_cast<unsigned>(n_ - 1)) *
           base_.cf_weighted(u);
  }

 private:
  SourceDistribution base_;
  int n_;
  double root_n_;
};

/// Density of S_n, obtained by inverting t -> phi(t / sqrt(n))^n. n = 1 is
/// rendered directly from the law's density.
inline DensityGrid normalized_sum_density(const SourceDistribution& dist, int n,
                                          const GridSpec& spec) {
  if (!dist.has_density()) {
    throw Error(ErrorCode::NoDensity, dist.name() + " law has no density");
  }
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
  if (std::abs(dist.mean()) > 1e-12 || std::abs(dist.variance() - 1.0) > 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "normalized sums need a standardized law");
  }
  if (n == 1) return pdf_of(dist, spec);

  const NormalizedSum sum(dist, n);
  auto rendered = spectral::render(spec, [&](double t) { return sum.cf(t); });
  if (std::abs(rendered.outside_mass) > kAliasTolerance) {
    throw Error(ErrorCode::GridTooNarrow,
                "S_" + std::to_string(n) + " puts mass " +
                    std::to_string(rendered.outside_mass) + " outside the grid");
  }
  return renormalize(spec, std::move(rendered.values));
}

/// Density of the sum of independent variables with densities f and g,
/// truncated to the common grid and renormalized.
inline DensityGrid convolve_densities(const DensityGrid& f, const DensityGrid& g) {
  if (!(f.spec() == g.spec())) {
    throw Error(ErrorCode::GridMismatch, "convolution needs a common grid");
  }
  const double dx2 = f.spec().spacing() * f.spec().spacing();
  if (f.variance() < dx2 || g.variance() < dx2) {
    throw Error(ErrorCode::DegenerateDensity,
                "operand is not resolved by the grid (point-mass like)");
  }
  auto spectrum = spectral::grid_transform(f);
  const auto other = spectral::grid_transform(g);
  for (std::size_t k = 0; k < spectrum.size(); ++k) spectrum[k] *= other[k];
  auto rendered = spectral::render_spectrum(f.spec(), spectrum);
  return renormalize(f.spec(), std::move(rendered.values));
}

}  // namespace nongauss
