#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nongauss/error.hpp"

namespace nongauss {

/// Uniform grid on [-L, L] with N nodes, both endpoints included.
class GridSpec {
 public:
  static constexpr std::size_t kMinPoints = 256;
  static constexpr std::size_t kDefaultPoints = std::size_t{1} << 14;

  GridSpec(double half_width, std::size_t points)
      : half_width_(half_width), points_(points) {
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
      throw Error(ErrorCode::InvalidArgument,
                  "grid half width must be positive and finite");
    }
    if (points < kMinPoints || (points & (points - 1)) != 0) {
      throw Error(ErrorCode::InvalidArgument,
                  "grid points must be a power of two >= 256, got " +
                      std::to_string(points));
    }
  }

  double half_width() const noexcept { return half_width_; }
  std::size_t points() const noexcept { return points_; }
  double spacing() const noexcept {
    return 2.0 * half_width_ / static_cast<double>(points_ - 1);
  }

  // Written as an odd multiple of L/(N-1) so that node(j) == -node(N-1-j)
  // holds bit for bit.
  double node(std::size_t j) const noexcept {
    const double odd = 2.0 * static_cast<double>(j) -
                       static_cast<double>(points_ - 1);
    return odd * half_width_ / static_cast<double>(points_ - 1);
  }

  double trapezoid_weight(std::size_t j) const noexcept {
    return (j == 0 || j + 1 == points_) ? 0.5 * spacing() : spacing();
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  double half_width_;
  std::size_t points_;
};

/// Trapezoid sum of fn(j) over the grid, accumulated in long double.
template <class Fn>
long double trapezoid(const GridSpec& spec, Fn&& fn) {
  long double sum = 0.0L;
  for (std::size_t j = 0; j < spec.points(); ++j) {
    sum += static_cast<long double>(spec.trapezoid_weight(j)) *
           static_cast<long double>(fn(j));
  }
  return sum;
}

/// A nonnegative density sampled on a GridSpec with cached trapezoid moments.
class DensityGrid {
 public:
  /// Clipped mass above this level marks the grid as numerically degraded.
  static constexpr double kDegradationThreshold = 1e-6;

  DensityGrid(GridSpec spec, std::vector<double> values)
      : spec_(spec), values_(std::move(values)) {
    if (values_.size() != spec_.points()) {
      throw Error(ErrorCode::GridMismatch,
                  "value count does not match grid points");
    }
    for (double v : values_) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw Error(ErrorCode::InvalidArgument,
                    "density values must be finite and nonnegative");
      }
    }
    compute_moments();
  }

  const GridSpec& spec() const noexcept { return spec_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t j) const noexcept { return values_[j]; }
  std::size_t size() const noexcept { return values_.size(); }

  double mass() const noexcept { return mass_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return variance_; }

  /// Negative mass removed by renormalize(); zero for directly built grids.
  double clipped_mass() const noexcept { return clipped_mass_; }
  bool degraded() const noexcept {
    return clipped_mass_ > kDegradationThreshold;
  }

  friend DensityGrid renormalize(const GridSpec& spec,
                                 std::vector<double> raw);

 private:
  void compute_moments() {
    const long double m0 = trapezoid(spec_, [&](std::size_t j) { return values_[j]; });
    mass_ = static_cast<double>(m0);
    if (!(m0 > 0.0L)) {
      mean_ = 0.0;
      variance_ = 0.0;
      return;
    }
    const long double m1 = trapezoid(spec_, [&](std::size_t j) {
      return static_cast<long double>(spec_.node(j)) * values_[j];
    });
    const long double mu = m1 / m0;
    const long double m2 = trapezoid(spec_, [&](std::size_t j) {
      const long double d = spec_.node(j) - mu;
      return d * d * values_[j];
    });
    mean_ = static_cast<double>(mu);
    variance_ = static_cast<double>(m2 / m0);
  }

  GridSpec spec_;
  std::vector<double> values_;
  double mass_ = 0.0;
  double mean_ = 0.0;
  double variance_ = 0.0;
  double clipped_mass_ = 0.0;
};

/// Clips negative samples (spectral ringing) to zero and rescales to unit
/// trapezoid mass. The removed mass is kept on the result.
inline DensityGrid renormalize(const GridSpec& spec, std::vector<double> raw) {
  if (raw.size() != spec.points()) {
    throw Error(ErrorCode::GridMismatch, "value count does not match grid points");
  }
  long double clipped = 0.0L;
  for (std::size_t j = 0; j < raw.size(); ++j) {
    if (!std::isfinite(raw[j])) {
      throw Error(ErrorCode::InvalidArgument, "non-finite density sample");
    }
    if (raw[j] < 0.0) {
      clipped -= static_cast<long double>(spec.trapezoid_weight(j)) * raw[j];
      raw[j] = 0.0;
    }
  }
  const long double mass =
      trapezoid(spec, [&](std::size_t j) { return raw[j]; });
  if (!(mass > 0.0L)) {
    throw Error(ErrorCode::ZeroMass, "cannot renormalize a grid with zero mass");
  }
  const long double scale = 1.0L / mass;
  for (double& v : raw) v = static_cast<double>(v * scale);
  DensityGrid out(spec, std::move(raw));
  out.clipped_mass_ = static_cast<double>(clipped);
  return out;
}

inline DensityGrid renormalize(const DensityGrid& f) {
  DensityGrid out = renormalize(f.spec(), {f.values().begin(), f.values().end()});
  return out;
}

/// Largest pointwise |f - g|; grids must share a spec.
inline double sup_distance(const DensityGrid& f, const DensityGrid& g) {
  if (!(f.spec() == g.spec())) {
    throw Error(ErrorCode::GridMismatch, "grids differ");
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    worst = std::max(worst, std::abs(f[j] - g[j]));
  }
  return worst;
}

}  // namespace nongauss
