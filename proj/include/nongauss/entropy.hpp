#pragma once

#include <cmath>
#include <numbers>

#include "nongauss/error.hpp"
#include "nongauss/grid.hpp"

namespace nongauss {

/// Divergence from the Gaussian with the same mean and variance, in nats.
struct NonGaussianness {
  double value;
  double entropy;
  double matched_variance;
};

/// Gaussian entropy 0.5 ln(2 pi e var) in nats.
inline double gaussian_entropy(double variance) {
  return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * variance);
}

/// Trapezoid integral of -f ln f (nats). Samples below 1e-300 count as 0.
inline double differential_entropy(const DensityGrid& f) {
  const long double mass = f.mass();
  if (!(mass > 0.0L)) throw Error(ErrorCode::ZeroMass, "entropy of an empty grid");
  const long double integral = trapezoid(f.spec(), [&](std::size_t j) -> long double {
    const double v = f[j];
    return v < 1e-300 ? 0.0L : -static_cast<long double>(v) * std::log(static_cast<long double>(v));
  });
  // Exact for unit mass; otherwise the entropy of f / mass.
  return static_cast<double>(integral / mass + std::log(mass));
}

inline NonGaussianness non_gaussianness(const DensityGrid& f) {
  const double var = f.variance();
  if (!(var > 0.0) || !std::isfinite(var)) {
    throw Error(ErrorCode::DegenerateDensity, "nonpositive measured variance");
  }
  const double h = differential_entropy(f);
  return {gaussian_entropy(var) - h, h, var};
}

}  // namespace nongauss
