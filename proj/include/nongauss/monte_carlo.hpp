#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "nongauss/distribution.hpp"
#include "nongauss/entropy.hpp"

// Sample-based estimates used as independent oracles.

namespace nongauss {

struct MonteCarloEstimate {
  double divergence;
  double entropy;
  double variance;
  std::size_t samples;
  std::size_t bins;
};

/// Histogram plug-in estimate of D from samples, with the Miller-Madow bias
/// correction on the entropy.
inline MonteCarloEstimate histogram_divergence(const std::vector<double>& x, std::size_t bins) {
  if (x.size() < 2 || bins < 2) {
    throw Error(ErrorCode::InvalidArgument, "need at least two samples and two bins");
  }
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it;
  const double width = (*hi_it - lo) / static_cast<double>(bins);
  if (!(width > 0.0)) throw Error(ErrorCode::DegenerateDensity, "samples are constant");

  std::vector<std::size_t> count(bins, 0);
  long double sum = 0.0L;
  long double sum2 = 0.0L;
  for (double v : x) {
    auto k = static_cast<std::size_t>((v - lo) / width);
    ++count[std::min(k, bins - 1)];
    sum += v;
    sum2 += static_cast<long double>(v) * v;
  }
  const auto n = static_cast<long double>(x.size());
  const double mean = static_cast<double>(sum / n);
  const double var = static_cast<double>((sum2 - n * mean * mean) / (n - 1));

  long double h = 0.0L;
  std::size_t occupied = 0;
  for (std::size_t c : count) {
    if (c == 0) continue;
    ++occupied;
    const long double p = c / n;
    h -= p * std::log(p / width);
  }
  h += (occupied - 1) / (2.0L * n);
  const double entropy = static_cast<double>(h);
  return {gaussian_entropy(var) - entropy, entropy, var, x.size(), bins};
}

/// D(W + sqrt(q) X) from `samples` draws of the channel.
inline MonteCarloEstimate monte_carlo_channel_divergence(const SourceDistribution& law, double q,
                                                         std::size_t samples, std::size_t bins,
                                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double rq = std::sqrt(q);
  std::vector<double> y(samples);
  for (auto& v : y) {
    const double x = law.sample(rng);
    v = noise(rng) + rq * x;
  }
  return histogram_divergence(y, bins);
}

}  // namespace nongauss
