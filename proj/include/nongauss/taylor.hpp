#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string_view>
#include <utility>
#include <vector>

#include "nongauss/channel.hpp"
#include "nongauss/parallel.hpp"

// Estimates of the curvature at q = 0 of q -> D(W + sqrt(q) X).

namespace nongauss {

enum class TaylorMethod { RatioExtrapolation, MmseGapSlope };

inline std::string_view to_string(TaylorMethod m) {
  return m == TaylorMethod::RatioExtrapolation ? "ratio_extrapolation" : "mmse_gap_slope";
}

/// Divergences and MMSE gaps below this level are treated as numerical zero.
inline constexpr double kNoiseFloor = 1e-10;

/// Assumed absolute accuracy of a single divergence or MMSE evaluation on a
/// default grid, propagated into the reported uncertainties.
inline constexpr double kEvaluationNoise = 1e-12;

struct TaylorEstimate {
  double value = 0.0;
  double uncertainty = 0.0;
  // (q, 2 D(q) / q^2) for the ratio method, (q, mmse gap) for the slope method;
  // q strictly decreasing.
  std::vector<std::pair<double, double>> ladder;
  TaylorMethod method = TaylorMethod::RatioExtrapolation;
  bool noise_floor = false;
  std::size_t points_used = 0;
};

/// q0, q0/2, ..., q0/2^(levels-1).
inline std::vector<double> snr_ladder(SnrValue q0, int levels) {
  if (!(q0.value() > 0.0)) throw Error(ErrorCode::InvalidArgument, "ladder needs q0 > 0");
  if (levels < 3) throw Error(ErrorCode::InvalidArgument, "ladder needs at least 3 levels");
  std::vector<double> q(static_cast<std::size_t>(levels));
  for (int k = 0; k < levels; ++k) q[k] = std::ldexp(q0.value(), -k);
  return q;
}

namespace detail {

// Richardson table for a sequence sampled at h, h/2, h/4, ... whose error
// expands in integer powers of h. Returns the last two diagonal entries.
inline std::pair<double, double> richardson(const std::vector<double>& r) {
  std::vector<std::vector<double>> t(r.size());
  for (std::size_t k = 0; k < r.size(); ++k) {
    t[k].push_back(r[k]);
    for (std::size_t j = 1; j <= k; ++j) {
      const double f = std::ldexp(1.0, static_cast<int>(j)) - 1.0;
      t[k].push_back(t[k][j - 1] + (t[k][j - 1] - t[k - 1][j - 1]) / f);
    }
  }
  const std::size_t m = r.size();
  return {t[m - 1][m - 1], t[m - 2][m - 2]};
}

// Sum of |d extrapolant / d r_k| * noise_k.
inline double richardson_noise(const std::vector<double>& noise) {
  double total = 0.0;
  for (std::size_t k = 0; k < noise.size(); ++k) {
    std::vector<double> unit(noise.size(), 0.0);
    unit[k] = 1.0;
    total += std::abs(richardson(unit).first) * noise[k];
  }
  return total;
}

}  // namespace detail

/// Richardson extrapolation of r(q) = 2 D(q) / q^2 along a halving ladder.
/// Ladder points with D below the noise floor are dropped; fewer than three
/// usable points yields value 0 with the noise-floor flag.
template <class L>
TaylorEstimate second_derivative_at_zero(const L& law, SnrValue q0, int levels,
                                         const GridSpec& spec) {
  const auto q = snr_ladder(q0, levels);
  std::vector<double> d(q.size());
  parallel_for(q.size(), [&](std::size_t k) {
    d[k] = channel_divergence(law, SnrValue(q[k]), spec).value;
  });

  TaylorEstimate est;
  est.method = TaylorMethod::RatioExtrapolation;
  std::vector<double> r;
  std::vector<double> noise;
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double ratio = 2.0 * d[k] / (q[k] * q[k]);
    est.ladder.emplace_back(q[k], ratio);
    if (d[k] >= kNoiseFloor) {
      r.push_back(ratio);
      noise.push_back(2.0 * kEvaluationNoise / (q[k] * q[k]));
    }
  }
  est.points_used = r.size();
  if (r.size() < 3) {
    est.noise_floor = true;
    return est;
  }
  const auto [last, previous] = detail::richardson(r);
  est.value = last;
  est.uncertainty = std::abs(last - previous) + detail::richardson_noise(noise);
  return est;
}

/// Half the slope at q = 0 of the MMSE gap, from a least-squares fit of
/// gap(q) = b1 q + ... + bK q^K through the origin on the ladder, with K one
/// less than the number of usable points. The uncertainty combines the change
/// of b1 under lower-order variants, the fit standard error and propagated
/// evaluation noise.
template <class L>
TaylorEstimate mmse_gap_slope(const L& law, SnrValue q0, int levels, const GridSpec& spec) {
  const auto q = snr_ladder(q0, levels);
  const double var = law.variance();
  std::vector<double> gap(q.size());
  parallel_for(q.size(), [&](std::size_t k) {
    gap[k] = gaussian_mmse(var, q[k]) - mmse(law, SnrValue(q[k]), spec);
  });

  TaylorEstimate est;
  est.method = TaylorMethod::MmseGapSlope;
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t k = 0; k < q.size(); ++k) {
    est.ladder.emplace_back(q[k], gap[k]);
    if (gap[k] >= kNoiseFloor) {
      x.push_back(q[k]);
      y.push_back(gap[k]);
    }
  }
  est.points_used = x.size();
  if (x.size() < 3) {
    est.noise_floor = true;
    return est;
  }

  auto fit = [&](std::size_t first, int terms, double* stderr_b1, double* noise_b1) {
    const auto m = static_cast<Eigen::Index>(x.size() - first);
    Eigen::MatrixXd a(m, terms);
    Eigen::VectorXd b(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (int j = 0; j < terms; ++j) a(i, j) = std::pow(x[first + i], j + 1);
      b(i) = y[first + i];
    }
    const Eigen::MatrixXd pinv = a.completeOrthogonalDecomposition().pseudoInverse();
    const Eigen::VectorXd coef = pinv * b;
    if (stderr_b1) {
      const Eigen::Index dof = m - terms;
      double se = 0.0;
      if (dof > 0) {
        const double s2 = (a * coef - b).squaredNorm() / static_cast<double>(dof);
        se = std::sqrt(s2 * (pinv * pinv.transpose())(0, 0));
      }
      *stderr_b1 = se;
    }
    if (noise_b1) *noise_b1 = pinv.row(0).cwiseAbs().sum() * kEvaluationNoise;
    return coef(0);
  };

  // Truncation error is judged from lower-order variants: dropping the top
  // term, and refitting after dropping the largest q values one at a time.
  const int terms = static_cast<int>(x.size()) - 1;
  double se = 0.0;
  double noise = 0.0;
  const double b1 = fit(0, terms, &se, &noise);
  double spread = std::abs(b1 - fit(0, terms - 1, nullptr, nullptr));
  for (std::size_t first = 1; x.size() - first >= 3; ++first) {
    const int t = static_cast<int>(x.size() - first) - 1;
    spread = std::max(spread, std::abs(b1 - fit(first, t, nullptr, nullptr)));
  }
  est.value = 0.5 * b1;
  est.uncertainty = 0.5 * (spread + se + noise);
  return est;
}

/// |a - b| within the summed uncertainties.
inline bool estimates_agree(const TaylorEstimate& a, const TaylorEstimate& b) {
  return std::abs(a.value - b.value) <= a.uncertainty + b.uncertainty;
}

}  // namespace nongauss
