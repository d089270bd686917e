#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nongauss/channel.hpp"
#include "nongauss/convolve.hpp"
#include "nongauss/entropy.hpp"
#include "nongauss/parallel.hpp"
#include "nongauss/taylor.hpp"

// Non-Gaussianness of normalized sums and its decrease rate, checked link by
// link against the Gaussian-channel bound.

namespace nongauss {

enum class Verdict { Pass, Fail, Degenerate };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Degenerate: return "DEGENERATE";
  }
  return "?";
}

inline constexpr double kChainSlack = 1e-7;
inline constexpr double kScalingTolerance = 1e-5;
inline constexpr int kMaxSumTerms = 4096;

/// D(S_n) by n.
using DivergenceSequence = std::map<int, double>;

struct SumSequence {
  DivergenceSequence divergence;
  double max_clipped_mass = 0.0;
  bool degraded() const { return max_clipped_mass > DensityGrid::kDegradationThreshold; }
};

/// 1..8, then `per_octave` log-spaced values per doubling up to n_max
/// (n_max itself always included).
inline std::vector<int> n_schedule(int n_max, int per_octave = 1) {
  if (n_max < 1 || n_max > kMaxSumTerms) {
    throw Error(ErrorCode::InvalidArgument, "n_max must lie in [1, 4096]");
  }
  if (per_octave < 1) throw Error(ErrorCode::InvalidArgument, "per_octave must be >= 1");
  std::vector<int> n;
  for (int k = 1; k <= std::min(8, n_max); ++k) n.push_back(k);
  for (int k = 1;; ++k) {
    const int v = static_cast<int>(std::lround(8.0 * std::exp2(double(k) / per_octave)));
    if (v > n_max) break;
    if (v > n.back()) n.push_back(v);
  }
  if (n.back() != n_max) n.push_back(n_max);
  return n;
}

/// D(S_n) over n_schedule(n_max, per_octave).
inline SumSequence sum_divergence_sequence(const SourceDistribution& law, int n_max,
                                           const GridSpec& spec, int per_octave = 1) {
  const auto n = n_schedule(n_max, per_octave);
  std::vector<double> d(n.size());
  std::vector<double> clipped(n.size());
  parallel_for(n.size(), [&](std::size_t i) {
    const auto f = normalized_sum_density(law, n[i], spec);
    d[i] = non_gaussianness(f).value;
    clipped[i] = f.clipped_mass();
  });
  SumSequence out;
  for (std::size_t i = 0; i < n.size(); ++i) {
    out.divergence[n[i]] = d[i];
    out.max_clipped_mass = std::max(out.max_clipped_mass, clipped[i]);
  }
  return out;
}

struct MonotonicityResult {
  Verdict verdict;
  double worst_increase;  // max over pairs of D_next - D_prev
  int worst_n;            // later n of that pair
};

/// PASS iff each entry is at most its predecessor plus the slack.
inline MonotonicityResult monotonicity_check(const DivergenceSequence& seq,
                                             double slack = kChainSlack) {
  MonotonicityResult r{Verdict::Pass, -INFINITY, 0};
  for (auto it = seq.begin(); it != seq.end() && std::next(it) != seq.end(); ++it) {
    const auto next = std::next(it);
    const double inc = next->second - it->second;
    if (inc > r.worst_increase) {
      r.worst_increase = inc;
      r.worst_n = next->first;
    }
  }
  if (r.worst_increase > slack) r.verdict = Verdict::Fail;
  return r;
}

/// n D(W + sqrt(Q/n) X) at grid resolutions N and 2N.
template <class L>
IdentityCheck scaling_identity_check(const L& law, SnrValue big_q, int n, const GridSpec& spec,
                                     double tolerance = kScalingTolerance) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
  const SnrValue q(big_q.value() / n);
  const GridSpec fine(spec.half_width(), 2 * spec.points());
  const double coarse = n * channel_divergence(law, q, spec).value;
  const double refined = n * channel_divergence(law, q, fine).value;
  const double residual = std::abs(coarse - refined);
  return {coarse, refined, residual, tolerance, residual < tolerance};
}

struct DpiResult {
  double scaled_lhs;  // n D(W + sqrt(Q/n) X_1)
  double channel;     // D(W + sqrt(Q/n) S_n)
  double margin;      // scaled_lhs - channel
  Verdict verdict;
};

/// Data-processing step: the divergence of n independent channel outputs
/// dominates that of their normalized sum.
inline DpiResult dpi_check(const SourceDistribution& law, SnrValue big_q, int n,
                           const GridSpec& spec) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
  const SnrValue q(big_q.value() / n);
  const double lhs = n * channel_divergence(law, q, spec).value;
  const double rhs = channel_divergence(NormalizedSum(law, n), q, spec).value;
  const double margin = lhs - rhs;
  return {lhs, rhs, margin, margin >= -kChainSlack ? Verdict::Pass : Verdict::Fail};
}

/// D(S_n) - D(W + sqrt(Q/n) S_n).
inline double delta_gap(const SourceDistribution& law, SnrValue big_q, int n,
                        const GridSpec& spec) {
  const double d_sum = non_gaussianness(normalized_sum_density(law, n, spec)).value;
  const SnrValue q(big_q.value() / n);
  return d_sum - channel_divergence(NormalizedSum(law, n), q, spec).value;
}

struct BoundResult {
  std::map<int, double> bound;  // 0.5 d2 Q^2 / n
  std::map<int, Verdict> verdict;
  std::optional<int> empirical_n;  // smallest n from which every check passes
  Verdict overall;
};

/// Compares D(S_n) with the explicit term of the bound. An estimate on the
/// noise floor or indistinguishable from zero gives DEGENERATE throughout.
inline BoundResult bound_check(const DivergenceSequence& seq, const TaylorEstimate& d2,
                               SnrValue big_q) {
  BoundResult r;
  const bool degenerate = d2.noise_floor || std::abs(d2.value) <= d2.uncertainty;
  const double q2 = big_q.value() * big_q.value();
  for (const auto& [n, d] : seq) {
    const double b = 0.5 * d2.value * q2 / n;
    r.bound[n] = b;
    r.verdict[n] = degenerate ? Verdict::Degenerate : (d <= b ? Verdict::Pass : Verdict::Fail);
  }
  if (degenerate) {
    r.overall = Verdict::Degenerate;
    return r;
  }
  for (auto it = seq.rbegin(); it != seq.rend(); ++it) {
    if (r.verdict[it->first] != Verdict::Pass) break;
    r.empirical_n = it->first;
  }
  r.overall = r.empirical_n ? Verdict::Pass : Verdict::Fail;
  return r;
}

struct RateFit {
  double slope;
  double stderr_slope;
  std::size_t points;
  int n_first;
  int n_last;
};

inline constexpr std::size_t kMinRatePoints = 5;

namespace detail {

inline RateFit fit_log_log(const std::vector<std::pair<int, double>>& tail) {
  std::vector<std::pair<int, double>> usable;
  for (const auto& p : tail) {
    if (p.second >= kNoiseFloor) usable.push_back(p);
  }
  if (usable.size() < 3) {
    throw Error(ErrorCode::RateUndefined, "tail divergences are below the noise floor");
  }
  const auto m = static_cast<Eigen::Index>(usable.size());
  Eigen::MatrixXd a(m, 2);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = std::log(static_cast<double>(usable[i].first));
    b(i) = std::log(usable[i].second);
  }
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(b);
  double se = 0.0;
  if (m > 2) {
    const double s2 = (a * coef - b).squaredNorm() / static_cast<double>(m - 2);
    se = std::sqrt(s2 * (a.transpose() * a).inverse()(1, 1));
  }
  return {coef(1), se, usable.size(), usable.front().first, usable.back().first};
}

}  // namespace detail

/// Least-squares slope of ln D against ln n over the last `tail_fraction` of
/// the sequence (at least five points).
inline RateFit rate_fit(const DivergenceSequence& seq, double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "tail_fraction must lie in (0, 1]");
  }
  const auto count = std::max<std::size_t>(
      kMinRatePoints, static_cast<std::size_t>(std::ceil(tail_fraction * seq.size())));
  if (seq.size() < count) {
    throw Error(ErrorCode::InvalidArgument, "rate fit needs at least five tail points");
  }
  std::vector<std::pair<int, double>> tail(std::prev(seq.end(), static_cast<long>(count)),
                                           seq.end());
  return detail::fit_log_log(tail);
}

/// Same fit restricted to n in [n_lo, n_hi].
inline RateFit rate_fit(const DivergenceSequence& seq, int n_lo, int n_hi) {
  std::vector<std::pair<int, double>> tail(seq.lower_bound(n_lo), seq.upper_bound(n_hi));
  if (tail.size() < kMinRatePoints) {
    throw Error(ErrorCode::InvalidArgument, "rate fit needs at least five points in range");
  }
  return detail::fit_log_log(tail);
}

/// Excess capacity, in nats, of the additive channel whose noise is the
/// normalized aggregate of n i.i.d. interferers, over the Gaussian-noise
/// channel of equal power.
struct CapacityGap {
  DivergenceSequence excess;
  std::optional<RateFit> rate;
  bool degraded = false;
};

inline CapacityGap capacity_gap_report(const SourceDistribution& law, int n_max,
                                       const GridSpec& spec, double tail_fraction = 0.5,
                                       int per_octave = 1) {
  const auto seq = sum_divergence_sequence(law, n_max, spec, per_octave);
  CapacityGap out{seq.divergence, std::nullopt, seq.degraded()};
  try {
    out.rate = rate_fit(seq.divergence, tail_fraction);
  } catch (const Error&) {
  }
  return out;
}

struct Theorem1Options {
  int n_max = 64;
  int per_octave = 1;
  double tail_fraction = 0.5;
  double taylor_q0 = 0.125;
  int taylor_levels = 6;
};

struct Theorem1Row {
  int n;
  double d_sum;
  double d_channel;
  double scaled_lhs;
  double delta;
  double delta_scaled;  // delta n / Q^2
  double bound;
  Verdict dpi;
  Verdict bound_verdict;
};

struct Theorem1Report {
  std::string law;
  double q;
  std::vector<Theorem1Row> rows;
  TaylorEstimate d2;
  TaylorEstimate d2_check;
  bool taylor_agree;
  std::optional<RateFit> rate;
  std::optional<int> empirical_n;
  MonotonicityResult monotonicity;
  Verdict dpi;
  Verdict delta_bracket;
  Verdict chain;
  Verdict bound;
  Verdict rate_verdict;
  double max_clipped_mass;
  bool degraded() const { return max_clipped_mass > DensityGrid::kDegradationThreshold; }
};

/// Runs every link for one law and one Q.
inline Theorem1Report run_theorem1(const SourceDistribution& law, SnrValue big_q,
                                   const GridSpec& spec, const Theorem1Options& opt = {}) {
  const auto seq = sum_divergence_sequence(law, opt.n_max, spec, opt.per_octave);
  const std::vector<int> ns = n_schedule(opt.n_max, opt.per_octave);

  Theorem1Report rep;
  rep.law = law.name();
  rep.q = big_q.value();
  rep.max_clipped_mass = seq.max_clipped_mass;
  rep.d2 = second_derivative_at_zero(law, SnrValue(opt.taylor_q0), opt.taylor_levels, spec);
  rep.d2_check = mmse_gap_slope(law, SnrValue(opt.taylor_q0), opt.taylor_levels, spec);
  rep.taylor_agree = estimates_agree(rep.d2, rep.d2_check);

  rep.rows.resize(ns.size());
  parallel_for(ns.size(), [&](std::size_t i) {
    const int n = ns[i];
    const auto dpi = dpi_check(law, big_q, n, spec);
    auto& row = rep.rows[i];
    row.n = n;
    row.d_sum = seq.divergence.at(n);
    row.d_channel = dpi.channel;
    row.scaled_lhs = dpi.scaled_lhs;
    row.delta = row.d_sum - dpi.channel;
    row.delta_scaled = row.delta * n / (big_q.value() * big_q.value());
    row.dpi = dpi.verdict;
  });

  const auto bound = bound_check(seq.divergence, rep.d2, big_q);
  rep.bound = bound.overall;
  rep.empirical_n = bound.empirical_n;
  rep.monotonicity = monotonicity_check(seq.divergence);

  rep.dpi = Verdict::Pass;
  rep.delta_bracket = Verdict::Pass;
  rep.chain = Verdict::Pass;
  for (auto& row : rep.rows) {
    row.bound = bound.bound.at(row.n);
    row.bound_verdict = bound.verdict.at(row.n);
    if (row.dpi != Verdict::Pass) rep.dpi = Verdict::Fail;
    if (row.delta < -kChainSlack || row.delta > row.d_sum + kChainSlack) {
      rep.delta_bracket = Verdict::Fail;
    }
    if (row.scaled_lhs < row.d_channel - kChainSlack ||
        row.d_channel < row.d_sum - row.delta - 2.0 * kChainSlack) {
      rep.chain = Verdict::Fail;
    }
  }
  if (rep.rows.size() > 1 && seq.divergence.at(ns.front()) > kNoiseFloor &&
      !(rep.rows.back().delta < rep.rows.front().delta)) {
    rep.delta_bracket = Verdict::Fail;
  }

  try {
    rep.rate = rate_fit(seq.divergence, opt.tail_fraction);
    rep.rate_verdict = rep.rate->slope < 0.0 ? Verdict::Pass : Verdict::Fail;
  } catch (const Error&) {
    rep.rate_verdict = Verdict::Degenerate;
  }
  return rep;
}

/// Delta_n at fixed n must not increase with Q.
struct QSweep {
  std::vector<double> q;
  std::vector<double> delta;
  Verdict verdict;
};

inline QSweep q_monotonicity_check(const SourceDistribution& law, std::vector<double> qs, int n,
                                   const GridSpec& spec) {
  std::sort(qs.begin(), qs.end());
  QSweep out{qs, std::vector<double>(qs.size()), Verdict::Pass};
  parallel_for(qs.size(), [&](std::size_t i) {
    out.delta[i] = delta_gap(law, SnrValue(qs[i]), n, spec);
  });
  for (std::size_t i = 1; i < qs.size(); ++i) {
    if (out.delta[i] > out.delta[i - 1] + kChainSlack) out.verdict = Verdict::Fail;
  }
  return out;
}

}  // namespace nongauss
