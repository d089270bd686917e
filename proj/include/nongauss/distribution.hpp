#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "nongauss/error.hpp"
#include "nongauss/grid.hpp"

namespace nongauss {

using complex = std::complex<double>;

struct Gaussian {
  double mean = 0.0;
  double sd = 1.0;
};

struct Uniform {
  double lower = -std::numbers::sqrt3;
  double upper = std::numbers::sqrt3;
};

struct Laplace {
  double location = 0.0;
  double scale = std::numbers::sqrt2 / 2.0;
};

// X = shift + E / rate with E ~ Exp(1).
struct Exponential {
  double rate = 1.0;
  double shift = -1.0;
};

// Equiprobable atoms at center +/- half_gap.
struct Rademacher {
  double center = 0.0;
  double half_gap = 1.0;
};

struct MixtureComponent {
  double weight;
  double mean;
  double variance;
};

struct GaussianMixture {
  std::vector<MixtureComponent> components;
};

using Family =
    std::variant<Gaussian, Uniform, Laplace, Exponential, Rademacher, GaussianMixture>;

enum class Standardize { yes, no };

/// A point mass of a discrete law.
struct Atom {
  double location;
  double probability;
};

/// Variance plus standardized third and fourth (excess) cumulants.
struct MomentSummary {
  double variance;
  double kappa3;
  double kappa4;
};

namespace detail {

constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;

inline double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

// P(Z > z)
inline double normal_upper(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

inline double sinc(double u) {
  if (std::abs(u) < 1e-4) {
    const double u2 = u * u;
    return 1.0 - u2 / 6.0 + u2 * u2 / 120.0;
  }
  return std::sin(u) / u;
}

inline double sinc_derivative(double u) {
  if (std::abs(u) < 1e-3) {
    const double u2 = u * u;
    return -u / 3.0 + u * u2 / 30.0 - u * u2 * u2 / 840.0;
  }
  return (u * std::cos(u) - std::sin(u)) / (u * u);
}

template <class>
inline constexpr bool always_false = false;

}  // namespace detail

/// A source law X_i. Factories standardize to mean 0, variance 1 unless the
/// caller passes Standardize::no.
class SourceDistribution {
 public:
  explicit SourceDistribution(Family family, Standardize mode = Standardize::yes);

  static SourceDistribution gaussian(double mean = 0.0, double variance = 1.0,
                                     Standardize mode = Standardize::yes) {
    if (variance < 0.0) throw Error(ErrorCode::InvalidArgument, "negative variance");
    return SourceDistribution(Gaussian{mean, std::sqrt(variance)}, mode);
  }
  static SourceDistribution uniform(double lower = -std::numbers::sqrt3,
                                    double upper = std::numbers::sqrt3,
                                    Standardize mode = Standardize::yes) {
    return SourceDistribution(Uniform{lower, upper}, mode);
  }
  static SourceDistribution laplace(double location = 0.0,
                                    double scale = std::numbers::sqrt2 / 2.0,
                                    Standardize mode = Standardize::yes) {
    return SourceDistribution(Laplace{location, scale}, mode);
  }
  /// Exp(rate) shifted by `shift`; standardized this is Exp(1) - 1.
  static SourceDistribution exponential(double rate = 1.0, double shift = 0.0,
                                        Standardize mode = Standardize::yes) {
    return SourceDistribution(Exponential{rate, shift}, mode);
  }
  static SourceDistribution rademacher(double center = 0.0, double half_gap = 1.0,
                                       Standardize mode = Standardize::yes) {
    return SourceDistribution(Rademacher{center, half_gap}, mode);
  }
  static SourceDistribution mixture(std::vector<MixtureComponent> components,
                                    Standardize mode = Standardize::yes) {
    return SourceDistribution(GaussianMixture{std::move(components)}, mode);
  }
  /// Skewed two-component mixture used as the built-in "mixture" law.
  static SourceDistribution default_mixture() {
    return mixture({{0.25, -1.5, 0.5}, {0.75, 0.5, 0.5}});
  }

  const Family& family() const noexcept { return family_; }
  std::string name() const;

  double mean() const;
  double variance() const;
  bool has_density() const noexcept {
    return !std::holds_alternative<Rademacher>(family_);
  }
  bool is_symmetric() const;

  double pdf(double x) const;
  /// P(X < lower) + P(X > upper).
  double tail_mass_outside(double lower, double upper) const;
  /// Locations where the density jumps.
  std::vector<double> jump_points() const;
  /// Smallest R (up to bisection tolerance) with P(|X| > R) <= mass.
  double tail_radius(double mass) const;

  complex cf(double t) const;
  /// E[X exp(itX)] = -i d/dt cf(t).
  complex cf_weighted(double t) const;

  std::vector<Atom> atoms() const;

  template <class URNG>
  double sample(URNG& rng) const;

 private:
  Family family_;
};

namespace detail {

inline void validate(const Family& family) {
  auto bad = [](const char* what) { throw Error(ErrorCode::InvalidArgument, what); };
  std::visit(
      [&](const auto& f) {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, Gaussian>) {
          if (!std::isfinite(f.mean) || std::isnan(f.sd) || f.sd < 0.0) bad("gaussian parameters");
        } else if constexpr (std::is_same_v<F, Uniform>) {
          if (std::isnan(f.lower) || std::isnan(f.upper) || f.upper < f.lower) {
            bad("uniform requires lower <= upper");
          }
        } else if constexpr (std::is_same_v<F, Laplace>) {
          if (!std::isfinite(f.location) || std::isnan(f.scale) || f.scale < 0.0) {
            bad("laplace parameters");
          }
        } else if constexpr (std::is_same_v<F, Exponential>) {
          if (!std::isfinite(f.shift) || std::isnan(f.rate) || f.rate < 0.0) {
            bad("exponential parameters");
          }
        } else if constexpr (std::is_same_v<F, Rademacher>) {
          if (!std::isfinite(f.center) || std::isnan(f.half_gap) || f.half_gap < 0.0) {
            bad("rademacher parameters");
          }
        } else if constexpr (std::is_same_v<F, GaussianMixture>) {
          if (f.components.empty()) bad("mixture needs at least one component");
          double total = 0.0;
          for (const auto& c : f.components) {
            if (!(c.weight > 0.0) || !std::isfinite(c.mean) || std::isnan(c.variance) ||
                c.variance < 0.0) {
              bad("mixture component parameters");
            }
            total += c.weight;
          }
          if (std::abs(total - 1.0) > 1e-12) bad("mixture weights must sum to 1");
        } else {
          static_assert(always_false<F>);
        }
      },
      family);
}

inline Family affine_standardize(const Family& family, double m, double s) {
  return std::visit(
      [&](const auto& f) -> Family {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, Gaussian>) {
          return Gaussian{0.0, 1.0};
        } else if constexpr (std::is_same_v<F, Uniform>) {
          // Symmetric about the mean, so write it as +/- a exactly.
          const double a = 0.5 * (f.upper - f.lower) / s;
          return Uniform{-a, a};
        } else if constexpr (std::is_same_v<F, Laplace>) {
          return Laplace{0.0, f.scale / s};
        } else if constexpr (std::is_same_v<F, Exponential>) {
          return Exponential{f.rate * s, (f.shift - m) / s};
        } else if constexpr (std::is_same_v<F, Rademacher>) {
          return Rademacher{0.0, f.half_gap / s};
        } else {
          GaussianMixture out;
          for (const auto& c : f.components) {
            out.components.push_back({c.weight, (c.mean - m) / s, c.variance / (s * s)});
          }
          return out;
        }
      },
      family);
}

}  // namespace detail

/// Affine image with mean 0 and variance 1, same family.
inline SourceDistribution standardize(const SourceDistribution& dist) {
  const double v = dist.variance();
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::InvalidVariance,
                "cannot standardize " + dist.name() + ": variance is " +
                    (v > 0.0 ? std::string("infinite") : std::string("zero")));
  }
  return SourceDistribution(
      detail::affine_standardize(dist.family(), dist.mean(), std::sqrt(v)),
      Standardize::no);
}

inline SourceDistribution::SourceDistribution(Family family, Standardize mode)
    : family_(std::move(family)) {
  detail::validate(family_);
  if (mode == Standardize::yes) {
    family_ = standardize(*this).family_;
  }
}

inline std::string SourceDistribution::name() const {
  return std::visit(
      [](const auto& f) -> std::string {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, Gaussian>) return "gaussian";
        else if constexpr (std::is_same_v<F, Uniform>) return "uniform";
        else if constexpr (std::is_same_v<F, Laplace>) return "laplace";
        else if constexpr (std::is_same_v<F, Exponential>) return "exponential";
        else if constexpr (std::is_same_v<F, Rademacher>) return "rademacher";
        else return "mixture";
      },
      family_);
}

inline double SourceDistribution::mean() const {
  return std::visit(
      [](const auto& f) -> double {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, Gaussian>) return f.mean;
        else if constexpr (std::is_same_v<F, Uniform>) return 0.5 * (f.lower + f.upper);
        else if constexpr (std::is_same_v<F, Laplace>) return f.location;
        else if constexpr (std::is_same_v<F, Exponential>) return f.shift + 1.0 / f.rate;
        else if constexpr (std::is_same_v<F, Rademacher>) return f.center;
        else {
          double m = 0.0;
          for (const auto& c : f.components) m += c.weight * c.mean;
          return m;
        }
      },
      family_);
}

inline double SourceDistribution::variance() const {
  return std::visit(
      [](const auto& f) -> double {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, Gaussian>) return f.sd * f.sd;
        else if constexpr (std::is_same_v<F, Uniform>) {
          const double w = f.upper - f.lower;
          return w * w / 12.0;
        } else if constexpr (std::is_same_v<F, Laplace>) return 2.0 * f.scale * f.scale;
        else if constexpr (std::is_same_v<F, Exponential>) return 1.0 / (f.rate * f.rate);
        else if constexpr (std::is_same_v<F, Rademacher>) return f.half_gap * f.half_gap;
        else {
          double m = 0.0;
          double m2 = 0.0;
          for (const auto& c : f.components) {
            m += c.weight * c.mean;
            m2 += c.weight * (c.variance + c.mean * c.mean);
          }
          return m2 - m * m;
        }
      },
      family_);
}

inline bool SourceDistribution::is_symmetric() const {
  if (const auto* mix = std::get_if<GaussianMixture>(&family_)) {
    const double m = mean();
    for (const auto& c : mix->components) {
      const bool mirrored = std::any_of(
          mix->components.begin(), mix->components.end(), [&](const MixtureComponent& o) {
            return std::abs(o.mean - (2.0 * m - c.mean)) < 1e-14 &&
                   std::abs(o.weight - c.weight) < 1e-14 &&
                   std::abs(o.variance - c.variance) < 1e-14;
          });
      if (!mirrored) return false;
    }
    return true;
  }
  return !std::holds_alternative<Exponential>(family_);
}

inline double SourceDistribution::pdf(double x) const {
  return std::visit(
      [x](const auto& f) -> double {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, Gaussian>) {
          return detail::normal_pdf((x - f.mean) / f.sd) / f.sd;
        } else if constexpr (std::is_same_v<F, Uniform>) {
          return (x >= f.lower && x <= f.upper) ? 1.0 / (f.upper - f.lower) : 0.0;
        } else if constexpr (std::is_same_v<F, Laplace>) {
          return std::exp(-std::abs(x - f.location) / f.scale) / (2.0 * f.scale);
        } else if constexpr (std::is_same_v<F, Exponential>) {
          return x >= f.shift ? f.rate * std::exp(-f.rate * (x - f.shift)) : 0.0;
        } else if constexpr (std::is_same_v<F, Rademacher>) {
          throw Error(ErrorCode::NoDensity, "rademacher law has no density");
        } else {
          double p = 0.0;
          for (const auto& c : f.components) {
            const double sd = std::sqrt(c.variance);
            p += c.weight * detail::normal_pdf((x - c.mean) / sd) / sd;
          }
          return p;
        }
      },
      family_);
}

inline double SourceDistribution::tail_mass_outside(double lower, double upper) const {
  return std::visit(
      [&](const auto& f) -> double {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, Gaussian>) {
          return detail::normal_upper((f.mean - lower) / f.sd) +
                 detail::normal_upper((upper - f.mean) / f.sd);
        } else if constexpr (std::is_same_v<F, Uniform>) {
          const double w = f.upper - f.lower;
          return (std::clamp(lower, f.lower, f.upper) - f.lower) / w +
                 (f.upper - std::clamp(upper, f.lower, f.upper)) / w;
        } else if constexpr (std::is_same_v<F, Laplace>) {
          auto side = [&](double d) { return d <= 0.0 ? 0.5 : 0.5 * std::exp(-d / f.scale); };
          const double below = lower > f.location ? 1.0 - side(lower - f.location)
                                                   : side(f.location - lower);
          const double above = upper < f.location ? 1.0 - side(f.location - upper)
                                                   : side(upper - f.location);
          return below + above;
        } else if constexpr (std::is_same_v<F, Exponential>) {
          const double below = lower > f.shift ? -std::expm1(-f.rate * (lower - f.shift)) : 0.0;
          const double above = upper > f.shift ? std::exp(-f.rate * (upper - f.shift)) : 1.0;
          return below + above;
        } else if constexpr (std::is_same_v<F, Rademacher>) {
          double out = 0.0;
          for (double a : {f.center - f.half_gap, f.center + f.half_gap}) {
            if (a < lower || a > upper) out += 0.5;
          }
          return out;
        } else {
          double out = 0.0;
          for (const auto& c : f.components) {
            const double sd = std::sqrt(c.variance);
            out += c.weight * (detail::normal_upper((c.mean - lower) / sd) +
                               detail::normal_upper((upper - c.mean) / sd));
          }
          return out;
        }
      },
      family_);
}

inline std::vector<double> SourceDistribution::jump_points() const {
  if (const auto* u = std::get_if<Uniform>(&family_)) return {u->lower, u->upper};
  if (const auto* e = std::get_if<Exponential>(&family_)) return {e->shift};
  return {};
}

inline double SourceDistribution::tail_radius(double mass) const {
  double hi = 1.0 + std::abs(mean());
  while (tail_mass_outside(-hi, hi) > mass) hi *= 2.0;
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (tail_mass_outside(-mid, mid) > mass ? lo : hi) = mid;
  }
  return hi;
}

inline complex SourceDistribution::cf(double t) const {
  using namespace std::complex_literals;
  return std::visit(
      [t](const auto& f) -> complex {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, Gaussian>) {
          return std::exp(complex(-0.5 * f.sd * f.sd * t * t, f.mean * t));
        } else if constexpr (std::is_same_v<F, Uniform>) {
          const double c = 0.5 * (f.lower + f.upper);
          const double a = 0.5 * (f.upper - f.lower);
          return std::polar(detail::sinc(a * t), c * t);
        } else if constexpr (std::is_same_v<F, Laplace>) {
          const double bt = f.scale * t;
          return std::polar(1.0 / (1.0 + bt * bt), f.location * t);
        } else if constexpr (std::is_same_v<F, Exponential>) {
          return std::polar(1.0, f.shift * t) / complex(1.0, -t / f.rate);
        } else if constexpr (std::is_same_v<F, Rademacher>) {
          return std::polar(std::cos(f.half_gap * t), f.center * t);
        } else {
          complex out = 0.0;
          for (const auto& c : f.components) {
            out += c.weight * std::exp(complex(-0.5 * c.variance * t * t, c.mean * t));
          }
          return out;
        }
      },
      family_);
}

inline complex SourceDistribution::cf_weighted(double t) const {
  return std::visit(
      [t](const auto& f) -> complex {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, Gaussian>) {
          const double v = f.sd * f.sd;
          return complex(f.mean, v * t) *
                 std::exp(complex(-0.5 * v * t * t, f.mean * t));
        } else if constexpr (std::is_same_v<F, Uniform>) {
          const double c = 0.5 * (f.lower + f.upper);
          const double a = 0.5 * (f.upper - f.lower);
          return std::polar(1.0, c * t) *
                 complex(c * detail::sinc(a * t), -a * detail::sinc_derivative(a * t));
        } else if constexpr (std::is_same_v<F, Laplace>) {
          const double bt = f.scale * t;
          const double d = 1.0 / (1.0 + bt * bt);
          return std::polar(1.0, f.location * t) *
                 complex(f.location * d, 2.0 * f.scale * f.scale * t * d * d);
        } else if constexpr (std::is_same_v<F, Exponential>) {
          const complex g = 1.0 / complex(1.0, -t / f.rate);
          return std::polar(1.0, f.shift * t) * (f.shift * g + g * g / f.rate);
        } else if constexpr (std::is_same_v<F, Rademacher>) {
          const double a = f.center + f.half_gap;
          const double b = f.center - f.half_gap;
          return 0.5 * (a * std::polar(1.0, a * t) + b * std::polar(1.0, b * t));
        } else {
          complex out = 0.0;
          for (const auto& c : f.components) {
            out += c.weight * complex(c.mean, c.variance * t) *
                   std::exp(complex(-0.5 * c.variance * t * t, c.mean * t));
          }
          return out;
        }
      },
      family_);
}

inline std::vector<Atom> SourceDistribution::atoms() const {
  if (const auto* r = std::get_if<Rademacher>(&family_)) {
    return {{r->center - r->half_gap, 0.5}, {r->center + r->half_gap, 0.5}};
  }
  return {};
}

template <class URNG>
double SourceDistribution::sample(URNG& rng) const {
  return std::visit(
      [&rng](const auto& f) -> double {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, Gaussian>) {
          return std::normal_distribution<double>(f.mean, f.sd)(rng);
        } else if constexpr (std::is_same_v<F, Uniform>) {
          return std::uniform_real_distribution<double>(f.lower, f.upper)(rng);
        } else if constexpr (std::is_same_v<F, Laplace>) {
          const double e = std::exponential_distribution<double>(1.0)(rng);
          const bool negative = std::bernoulli_distribution(0.5)(rng);
          return f.location + (negative ? -e : e) * f.scale;
        } else if constexpr (std::is_same_v<F, Exponential>) {
          return f.shift + std::exponential_distribution<double>(f.rate)(rng);
        } else if constexpr (std::is_same_v<F, Rademacher>) {
          return f.center + (std::bernoulli_distribution(0.5)(rng) ? f.half_gap : -f.half_gap);
        } else {
          std::vector<double> w;
          for (const auto& c : f.components) w.push_back(c.weight);
          const auto k = std::discrete_distribution<std::size_t>(w.begin(), w.end())(rng);
          const auto& c = f.components[k];
          return std::normal_distribution<double>(c.mean, std::sqrt(c.variance))(rng);
        }
      },
      family_);
}

inline complex characteristic_function(const SourceDistribution& dist, double t) {
  return dist.cf(t);
}

/// Variance of the instance and its standardized third/fourth cumulants.
inline MomentSummary moments(const SourceDistribution& dist) {
  const double v = dist.variance();
  return std::visit(
      [v, &dist](const auto& f) -> MomentSummary {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, Gaussian>) return {v, 0.0, 0.0};
        else if constexpr (std::is_same_v<F, Uniform>) return {v, 0.0, -6.0 / 5.0};
        else if constexpr (std::is_same_v<F, Laplace>) return {v, 0.0, 3.0};
        else if constexpr (std::is_same_v<F, Exponential>) return {v, 2.0, 6.0};
        else if constexpr (std::is_same_v<F, Rademacher>) return {v, 0.0, -2.0};
        else {
          const double m = dist.mean();
          double mu3 = 0.0;
          double mu4 = 0.0;
          for (const auto& c : f.components) {
            const double d = c.mean - m;
            mu3 += c.weight * (d * d * d + 3.0 * d * c.variance);
            mu4 += c.weight * (d * d * d * d + 6.0 * d * d * c.variance +
                               3.0 * c.variance * c.variance);
          }
          return {v, mu3 / std::pow(v, 1.5), mu4 / (v * v) - 3.0};
        }
      },
      dist.family());
}

/// Default grid for a law: N = 2^14 and L = max(10, 8 sigma + support radius)
/// for bounded laws; unbounded laws also widen until the tail outside
/// [-L, L] is below 1e-12. When the law has density jumps of a single
/// magnitude, L is enlarged so the jumps fall exactly on cell midpoints,
/// which keeps trapezoid sums second order.
inline GridSpec default_grid(const SourceDistribution& dist,
                             std::size_t points = GridSpec::kDefaultPoints) {
  const double sigma = std::sqrt(dist.variance());
  double width = 10.0;
  if (std::holds_alternative<Uniform>(dist.family()) ||
      std::holds_alternative<Rademacher>(dist.family())) {
    width = std::max(width, 8.0 * sigma + dist.tail_radius(0.0));
  } else {
    width = std::max({width, 8.0 * sigma + std::abs(dist.mean()), dist.tail_radius(1e-12)});
  }

  const auto jumps = dist.jump_points();
  if (!jumps.empty()) {
    const double s = std::abs(jumps.front());
    const bool common = std::all_of(jumps.begin(), jumps.end(), [s](double j) {
      return std::abs(std::abs(j) - s) <= 1e-15 * std::max(1.0, s);
    });
    const double cells = static_cast<double>(points - 1);
    if (common && s > 0.0) {
      // Midpoints sit at 2m L/(N-1); solve for L with integer m.
      const double m = std::floor(s * cells / (2.0 * width));
      if (m >= 1.0) width = s * cells / (2.0 * m);
    }
  }
  return GridSpec(width, points);
}

/// Samples the law's density on the grid. A node that lands on a jump takes
/// the mean of the one-sided limits.
inline DensityGrid pdf_of(const SourceDistribution& dist, const GridSpec& spec) {
  if (!dist.has_density()) {
    throw Error(ErrorCode::NoDensity, dist.name() + " law has no density");
  }
  const double tail = dist.tail_mass_outside(-spec.half_width(), spec.half_width());
  if (tail > 1e-12) {
    throw Error(ErrorCode::GridTooNarrow,
                "mass outside [-L, L] is " + std::to_string(tail));
  }
  const auto jumps = dist.jump_points();
  const double dx = spec.spacing();
  std::vector<double> values(spec.points());
  for (std::size_t j = 0; j < spec.points(); ++j) {
    const double x = spec.node(j);
    const bool on_jump = std::any_of(jumps.begin(), jumps.end(),
                                     [&](double s) { return std::abs(x - s) < 1e-9 * dx; });
    values[j] = on_jump ? 0.5 * (dist.pdf(x - dx * 1e-6) + dist.pdf(x + dx * 1e-6))
                        : dist.pdf(x);
  }
  return renormalize(spec, std::move(values));
}

}  // namespace nongauss
