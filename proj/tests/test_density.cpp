#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nongauss/distribution.hpp"
#include "nongauss/spectral.hpp"

using namespace nongauss;

namespace {

std::vector<SourceDistribution> continuous_laws() {
  return {SourceDistribution::gaussian(), SourceDistribution::uniform(),
          SourceDistribution::laplace(), SourceDistribution::exponential(),
          SourceDistribution::default_mixture()};
}

// Central moments of a grid density up to order four.
std::array<double, 5> grid_moments(const DensityGrid& f) {
  std::array<double, 5> m{};
  const auto& g = f.spec();
  for (int k = 1; k <= 4; ++k) {
    m[k] = static_cast<double>(trapezoid(g, [&](std::size_t j) {
      return std::pow(g.node(j) - f.mean(), k) * f[j];
    }));
  }
  return m;
}

}  // namespace

TEST(Standardize, GaussianAffine) {
  const auto raw = SourceDistribution::gaussian(3.0, 4.0, Standardize::no);
  EXPECT_EQ(raw.mean(), 3.0);
  EXPECT_EQ(raw.variance(), 4.0);
  const auto s = standardize(raw);
  EXPECT_EQ(s.name(), "gaussian");
  EXPECT_EQ(s.mean(), 0.0);
  EXPECT_EQ(s.variance(), 1.0);
}

TEST(Standardize, ExponentialBecomesCentered) {
  const auto s = SourceDistribution::exponential(1.0);
  const auto& e = std::get<Exponential>(s.family());
  EXPECT_DOUBLE_EQ(e.shift, -1.0);
  EXPECT_DOUBLE_EQ(e.rate, 1.0);
  EXPECT_NEAR(s.mean(), 0.0, 1e-15);
  EXPECT_NEAR(s.variance(), 1.0, 1e-15);
  const auto r = SourceDistribution::exponential(4.0, 2.0);
  EXPECT_NEAR(std::get<Exponential>(r.family()).rate, 1.0, 1e-15);
}

TEST(Standardize, UniformUnitInterval) {
  const auto s = SourceDistribution::uniform(0.0, 1.0);
  const auto& u = std::get<Uniform>(s.family());
  EXPECT_NEAR(u.lower, -std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(u.upper, std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(s.variance(), 1.0, 1e-15);
}

TEST(Standardize, RejectsDegenerateVariance) {
  try {
    SourceDistribution::gaussian(1.0, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidVariance);
  }
  EXPECT_THROW(SourceDistribution::uniform(1.0, 1.0), Error);
  EXPECT_THROW(SourceDistribution::rademacher(0.0, 0.0), Error);
}

TEST(Standardize, MixtureKeepsShape) {
  const auto m = SourceDistribution::default_mixture();
  EXPECT_NEAR(m.mean(), 0.0, 1e-15);
  EXPECT_NEAR(m.variance(), 1.0, 1e-14);
  EXPECT_FALSE(m.is_symmetric());
}

TEST(HasDensity, OnlyRademacherIsDiscrete) {
  for (const auto& d : continuous_laws()) EXPECT_TRUE(d.has_density()) << d.name();
  EXPECT_FALSE(SourceDistribution::rademacher().has_density());
  EXPECT_EQ(SourceDistribution::rademacher().atoms().size(), 2u);
}

TEST(PdfOf, UniformHeight) {
  const auto u = SourceDistribution::uniform();
  const auto g = default_grid(u);
  const auto f = pdf_of(u, g);
  const double height = 1.0 / (2.0 * std::sqrt(3.0));
  for (std::size_t j = 0; j < g.points(); ++j) {
    const double x = g.node(j);
    if (std::abs(x) < std::sqrt(3.0) - g.spacing()) EXPECT_NEAR(f[j], height, 1e-6);
    if (std::abs(x) > std::sqrt(3.0) + g.spacing()) EXPECT_EQ(f[j], 0.0);
  }
  EXPECT_NEAR(f.mass(), 1.0, 1e-9);
}

TEST(PdfOf, GaussianPointwise) {
  const auto d = SourceDistribution::gaussian();
  const auto g = default_grid(d);
  const auto f = pdf_of(d, g);
  double worst = 0.0;
  for (std::size_t j = 0; j < g.points(); ++j) {
    const double x = g.node(j);
    worst = std::max(worst, std::abs(f[j] - std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI)));
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(PdfOf, RademacherHasNoDensity) {
  try {
    pdf_of(SourceDistribution::rademacher(), GridSpec(10.0, 1024));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoDensity);
  }
}

TEST(PdfOf, NarrowGridRejected) {
  try {
    pdf_of(SourceDistribution::laplace(), GridSpec(4.0, 1024));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GridTooNarrow);
  }
}

TEST(PdfOf, MassAndMomentsAtDefaultGrid) {
  for (const auto& d : continuous_laws()) {
    const auto f = pdf_of(d, default_grid(d));
    EXPECT_NEAR(f.mass(), 1.0, 1e-9) << d.name();
    EXPECT_NEAR(f.mean(), 0.0, 1e-6) << d.name();
    EXPECT_NEAR(f.variance(), 1.0, 1e-6) << d.name();
  }
}

TEST(PdfOf, CumulantsMatchMomentSummary) {
  for (const auto& d : continuous_laws()) {
    const auto f = pdf_of(d, default_grid(d));
    const auto m = grid_moments(f);
    const auto s = moments(d);
    EXPECT_NEAR(m[2], s.variance, 1e-5) << d.name();
    EXPECT_NEAR(m[3], s.kappa3, 1e-5) << d.name();
    EXPECT_NEAR(m[4] - 3.0 * m[2] * m[2], s.kappa4, 1e-5) << d.name();
  }
}

TEST(DefaultGrid, DefaultShape) {
  for (const auto& d : continuous_laws()) {
    const auto g = default_grid(d);
    EXPECT_EQ(g.points(), std::size_t{1} << 14);
    EXPECT_GE(g.half_width(), 10.0);
    EXPECT_LE(d.tail_mass_outside(-g.half_width(), g.half_width()), 1e-12);
  }
}

TEST(CharacteristicFunction, ClosedForms) {
  EXPECT_NEAR(std::abs(characteristic_function(SourceDistribution::gaussian(), 1.0) -
                       complex(std::exp(-0.5), 0.0)),
              0.0, 1e-15);
  EXPECT_NEAR(std::abs(characteristic_function(SourceDistribution::uniform(), 1e-9) - 1.0), 0.0,
              1e-15);
  EXPECT_NEAR(std::abs(characteristic_function(SourceDistribution::rademacher(), M_PI) + 1.0),
              0.0, 1e-15);
  const complex e = characteristic_function(SourceDistribution::exponential(), 0.7);
  const complex ref = std::exp(complex(0.0, -0.7)) / complex(1.0, -0.7);
  EXPECT_NEAR(std::abs(e - ref), 0.0, 1e-15);
}

TEST(CharacteristicFunction, Axioms) {
  auto laws = continuous_laws();
  laws.push_back(SourceDistribution::rademacher());
  for (const auto& d : laws) {
    EXPECT_NEAR(std::abs(d.cf(0.0) - 1.0), 0.0, 1e-15) << d.name();
    for (double t = -25.0; t <= 25.0; t += 0.37) {
      EXPECT_LE(std::abs(d.cf(t)), 1.0 + 1e-15);
      EXPECT_NEAR(std::abs(d.cf(-t) - std::conj(d.cf(t))), 0.0, 1e-14);
    }
  }
}

TEST(CharacteristicFunction, WeightedIsDerivative) {
  auto laws = continuous_laws();
  laws.push_back(SourceDistribution::rademacher());
  for (const auto& d : laws) {
    for (double t : {-3.1, -0.4, 0.0, 0.9, 2.5, 7.0}) {
      const double h = 1e-5;
      const complex deriv = (d.cf(t + h) - d.cf(t - h)) / (2.0 * h);
      const complex w = complex(0.0, -1.0) * deriv;
      EXPECT_NEAR(std::abs(d.cf_weighted(t) - w), 0.0, 1e-8) << d.name() << " t=" << t;
    }
  }
}

// The trapezoid transform is second order across a jump, so a finer grid.
TEST(CharacteristicFunction, MatchesTransformOfPdf) {
  for (const auto& d : continuous_laws()) {
    const auto f = pdf_of(d, default_grid(d, 1 << 16));
    const auto& g = f.spec();
    for (double t = -20.0; t <= 20.0; t += 0.5) {
      long double re = 0.0L;
      long double im = 0.0L;
      for (std::size_t j = 0; j < g.points(); ++j) {
        const long double w = g.trapezoid_weight(j) * f[j];
        re += w * std::cos(t * g.node(j));
        im += w * std::sin(t * g.node(j));
      }
      const complex ft(static_cast<double>(re), static_cast<double>(im));
      EXPECT_NEAR(std::abs(ft - d.cf(t)), 0.0, 1e-6) << d.name() << " t=" << t;
    }
  }
}

TEST(Moments, ClosedForms) {
  const auto u = moments(SourceDistribution::uniform());
  EXPECT_DOUBLE_EQ(u.variance, 1.0);
  EXPECT_NEAR(u.kappa3, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(u.kappa4, -1.2);
  const auto e = moments(SourceDistribution::exponential());
  EXPECT_DOUBLE_EQ(e.variance, 1.0);
  EXPECT_DOUBLE_EQ(e.kappa3, 2.0);
  EXPECT_DOUBLE_EQ(e.kappa4, 6.0);
  const auto g = moments(SourceDistribution::gaussian());
  EXPECT_NEAR(g.kappa3, 0.0, 1e-15);
  EXPECT_NEAR(g.kappa4, 0.0, 1e-14);
  EXPECT_NEAR(moments(SourceDistribution::laplace()).kappa3, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(moments(SourceDistribution::laplace()).kappa4, 3.0);
}

TEST(Sampling, MatchesMoments) {
  std::mt19937_64 rng(7);
  for (const auto& d : continuous_laws()) {
    double s1 = 0.0;
    double s2 = 0.0;
    const int n = 400000;
    for (int i = 0; i < n; ++i) {
      const double x = d.sample(rng);
      s1 += x;
      s2 += x * x;
    }
    EXPECT_NEAR(s1 / n, 0.0, 0.01) << d.name();
    EXPECT_NEAR(s2 / n, 1.0, 0.02) << d.name();
  }
}
