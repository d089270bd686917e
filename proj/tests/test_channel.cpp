#include <gtest/gtest.h>

#include <cmath>

#include "nongauss/channel.hpp"
#include "nongauss/monte_carlo.hpp"
#include "oracles.hpp"

using namespace nongauss;

namespace {

const auto kGauss = SourceDistribution::gaussian();
const auto kUniform = SourceDistribution::uniform();
const auto kRademacher = SourceDistribution::rademacher();
const auto kExp = SourceDistribution::exponential();

template <class L>
double divergence_at(const L& law, double q) {
  return channel_divergence(law, SnrValue(q), default_grid(law)).value;
}

}  // namespace

TEST(SnrValue, Validation) {
  EXPECT_THROW(SnrValue{-1e-9}, Error);
  EXPECT_THROW(SnrValue{NAN}, Error);
  EXPECT_THROW(SnrValue{INFINITY}, Error);
  EXPECT_EQ(SnrValue(0.0).value(), 0.0);
}

TEST(ChannelOutput, ZeroSnrIsStandardGaussian) {
  const GridSpec g(12.0, 1 << 14);
  const auto ref = pdf_of(kGauss, g);
  for (const auto& d : {kUniform, kExp, kRademacher}) {
    EXPECT_LE(sup_distance(channel_output_density(d, SnrValue(0.0), g), ref), 1e-12) << d.name();
  }
}

TEST(ChannelOutput, RademacherMixture) {
  const GridSpec g(12.0, 1 << 14);
  const auto f = channel_output_density(kRademacher, SnrValue(1.0), g);
  double worst = 0.0;
  for (std::size_t j = 0; j < g.points(); ++j) {
    const double y = g.node(j);
    const double ref = 0.5 * (std::exp(-0.5 * (y - 1) * (y - 1)) + std::exp(-0.5 * (y + 1) * (y + 1))) /
                       std::sqrt(2.0 * M_PI);
    worst = std::max(worst, std::abs(f[j] - ref));
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(ChannelOutput, GaussianStability) {
  const GridSpec g(16.0, 1 << 14);
  const auto f = channel_output_density(kGauss, SnrValue(3.0), g);
  const auto ref = pdf_of(SourceDistribution::gaussian(0.0, 4.0, Standardize::no), g);
  EXPECT_LE(sup_distance(f, ref), 1e-8);
}

TEST(ChannelOutput, VarianceAndSampledInput) {
  const auto g = default_grid(kUniform);
  for (double q : {0.5, 2.0, 10.0}) {
    const GridSpec wide(std::max(12.0, 9.0 * std::sqrt(1.0 + q)), 1 << 14);
    const auto spectral = channel_output_density(kUniform, SnrValue(q), wide);
    EXPECT_NEAR(spectral.variance(), 1.0 + q, 1e-5) << q;
    const auto direct = channel_output_density(pdf_of(kUniform, g), SnrValue(q), wide);
    EXPECT_NEAR(direct.variance(), 1.0 + q, 1e-5) << q;
    EXPECT_LE(sup_distance(spectral, direct), 1e-6) << q;
  }
}

TEST(ChannelOutput, NarrowGridRejected) {
  try {
    channel_output_density(kUniform, SnrValue(50.0), GridSpec(6.0, 4096));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GridTooNarrow);
  }
}

TEST(DivergenceCurve, GaussianVanishes) {
  const auto curve = divergence_curve(kGauss, default_snr_grid(), default_grid(kGauss));
  for (std::size_t i = 0; i < curve.q.size(); ++i) {
    EXPECT_LE(std::abs(curve.divergence[i]), 1e-7) << curve.q[i];
    EXPECT_NEAR(curve.mmse_x[i], curve.mmse_gaussian[i], 1e-8) << curve.q[i];
  }
}

TEST(DivergenceCurve, ShapeAndBounds) {
  for (const auto& d : {kUniform, kExp, SourceDistribution::laplace()}) {
    const auto grid = default_snr_grid();
    const auto curve = divergence_curve(d, grid, default_grid(d));
    const double d_inf = non_gaussianness(pdf_of(d, default_grid(d))).value;
    EXPECT_EQ(curve.q, grid);
    EXPECT_LE(std::abs(curve.divergence[0]), 1e-8);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      EXPECT_DOUBLE_EQ(curve.mmse_gaussian[i], 1.0 / (1.0 + grid[i]));
      EXPECT_GE(curve.mmse_x[i], 0.0);
      EXPECT_LE(curve.mmse_x[i], 1.0 + 1e-12);
      EXPECT_LE(curve.divergence[i], d_inf + 1e-6);
      if (i > 0) {
        EXPECT_GE(curve.divergence[i], curve.divergence[i - 1] - 1e-7) << d.name() << grid[i];
        EXPECT_LE(curve.mmse_x[i], curve.mmse_x[i - 1] + 1e-6) << d.name() << grid[i];
      }
    }
  }
}

TEST(DivergenceCurve, RejectsUnsortedGrid) {
  EXPECT_THROW(divergence_curve(kUniform, {1.0, 0.5}, default_grid(kUniform)), Error);
}

TEST(Divergence, UniformMatchesMonteCarlo) {
  const double grid = divergence_at(kUniform, 1.0);
  const auto mc = monte_carlo_channel_divergence(kUniform, 1.0, 10'000'000, 2048, 20240611);
  EXPECT_GT(grid, 0.0);
  EXPECT_NEAR(grid, mc.divergence, 2e-3);
}

TEST(Divergence, UniformLargeSnr) {
  // At q = 1e4 the smoothed edges still cost about 3% of D(U); compare with
  // the edge asymptotic instead of the raw limit.
  const double d = divergence_at(kUniform, 1e4);
  EXPECT_NEAR(d, oracle::uniform_channel_divergence_large_q(1e4), 1e-5);
  EXPECT_LT(d, 0.176485);
  EXPECT_NEAR(d / 0.176485, 1.0, 0.03);
}

TEST(ConditionalMean, ClosedForms) {
  EXPECT_NEAR(conditional_mean(0.0, kUniform, SnrValue(2.0)), 0.0, 1e-14);
  EXPECT_NEAR(conditional_mean(0.0, kRademacher, SnrValue(2.0)), 0.0, 1e-14);
  for (double q : {0.1, 1.0, 7.0}) {
    for (double y : {-2.5, -0.3, 0.8, 3.0}) {
      EXPECT_NEAR(conditional_mean(y, kGauss, SnrValue(q)), y * std::sqrt(q) / (1.0 + q), 1e-10);
      EXPECT_NEAR(conditional_mean(y, kRademacher, SnrValue(q)), std::tanh(std::sqrt(q) * y),
                  1e-14);
    }
  }
}

TEST(ConditionalMean, OddForSymmetricLaws) {
  for (const auto& d : {kUniform, SourceDistribution::laplace(), kRademacher}) {
    for (double y : {0.2, 1.1, 2.9}) {
      EXPECT_LT(std::abs(conditional_mean(y, d, SnrValue(1.5)) +
                         conditional_mean(-y, d, SnrValue(1.5))),
                1e-8);
    }
  }
}

TEST(ConditionalMean, Errors) {
  EXPECT_THROW(conditional_mean(0.0, kUniform, SnrValue(0.0)), Error);
  try {
    conditional_mean(1e6, kRademacher, SnrValue(4.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TailUnderflow);
  }
}

TEST(ConditionalMean, SampledInputAgrees) {
  const auto f = pdf_of(kExp, default_grid(kExp));
  for (double y : {-1.0, 0.5, 2.0}) {
    EXPECT_NEAR(conditional_mean(y, f, SnrValue(2.0)), conditional_mean(y, kExp, SnrValue(2.0)),
                1e-12);
  }
}

TEST(Mmse, Examples) {
  for (const auto& d : {kGauss, kUniform, kExp, kRademacher}) {
    EXPECT_DOUBLE_EQ(mmse(d, SnrValue(0.0), default_grid(d)), 1.0);
  }
  EXPECT_NEAR(mmse(kGauss, SnrValue(1.0), default_grid(kGauss)), 0.5, 1e-12);
  for (double q : {0.3, 1.0, 4.0}) {
    EXPECT_NEAR(mmse(kRademacher, SnrValue(q), default_grid(kRademacher)), oracle::rademacher_mmse(q),
                1e-10)
        << q;
  }
}

TEST(Mmse, SampledInputAgrees) {
  const auto g = default_grid(kUniform);
  const auto f = pdf_of(kUniform, g);
  EXPECT_NEAR(mmse(f, SnrValue(1.0), g), mmse(kUniform, SnrValue(1.0), g), 1e-7);
  EXPECT_NEAR(channel_divergence(f, SnrValue(1.0), g).value, divergence_at(kUniform, 1.0), 1e-8);
}

TEST(ImmseIdentity, Examples) {
  const auto gauss = immse_identity_check(kGauss, SnrValue(1.0), 1e-3, default_grid(kGauss));
  EXPECT_LT(gauss.residual, 1e-8);
  const auto u = immse_identity_check(kUniform, SnrValue(1.0), 1e-3, default_grid(kUniform));
  EXPECT_LT(u.residual, 1e-4);
  EXPECT_TRUE(u.passed);
  EXPECT_GT(u.lhs, 0.0);
  const auto r = immse_identity_check(kRademacher, SnrValue(2.0), 1e-3, default_grid(kRademacher));
  EXPECT_LT(r.residual, 1e-4);
  EXPECT_THROW(immse_identity_check(kUniform, SnrValue(1e-4), 1e-3, default_grid(kUniform)), Error);
}

TEST(CmmseIdentity, Examples) {
  EXPECT_LT(cmmse_identity_check(kGauss, SnrValue(3.0), default_grid(kGauss)).residual, 1e-8);
  const auto u = cmmse_identity_check(kUniform, SnrValue(4.0), default_grid(kUniform));
  EXPECT_LT(u.residual, 5e-4);
  EXPECT_GT(u.rhs, 0.0);
  EXPECT_LT(cmmse_identity_check(kExp, SnrValue(2.0), default_grid(kExp)).residual, 5e-4);
  EXPECT_THROW(cmmse_identity_check(kExp, SnrValue(0.0), default_grid(kExp)), Error);
}

TEST(SmallSnr, DivergenceIsFlatAtZero) {
  for (const auto& d : {kGauss, kUniform, kExp, kRademacher, SourceDistribution::laplace(),
                        SourceDistribution::default_mixture()}) {
    double prev = INFINITY;
    for (double q : {1e-1, 1e-2, 1e-3}) {
      const double ratio = divergence_at(d, q) / q;
      EXPECT_LE(ratio, prev + 1e-15) << d.name() << " q=" << q;
      prev = ratio;
    }
    EXPECT_LT(prev, 1e-4) << d.name();
  }
}

TEST(SnrGrid, DefaultShape) {
  const auto q = default_snr_grid();
  ASSERT_EQ(q.size(), 41u);
  EXPECT_EQ(q[0], 0.0);
  EXPECT_NEAR(q[1], 1e-3, 1e-15);
  EXPECT_NEAR(q.back(), 1e2, 1e-12);
  EXPECT_TRUE(std::is_sorted(q.begin(), q.end()));
  EXPECT_DOUBLE_EQ(default_fd_step(0.5), 0.005);
  EXPECT_EQ(default_fd_step(0.05), 1e-3);
  EXPECT_DOUBLE_EQ(default_fd_step(4.0), 0.04);
}
