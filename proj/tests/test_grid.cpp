#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "nongauss/grid.hpp"

using namespace nongauss;

TEST(GridSpec, RejectsBadShapes) {
  EXPECT_THROW(GridSpec(0.0, 1024), Error);
  EXPECT_THROW(GridSpec(-1.0, 1024), Error);
  EXPECT_THROW(GridSpec(INFINITY, 1024), Error);
  EXPECT_THROW(GridSpec(5.0, 128), Error);
  EXPECT_THROW(GridSpec(5.0, 1000), Error);
  EXPECT_NO_THROW(GridSpec(5.0, 256));
}

TEST(GridSpec, NodesAreSymmetric) {
  const GridSpec g(7.5, 1024);
  EXPECT_DOUBLE_EQ(g.spacing(), 15.0 / 1023.0);
  EXPECT_EQ(g.node(0), -7.5);
  EXPECT_EQ(g.node(1023), 7.5);
  for (std::size_t j = 0; j < 1024; ++j) EXPECT_EQ(g.node(j), -g.node(1023 - j));
}

TEST(GridSpec, TrapezoidIntegratesPolynomials) {
  const GridSpec g(2.0, 4096);
  const long double one = trapezoid(g, [&](std::size_t) { return 1.0; });
  EXPECT_NEAR(static_cast<double>(one), 4.0, 1e-14);
  const long double x2 = trapezoid(g, [&](std::size_t j) { return g.node(j) * g.node(j); });
  EXPECT_NEAR(static_cast<double>(x2), 16.0 / 3.0, 1e-5);
}

namespace {

std::vector<double> gaussian_values(const GridSpec& g) {
  std::vector<double> v(g.points());
  for (std::size_t j = 0; j < g.points(); ++j) {
    v[j] = std::exp(-0.5 * g.node(j) * g.node(j)) / std::sqrt(2.0 * M_PI);
  }
  return v;
}

}  // namespace

TEST(Renormalize, IdempotentOnNormalizedGaussian) {
  const GridSpec g(10.0, 4096);
  const auto f = renormalize(g, gaussian_values(g));
  const auto again = renormalize(f);
  EXPECT_LE(sup_distance(f, again), 1e-15);
  EXPECT_NEAR(f.mass(), 1.0, 1e-12);
  EXPECT_NEAR(f.variance(), 1.0, 1e-9);
  EXPECT_EQ(f.clipped_mass(), 0.0);
}

TEST(Renormalize, ClipsRinging) {
  const GridSpec g(10.0, 4096);
  auto v = gaussian_values(g);
  v[0] = -1e-12;
  v[4095] = -1e-12;
  const auto f = renormalize(g, v);
  EXPECT_EQ(f[0], 0.0);
  EXPECT_EQ(f[4095], 0.0);
  EXPECT_GT(f.clipped_mass(), 0.0);
  EXPECT_FALSE(f.degraded());
  EXPECT_NEAR(f.mass(), 1.0, 1e-12);
}

TEST(Renormalize, FlagsLargeClippedMass) {
  const GridSpec g(10.0, 4096);
  auto v = gaussian_values(g);
  for (std::size_t j = 0; j < 100; ++j) v[j] = -1e-5;
  EXPECT_TRUE(renormalize(g, v).degraded());
}

TEST(Renormalize, ZeroMassThrows) {
  const GridSpec g(10.0, 256);
  try {
    renormalize(g, std::vector<double>(256, 0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroMass);
  }
}

TEST(DensityGrid, RejectsNegativeAndWrongSize) {
  const GridSpec g(10.0, 256);
  EXPECT_THROW(DensityGrid(g, std::vector<double>(255, 1.0)), Error);
  std::vector<double> v(256, 0.01);
  v[3] = -0.1;
  EXPECT_THROW(DensityGrid(g, v), Error);
}

TEST(DensityGrid, CachedMomentsMatchTrapezoid) {
  const GridSpec g(12.0, 8192);
  std::vector<double> v(g.points());
  for (std::size_t j = 0; j < g.points(); ++j) {
    const double x = g.node(j) - 0.7;
    v[j] = std::exp(-x * x / 3.0);
  }
  const auto f = renormalize(g, v);
  const long double m = trapezoid(g, [&](std::size_t j) { return g.node(j) * f[j]; });
  EXPECT_NEAR(f.mean(), static_cast<double>(m), 1e-9);
  EXPECT_NEAR(f.mean(), 0.7, 1e-9);
  EXPECT_NEAR(f.variance(), 1.5, 1e-9);
}

TEST(SupDistance, MismatchedGrids) {
  const GridSpec a(10.0, 256);
  const GridSpec b(11.0, 256);
  const auto f = renormalize(a, std::vector<double>(256, 1.0));
  const auto h = renormalize(b, std::vector<double>(256, 1.0));
  try {
    sup_distance(f, h);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GridMismatch);
  }
}
