#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "gpdepth/depthnorm.hpp"
#include "helpers.hpp"

namespace gpdepth {
namespace {

using testing::depth_of;
using testing::random_depth;

// Independent reference: sort-based median, explicit loops.
double ref_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double ref_ssi(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = ref_median(x), my = ref_median(y);
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += std::abs(x[i] - mx);
    sy += std::abs(y[i] - my);
  }
  sx = std::max(sx / x.size(), 1e-6);
  sy = std::max(sy / y.size(), 1e-6);
  double acc = 0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += std::abs((x[i] - mx) / sx - (y[i] - my) / sy);
  return acc / x.size();
}

TEST(SsiStats, OddCount) {
  const SsiStats s = ssi_stats(depth_of({1, 2, 3, 4, 5}));
  EXPECT_DOUBLE_EQ(s.mu, 3.0);
  EXPECT_DOUBLE_EQ(s.sigma, 1.2);
}

TEST(SsiStats, EvenCountAveragesCentralPair) {
  const SsiStats s = ssi_stats(depth_of({4, 1, 3, 2}));
  EXPECT_DOUBLE_EQ(s.mu, 2.5);
  EXPECT_DOUBLE_EQ(s.sigma, 1.0);
}

TEST(SsiStats, ConstantMapHitsFloor) {
  const SsiStats s = ssi_stats(depth_of({7, 7, 7, 7}));
  EXPECT_EQ(s.mu, 7.0);
  EXPECT_EQ(s.sigma, kSigmaFloor);
}

TEST(SsiStats, IgnoresMaskedPixels) {
  DepthMap d = depth_of({1, 2, 100, 3});
  d.mask[2] = 0;
  EXPECT_DOUBLE_EQ(ssi_stats(d).mu, 2.0);
  EXPECT_THROW(ssi_stats(DepthMap(3, 1)), DataError);
}

TEST(SsiNormalize, Example) {
  const DepthMap d = depth_of({1, 2, 3, 4, 5});
  const DepthMap n = ssi_normalize(d, ssi_stats(d));
  const double expected[] = {-5.0 / 3, -5.0 / 6, 0.0, 5.0 / 6, 5.0 / 3};
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(n.values[i], expected[i], 1e-15);
}

TEST(SsiNormalize, ZeroMedianUnitDeviation) {
  const DepthMap d = random_depth(17, 9, 3);
  const SsiStats s = ssi_stats(ssi_normalize(d, ssi_stats(d)));
  EXPECT_NEAR(s.mu, 0.0, 1e-12);
  EXPECT_NEAR(s.sigma, 1.0, 1e-12);
}

TEST(SsiNormalize, AffineInvariant) {
  const DepthMap d = random_depth(12, 12, 4);
  const DepthMap e = apply_affine(d, {2.0, 3.0});
  const DepthMap nd = ssi_normalize(d, ssi_stats(d)), ne = ssi_normalize(e, ssi_stats(e));
  for (std::size_t i = 0; i < nd.values.size(); ++i) EXPECT_NEAR(nd.values[i], ne.values[i], 1e-12);
}

TEST(SsiLoss, SelfIsZero) {
  const DepthMap d = random_depth(20, 20, 5);
  EXPECT_EQ(ssi_loss(d, d), 0.0);
}

TEST(SsiLoss, ReversedRamp) {
  // mu = 2, sigma = 2/3 on both sides; normalized -1.5, 0, 1.5 against 1.5, 0, -1.5
  EXPECT_NEAR(ssi_loss(depth_of({1, 2, 3}), depth_of({3, 2, 1})), 2.0, 1e-15);
}

TEST(SsiLoss, MatchesBruteForce) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const DepthMap a = random_depth(9, 7, seed), b = random_depth(9, 7, seed + 100);
    EXPECT_NEAR(ssi_loss(a, b), ref_ssi(a.values, b.values), 1e-12);
  }
}

TEST(SsiLoss, UsesMaskIntersection) {
  DepthMap a = depth_of({1, 2, 3, 50}), b = depth_of({1, 2, 3, 4});
  a.mask[3] = 0;
  EXPECT_EQ(ssi_loss(a, b), 0.0);
  DepthMap c = depth_of({1, 2});
  c.mask = {0, 0};
  EXPECT_THROW(ssi_loss(c, depth_of({1, 2})), DataError);
}

TEST(SsiLoss, AffineInvariantProperty) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ua(0.1, 10.0), ub(-0.4, 5.0);
  for (int k = 0; k < 200; ++k) {
    const DepthMap d = random_depth(11, 13, rng()), ds = random_depth(11, 13, rng());
    const double a = ua(rng), b = ub(rng);
    EXPECT_NEAR(ssi_loss(apply_affine(d, {a, b}), ds), ssi_loss(d, ds), 1e-9);
  }
}

TEST(Lstsq, ExactFit) {
  const AffineCoeffs c = lstsq_align(depth_of({1, 2, 3}), depth_of({3, 5, 7}));
  EXPECT_NEAR(c.a, 2.0, 1e-14);
  EXPECT_NEAR(c.b, 1.0, 1e-14);
}

TEST(Lstsq, SelfIsIdentity) {
  const DepthMap d = random_depth(10, 10, 9);
  const AffineCoeffs c = lstsq_align(d, d);
  EXPECT_NEAR(c.a, 1.0, 1e-14);
  EXPECT_NEAR(c.b, 0.0, 1e-13);
}

TEST(Lstsq, NoisyConsistency) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> noise(0.0, 0.05);
  const DepthMap pred = random_depth(100, 100, 13, 1.0, 5.0);
  DepthMap ref = pred;
  for (auto& v : ref.values) v = 2.0 * v + 1.0 + noise(rng);
  const AffineCoeffs c = lstsq_align(pred, ref);
  EXPECT_NEAR(c.a, 2.0, 1e-2);
  EXPECT_NEAR(c.b, 1.0, 1e-2);
}

TEST(Lstsq, RecoversConstructedAffine) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> ua(0.2, 5.0), ub(-0.1, 3.0);
  for (int k = 0; k < 50; ++k) {
    const DepthMap d = random_depth(16, 16, rng(), 1.0, 4.0);
    const double a0 = ua(rng), b0 = ub(rng);
    const AffineCoeffs c = lstsq_align(d, apply_affine(d, {a0, b0}));
    EXPECT_NEAR(c.a, a0, 1e-9 * a0);
    EXPECT_NEAR(c.b, b0, 1e-9 * std::max(1.0, std::abs(b0)));
  }
}

TEST(Lstsq, SingularAndTooSmall) {
  EXPECT_THROW(lstsq_align(depth_of({2, 2, 2}), depth_of({1, 2, 3})), DomainError);
  EXPECT_THROW(lstsq_align(depth_of({2}), depth_of({1})), DataError);
}

TEST(ApplyAffine, Examples) {
  const DepthMap d = depth_of({1, 2});
  const DepthMap same = apply_affine(d, {});
  EXPECT_EQ(same.values, d.values);
  EXPECT_EQ(same.mask, d.mask);
  const DepthMap e = apply_affine(d, {2.0, 1.0});
  EXPECT_EQ(e.values[0], 3.0);
  EXPECT_EQ(e.values[1], 5.0);
  const DepthMap f = apply_affine(d, {1.0, -1.5});
  EXPECT_EQ(f.mask[0], 0);
  EXPECT_EQ(f.mask[1], 1);
  EXPECT_EQ(f.values[1], 0.5);
}

TEST(MedianScale, Examples) {
  const DepthMap d = random_depth(8, 8, 15);
  EXPECT_EQ(median_scale(d, d), 1.0);
  EXPECT_EQ(median_scale(d, apply_affine(d, {2.0, 0.0})), 2.0);
  EXPECT_EQ(median_scale(depth_of({1, 2, 4}), depth_of({2, 6, 4})), 2.0);
}

}  // namespace
}  // namespace gpdepth
