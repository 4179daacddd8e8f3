#include "edmc/edm.hpp"
#include "edmc/harness/experiment.hpp"
#include "edmc/sampling.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

using namespace edmc;
using edmc::testing::Rng;

namespace {

Edm unit_distances(Index n) {
  Matrix D = Matrix::Ones(n, n);
  D.diagonal().setZero();
  return Edm{D};
}

harness::Instance paper_scene(double r, std::uint64_t seed) {
  harness::ExperimentSpec spec;
  spec.radius = r;
  return harness::make_instance(spec, seed);
}

}  // namespace

TEST(UnitBall, LargeRadiusGivesCompleteMask) {
  Rng rng(1);
  const Edm D{squared_distances(rng.gauss(12, 2))};
  const SampleMask m = sample_unit_ball(D, 1e6, {}, false);
  EXPECT_EQ(m.size(), 12u * 11u / 2u);
  EXPECT_EQ(m.scheme, SamplingScheme::UnitBall);
}

TEST(UnitBall, ZeroRadiusKeepsOnlyAnchorClique) {
  Rng rng(2);
  const Edm D{squared_distances(rng.gauss(10, 2))};
  EXPECT_EQ(sample_unit_ball(D, 0.0, {0, 1, 2, 3}, true).size(), 6u);
  EXPECT_EQ(sample_unit_ball(D, 0.0, {0, 1, 2, 3}, false).size(), 0u);
}

TEST(UnitBall, PaperSceneMatchesBruteForce) {
  const harness::Instance inst = paper_scene(0.35, 7);
  const Matrix& Y = inst.scene.positions.data;
  ASSERT_EQ(Y.rows(), 104);
  const std::set<Index> anchors(inst.scene.anchors.begin(), inst.scene.anchors.end());
  ASSERT_EQ(anchors.size(), 4u);
  std::size_t expected = 0;
  for (Index i = 0; i < 104; ++i)
    for (Index j = i + 1; j < 104; ++j) {
      const bool anchor_pair = anchors.count(i) && anchors.count(j);
      if ((Y.row(i) - Y.row(j)).norm() < 0.35 || anchor_pair) ++expected;
    }
  EXPECT_EQ(inst.mask.size(), expected);
  EXPECT_DOUBLE_EQ(inst.mask.density(), 2.0 * static_cast<double>(expected) / (104.0 * 104.0));
}

TEST(UnitBall, RejectsNegativeRadius) {
  EXPECT_THROW(sample_unit_ball(unit_distances(3), -1.0, {}, false), std::invalid_argument);
}

TEST(Bernoulli, ExtremeRates) {
  EXPECT_EQ(sample_bernoulli(40, 1.0, 3).size(), 40u * 39u / 2u);
  EXPECT_EQ(sample_bernoulli(40, 0.0, 3).size(), 0u);
  EXPECT_THROW(sample_bernoulli(4, 1.5, 1), std::invalid_argument);
}

TEST(Bernoulli, PairRateWithinThreeStandardErrors) {
  const Index n = 1000;
  const double pairs = n * (n - 1) / 2.0;
  double total = 0;
  for (std::uint64_t s = 0; s < 100; ++s) total += static_cast<double>(sample_bernoulli(n, 0.1, s).size()) / pairs;
  const double se = std::sqrt(0.1 * 0.9 / (pairs * 100));
  EXPECT_NEAR(total / 100, 0.1, 3 * se);
}

TEST(Bernoulli, PairsSortedAndUnique) {
  const SampleMask m = sample_bernoulli(50, 0.3, 9);
  for (std::size_t k = 0; k < m.size(); ++k) {
    EXPECT_LT(m.pairs[k].first, m.pairs[k].second);
    if (k) EXPECT_LT(m.pairs[k - 1], m.pairs[k]);
  }
}

TEST(Bernoulli, SameSeedSameMask) {
  EXPECT_EQ(sample_bernoulli(60, 0.2, 5).pairs, sample_bernoulli(60, 0.2, 5).pairs);
  EXPECT_NE(sample_bernoulli(60, 0.2, 5).pairs, sample_bernoulli(60, 0.2, 6).pairs);
}

TEST(BernoulliEntrywise, PairRateIsUnionOfTwoDraws) {
  const Index n = 400;
  const double p = 0.1, pairs = n * (n - 1) / 2.0;
  double total = 0;
  for (std::uint64_t s = 0; s < 50; ++s)
    total += static_cast<double>(sample_bernoulli_entrywise(n, p, s).size()) / pairs;
  const double q = 1 - (1 - p) * (1 - p);
  EXPECT_NEAR(total / 50, q, 3 * std::sqrt(q * (1 - q) / (pairs * 50)));
  EXPECT_EQ(sample_bernoulli_entrywise(20, 1.0, 1).size(), 190u);
  EXPECT_EQ(sample_bernoulli_entrywise(20, 0.0, 1).size(), 0u);
}

TEST(MaskFromPairs, NormalizesOrderAndValidates) {
  const SampleMask m = mask_from_pairs(4, {{2, 1}, {0, 3}, {1, 2}});
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m.pairs[0], (std::pair<Index, Index>{0, 3}));
  EXPECT_EQ(m.pairs[1], (std::pair<Index, Index>{1, 2}));
  EXPECT_THROW(mask_from_pairs(3, {{0, 3}}), std::invalid_argument);
  EXPECT_THROW(mask_from_pairs(3, {{1, 1}}), std::invalid_argument);
  const Matrix I = m.indicator();
  EXPECT_EQ(I(0, 3), 1.0);
  EXPECT_EQ(I(3, 0), 1.0);
  EXPECT_EQ(I.sum(), 4.0);
}

TEST(RssiNoise, ZeroSigmaIsIdentity) {
  Rng rng(4);
  const Edm D{squared_distances(rng.gauss(8, 2))};
  EXPECT_EQ(apply_rssi_noise(D, 0.0, 2.0, 1).data, D.data);
}

TEST(RssiNoise, ReproducibleAndHollow) {
  Rng rng(5);
  const Edm D{squared_distances(rng.gauss(10, 2))};
  const Edm a = apply_rssi_noise(D, 1.0, 2.0, 42), b = apply_rssi_noise(D, 1.0, 2.0, 42);
  EXPECT_EQ(a.data, b.data);
  EXPECT_TRUE(is_hollow_symmetric(a.data));
  EXPECT_NE(a.data, D.data);
}

TEST(RssiNoise, MeanDistanceMatchesScalarSimulation) {
  const double sigma = 1.0, gamma = 2.0;
  const Index n = 448;  // about 1e5 pairs
  const Edm out = apply_rssi_noise(unit_distances(n), sigma, gamma, 77);
  double mean = 0;
  int count = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j, ++count) mean += std::sqrt(out.data(i, j));
  mean /= count;

  const double s = kPathLossEta * gamma;
  std::mt19937_64 gen(1234);
  std::normal_distribution<double> x(0.0, sigma);
  double oracle = 0;
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) oracle += std::exp(-x(gen) / s);
  oracle = std::exp(sigma * sigma / (2 * s * s)) * std::exp(-sigma * sigma / (2 * s * s)) * oracle / draws;
  EXPECT_NEAR(mean / oracle, 1.0, 0.01);
  EXPECT_NEAR(rssi_factor(0.0, sigma, gamma), std::exp(-sigma * sigma / (2 * s * s)), 1e-15);
}

TEST(Outliers, ZeroRateUnchanged) {
  const SampleMask m = sample_bernoulli(30, 0.5, 1);
  const Edm D = unit_distances(30);
  EXPECT_EQ(inject_outliers(D, m, 0.0, 0.5, 3).data, D.data);
}

TEST(Outliers, FullRateShiftsEveryObservedEntry) {
  const SampleMask m = sample_bernoulli(30, 0.5, 1);
  const Edm D = unit_distances(30);
  const Edm out = inject_outliers(D, m, 1.0, 0.5, 3);
  for (const auto& [i, j] : m.pairs) {
    const double shift = out.data(i, j) - D.data(i, j);
    EXPECT_GE(shift, 1.0);
    EXPECT_LE(shift, 1.5);
    EXPECT_EQ(out.data(i, j), out.data(j, i));
  }
}

TEST(Outliers, TenPercentOfFiveHundredIsFifty) {
  std::vector<std::pair<Index, Index>> pairs;
  for (Index i = 0; i < 40 && pairs.size() < 500; ++i)
    for (Index j = i + 1; j < 40 && pairs.size() < 500; ++j) pairs.emplace_back(i, j);
  const SampleMask m = mask_from_pairs(40, pairs);
  ASSERT_EQ(m.size(), 500u);
  const Edm D = unit_distances(40);
  const Edm out = inject_outliers(D, m, 0.1, 0.5, 8);
  int changed = 0;
  for (Index i = 0; i < 40; ++i)
    for (Index j = i + 1; j < 40; ++j) changed += out.data(i, j) != D.data(i, j);
  EXPECT_EQ(changed, 50);
}

TEST(Weights, ExactDataGivesOnes) {
  Rng rng(6);
  const Edm D{squared_distances(rng.gauss(9, 2))};
  EXPECT_LT((build_weights(D, D).data - Matrix::Ones(9, 9)).norm(), 1e-15);
}

TEST(Weights, UnitDistanceErrorGivesInverseE) {
  Matrix De(2, 2), Dt(2, 2);
  De << 0, 4, 4, 0;  // distance 2
  Dt << 0, 1, 1, 0;  // distance 1
  EXPECT_NEAR(build_weights(Edm{De}, Edm{Dt}).data(0, 1), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(std::exp(-1.0), 0.3679, 1e-4);
}
