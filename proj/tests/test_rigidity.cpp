#include "edmc/harness/experiment.hpp"
#include "edmc/harness/probes.hpp"
#include "edmc/rigidity.hpp"
#include "edmc/sampling.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace edmc;
using edmc::testing::Rng;

namespace {

SampleMask complete(Index n) {
  std::vector<std::pair<Index, Index>> pairs;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  return mask_from_pairs(n, pairs);
}

}  // namespace

TEST(Rigidity, CompleteGraphIsGloballyRigid) {
  Rng rng(1);
  for (Index d : {1, 2, 3}) {
    const Index n = d + 4;
    const RigidityReport r = rigidity_probe(complete(n), rng.gauss(n, d));
    EXPECT_TRUE(r.generically_rigid);
    EXPECT_TRUE(r.generically_globally_rigid);
    EXPECT_EQ(r.rigidity_rank, n * d - d * (d + 1) / 2);
  }
}

TEST(Rigidity, PathIsNotRigidInThePlane) {
  Rng rng(2);
  std::vector<std::pair<Index, Index>> path;
  for (Index i = 0; i + 1 < 6; ++i) path.emplace_back(i, i + 1);
  const RigidityReport r = rigidity_probe(mask_from_pairs(6, path), rng.gauss(6, 2));
  EXPECT_FALSE(r.generically_rigid);
  EXPECT_FALSE(r.generically_globally_rigid);
  EXPECT_EQ(r.required_rank, 12 - 3);
}

TEST(Rigidity, TooFewEdgesShortCircuits) {
  Rng rng(3);
  const RigidityReport r = rigidity_probe(mask_from_pairs(5, {{0, 1}}), rng.gauss(5, 2));
  EXPECT_FALSE(r.generically_rigid);
  EXPECT_EQ(r.stress_nullity, -1);
}

TEST(Rigidity, TriangleWithPendantIsRigidButNotGloballyRigid) {
  // K4 minus one edge is minimally rigid in the plane, hence not globally rigid.
  Rng rng(4);
  const SampleMask m = mask_from_pairs(4, {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}});
  const RigidityReport r = rigidity_probe(m, rng.gauss(4, 2));
  EXPECT_TRUE(r.generically_rigid);
  EXPECT_FALSE(r.generically_globally_rigid);
}

TEST(RigidityMatrix, RowsAreEdgeDifferences) {
  Rng rng(5);
  const Matrix Y = rng.gauss(3, 2);
  const Matrix R = rigidity_matrix(mask_from_pairs(3, {{0, 2}}), Y);
  ASSERT_EQ(R.rows(), 1);
  ASSERT_EQ(R.cols(), 6);
  const Eigen::RowVector2d diff = Y.row(0) - Y.row(2);
  EXPECT_LT((R.block(0, 0, 1, 2) - diff).norm(), 1e-15);
  EXPECT_LT((R.block(0, 4, 1, 2) + diff).norm(), 1e-15);
  EXPECT_LT(R.block(0, 2, 1, 2).norm(), 1e-15);
}

TEST(RigidityCurve, RatesIncreaseWithRadius) {
  harness::ExperimentSpec spec;
  spec.sweep_axis = "r";
  spec.sweep_values = {0.15, 0.5};
  spec.trials = 20;
  const auto rows = harness::rigidity_curve(spec);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_LT(rows[0].globally_rigid_rate, rows[1].globally_rigid_rate);
  EXPECT_EQ(rows[1].globally_rigid_rate, 1.0);
  EXPECT_GE(rows[1].rigid_rate, rows[1].globally_rigid_rate);
}
