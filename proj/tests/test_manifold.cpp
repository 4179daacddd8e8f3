#include "edmc/edm.hpp"
#include "edmc/manifold.hpp"
#include "edmc/sampling.hpp"
#include "edmc/solvers.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <Eigen/LU>

using namespace edmc;
using edmc::testing::Rng;

namespace {

const Metric kMetrics[] = {Metric::G1, Metric::G2};
const Index kDims[] = {1, 2, 3, 5};

}  // namespace

TEST(Inner, ZeroDirectionsGiveZero) {
  Rng rng(1);
  const Matrix Y = rng.gauss(6, 2), Z = Matrix::Zero(6, 2);
  for (Metric m : kMetrics) EXPECT_EQ(inner(Y, Z, Z, m), 0.0);
}

TEST(Inner, MetricsCoincideOnOrthonormalColumns) {
  Rng rng(2);
  Eigen::HouseholderQR<Matrix> qr(rng.gauss(8, 3));
  const Matrix Y = qr.householderQ() * Matrix::Identity(8, 3);
  const Matrix Z1 = rng.gauss(8, 3), Z2 = rng.gauss(8, 3);
  EXPECT_NEAR(inner(Y, Z1, Z2, Metric::G1), inner(Y, Z1, Z2, Metric::G2), 1e-12);
}

TEST(Inner, ScaledMetricMatchesElementwiseTrace) {
  Rng rng(3);
  const Index n = 7, d = 3;
  const Matrix Y = rng.gauss(n, d), Z1 = rng.gauss(n, d), Z2 = rng.gauss(n, d);
  double naive = 0;
  for (Index a = 0; a < d; ++a)
    for (Index b = 0; b < d; ++b) {
      double yy = 0, zz = 0;
      for (Index i = 0; i < n; ++i) {
        yy += Y(i, a) * Y(i, b);
        zz += Z1(i, b) * Z2(i, a);
      }
      naive += yy * zz;
    }
  EXPECT_NEAR(inner(Y, Z1, Z2, Metric::G2), naive, 1e-12 * (1 + std::abs(naive)));
}

TEST(Sylvester, SymmetricCrossTermGivesZero) {
  Rng rng(4);
  const Matrix Y = rng.gauss(9, 3);
  // Y'Z = S symmetric.
  const Matrix Z = Y * (Y.transpose() * Y).inverse() * rng.sym(3);
  EXPECT_LT(solve_sylvester_skew(Y, Z).norm(), 1e-10);
}

TEST(Sylvester, OneDimensionalIsZero) {
  Rng rng(5);
  EXPECT_EQ(solve_sylvester_skew(rng.gauss(5, 1), rng.gauss(5, 1)), Matrix::Zero(1, 1));
}

TEST(Sylvester, MatchesKroneckerSolveInThreeDimensions) {
  Rng rng(6);
  const Matrix Y = rng.gauss(10, 3), Z = rng.gauss(10, 3);
  const Matrix Om = solve_sylvester_skew(Y, Z);
  EXPECT_LT((Om + Om.transpose()).norm(), 1e-14);
  // vec(Om M + M Om) = (M kron I + I kron M) vec(Om); solve the full 9x9 system then read the skew part.
  const Matrix M = Y.transpose() * Y, I = Matrix::Identity(3, 3);
  Matrix K(9, 9);
  for (Index a = 0; a < 3; ++a)
    for (Index b = 0; b < 3; ++b) K.block(3 * a, 3 * b, 3, 3) = M(a, b) * I + (a == b ? M : Matrix::Zero(3, 3));
  const Matrix R = Y.transpose() * Z - Z.transpose() * Y;
  const Vector x = K.fullPivLu().solve(Eigen::Map<const Vector>(R.data(), 9));
  const Matrix ref = Eigen::Map<const Matrix>(x.data(), 3, 3);
  EXPECT_LT((ref - Om).norm(), 1e-10 * (1 + Om.norm()));
  EXPECT_LT((Om * M + M * Om - R).norm(), 1e-10 * R.norm());
}

TEST(Projections, VerticalInputStaysVertical) {
  Rng rng(7);
  for (Metric m : kMetrics)
    for (Index d : kDims) {
      const Matrix Y = rng.gauss(12, d), Z = Y * rng.skew(d);
      EXPECT_LT((project_vertical(Y, Z, m) - Z).norm(), 1e-10 * (1 + Z.norm()));
      EXPECT_LT(project_horizontal(Y, Z, m).dir.norm(), 1e-10 * (1 + Z.norm()));
    }
}

TEST(Projections, CompleteIdempotentAndOrthogonal) {
  Rng rng(8);
  for (Metric m : kMetrics)
    for (Index d : kDims) {
      const Matrix Y = rng.gauss(15, d), Z = rng.gauss(15, d);
      const Matrix V = project_vertical(Y, Z, m);
      const HorizontalVector H = project_horizontal(Y, Z, m);
      EXPECT_LT((V + H.dir - Z).norm(), 1e-10 * Z.norm());
      EXPECT_LT((project_horizontal(Y, H.dir, m).dir - H.dir).norm(), 1e-10 * Z.norm());
      const double scale = m == Metric::G1 ? Z.squaredNorm() : Z.squaredNorm() * Y.squaredNorm();
      EXPECT_LT(std::abs(inner(Y, V, H.dir, m)), 1e-10 * scale);
      EXPECT_LT(horizontal_defect(Y, H.dir, m), 1e-10);
    }
}

TEST(Gradient, ZeroEuclideanGradientGivesZero) {
  Rng rng(9);
  const Matrix Y = rng.gauss(6, 2);
  for (Metric m : kMetrics) EXPECT_EQ(riemannian_gradient(Y, Matrix::Zero(6, 2), m).dir, Matrix::Zero(6, 2));
}

TEST(Gradient, RepresentsEuclideanDifferential) {
  Rng rng(10);
  const Matrix Y = rng.gauss(8, 3), G = rng.gauss(8, 3), Z = rng.gauss(8, 3);
  for (Metric m : kMetrics)
    EXPECT_NEAR(inner(Y, riemannian_gradient(Y, G, m).dir, Z, m), edmc::testing::frob_inner(G, Z), 1e-10 * G.norm() * Z.norm());
}

TEST(Retract, ZeroStepAndAffineForm) {
  Rng rng(11);
  const Matrix Y = rng.gauss(7, 2), Y2 = rng.gauss(7, 2);
  EXPECT_EQ(retract(Y, rng.gauss(7, 2), 0.0).point, Y);
  EXPECT_LT((retract(Y, Y2 - Y, 1.0).point - Y2).norm(), 1e-14);
  EXPECT_TRUE(retract(Y, -Y, 1.0).rank_deficient);
}

TEST(Transport, HorizontalUnchangedVerticalKilled) {
  Rng rng(12);
  for (Metric m : kMetrics) {
    const Matrix Yto = rng.gauss(10, 3);
    const HorizontalVector h = project_horizontal(Yto, rng.gauss(10, 3), m);
    EXPECT_LT((transport(Yto, h, m).dir - h.dir).norm(), 1e-10 * h.dir.norm());
    const HorizontalVector v{Yto, Yto * rng.skew(3), m};
    EXPECT_LT(transport(Yto, v, m).dir.norm(), 1e-10 * v.dir.norm());
    const HorizontalVector moved{rng.gauss(10, 3), rng.gauss(10, 3), m};
    EXPECT_LT(horizontal_defect(Yto, transport(Yto, moved, m).dir, m), 1e-10);
  }
}

TEST(Transport, RejectsMetricMismatch) {
  Rng rng(13);
  const HorizontalVector h{rng.gauss(4, 2), rng.gauss(4, 2), Metric::G1};
  EXPECT_THROW(transport(h.base, h, Metric::G2), std::invalid_argument);
}

TEST(MetricGram, RegularizesNearSingularAndRejectsZero) {
  Matrix Y(4, 2);
  Y << 1, 0, 0, 1e-7, 1, 0, 0, 0;
  EXPECT_TRUE(metric_gram(Y).regularized);
  EXPECT_THROW(metric_gram(Matrix::Zero(4, 2)), std::domain_error);
  EXPECT_FALSE(full_column_rank(Matrix::Zero(4, 2)));
}

TEST(Gauge, CostTracesInvariantUnderRotation) {
  Rng rng(14);
  for (Metric m : kMetrics)
    for (Index d : kDims) {
      const Matrix Ys = rng.gauss(14, d);
      const SstressProblem pr(Edm{squared_distances(Ys)}, sample_bernoulli(14, 0.7, 3));
      SolverConfig cfg = SolverConfig::noiseless();
      cfg.metric = m;
      cfg.imax = 40;
      const Matrix Y0 = rng.gauss(14, d);
      const TrialReport a = rcg(pr, Y0, cfg), b = rcg(pr, Y0 * rng.orthogonal(d), cfg);
      ASSERT_EQ(a.cost_trace.size(), b.cost_trace.size());
      for (std::size_t k = 0; k < a.cost_trace.size(); ++k)
        EXPECT_NEAR(a.cost_trace[k], b.cost_trace[k], 1e-8 * (1 + a.cost_trace[k]));
    }
}
