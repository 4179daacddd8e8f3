#include "edmc/edm.hpp"
#include "edmc/sampling.hpp"
#include "edmc/sstress.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

using namespace edmc;
using edmc::testing::Rng;
using edmc::testing::frob_inner;

namespace {

Matrix toy_line() {
  Matrix Y(3, 1);
  Y << 0, 1, 5;
  return Y;
}

SstressProblem toy_problem() {
  return SstressProblem(Edm{squared_distances(toy_line())}, mask_from_pairs(3, {{0, 1}, {0, 2}, {1, 2}}));
}

SstressProblem random_problem(Rng& rng, Index n, Index d) {
  const Edm D{squared_distances(rng.gauss(n, d))};
  const SampleMask mask = sample_bernoulli(n, 0.6, rng.gen());
  Matrix W = Matrix::Ones(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) W(i, j) = W(j, i) = rng.uniform(0.2, 1.0);
  Edm noisy = D;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) noisy.data(i, j) = noisy.data(j, i) = D.data(i, j) * rng.uniform(0.9, 1.1);
  return SstressProblem(noisy, mask, WeightMatrix{W});
}

Vector flatten(const Matrix& Z) {
  Vector z(Z.size());
  for (Index i = 0; i < Z.rows(); ++i)
    for (Index a = 0; a < Z.cols(); ++a) z(i * Z.cols() + a) = Z(i, a);
  return z;
}

}  // namespace

TEST(Cost, ToyValues) {
  const SstressProblem pr = toy_problem();
  EXPECT_EQ(pr.cost(toy_line()), 0.0);
  // Both triangles: 1/2 * 2 * (1 + 625 + 256).
  EXPECT_DOUBLE_EQ(pr.cost(Matrix::Zero(3, 1)), 882.0);
  EXPECT_TRUE(pr.unit_weights());
}

TEST(Cost, MaskedEntriesAreIgnored) {
  Rng rng(1);
  const Matrix Y = rng.gauss(6, 2);
  Matrix De = squared_distances(Y);
  De(0, 5) = De(5, 0) = 1e6;  // unobserved pair
  const SstressProblem pr(Edm{De}, mask_from_pairs(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}}));
  EXPECT_LT(pr.cost(Y), 1e-20);
}

TEST(Cost, FromDenseAddsOffsetAndDropsDiagonal) {
  Rng rng(2);
  const Matrix Y = rng.gauss(5, 2);
  Matrix H = Matrix::Ones(5, 5);
  const SstressProblem pr = SstressProblem::from_dense(squared_distances(Y), H, 3.5);
  EXPECT_NEAR(pr.cost(Y), 3.5, 1e-12);
  EXPECT_EQ(pr.weights().diagonal().norm(), 0.0);
  EXPECT_FALSE(pr.mask().has_value());
}

TEST(Gradient, VanishesAtCompleteNoiselessMinimizer) {
  Rng rng(3);
  const Matrix Y = rng.gauss(20, 2);
  const SstressProblem pr(Edm{squared_distances(Y)}, sample_bernoulli(20, 1.0, 1));
  EXPECT_LT(pr.egrad(Y).norm(), 1e-10 * (1 + Y.squaredNorm()));
}

TEST(Gradient, MatchesCentralDifferences) {
  Rng rng(4);
  for (int t = 0; t < 10; ++t) {
    const Index n = 5 + 3 * t, d = 1 + t % 4;
    const SstressProblem pr = random_problem(rng, n, d);
    const Matrix Y = rng.gauss(n, d), Z = rng.gauss(n, d);
    const double h = 1e-5;
    const double fd = (pr.cost(Y + h * Z) - pr.cost(Y - h * Z)) / (2 * h);
    const double an = frob_inner(pr.egrad(Y), Z);
    EXPECT_LT(std::abs(fd - an) / (1 + std::abs(an)), 1e-6);
    const CostGrad cg = pr.cost_and_grad(Y);
    EXPECT_DOUBLE_EQ(cg.cost, pr.cost(Y));
    EXPECT_LT((cg.egrad - pr.egrad(Y)).norm(), 1e-12 * (1 + cg.egrad.norm()));
  }
}

TEST(Hessian, ZeroDirectionGivesZero) {
  Rng rng(5);
  const SstressProblem pr = random_problem(rng, 8, 2);
  EXPECT_EQ(pr.ehess_apply(rng.gauss(8, 2), Matrix::Zero(8, 2)).norm(), 0.0);
}

TEST(Hessian, MatchesGradientDifferences) {
  Rng rng(6);
  for (int t = 0; t < 10; ++t) {
    const Index n = 6 + 2 * t, d = 1 + t % 3;
    const SstressProblem pr = random_problem(rng, n, d);
    const Matrix Y = rng.gauss(n, d), Z = rng.gauss(n, d);
    const double h = 1e-5;
    const Matrix fd = (pr.egrad(Y + h * Z) - pr.egrad(Y - h * Z)) / (2 * h);
    const Matrix an = pr.ehess_apply(Y, Z);
    EXPECT_LT((fd - an).norm() / (1 + an.norm()), 1e-5);
  }
}

TEST(Hessian, BlocksAgreeWithOperatorAndAreSymmetric) {
  Rng rng(7);
  for (int t = 0; t < 10; ++t) {
    const Index n = 4 + t, d = 1 + t % 3;
    const SstressProblem pr = random_problem(rng, n, d);
    const Matrix Y = rng.gauss(n, d), Z = rng.gauss(n, d);
    const Matrix H = pr.hessian_blocks(Y);
    EXPECT_LT((H - H.transpose()).norm(), 1e-12 * (1 + H.norm()));
    EXPECT_LT((H * flatten(Z) - flatten(pr.ehess_apply(Y, Z))).norm(), 1e-10 * (1 + H.norm() * Z.norm()));
  }
}

TEST(Hessian, ToyMinimumIsPsd) {
  const SstressProblem pr = toy_problem();
  const Matrix H = pr.hessian_blocks(toy_line());
  EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(H).eigenvalues().minCoeff(), -1e-8);
  EXPECT_TRUE(hessian_psd_at(pr, toy_line()));
}

TEST(Hessian, ToyNearOriginIsIndefinite) {
  const SstressProblem pr = toy_problem();
  Matrix Y(3, 1);
  Y << 0.01, -0.02, 0.015;
  EXPECT_FALSE(hessian_psd_at(pr, Y));
}

TEST(Hessian, PsdPredicate) {
  EXPECT_TRUE(hessian_is_psd(Matrix::Identity(3, 3)));
  Matrix M(2, 2);
  M << 1, 0, 0, -1;
  EXPECT_FALSE(hessian_is_psd(M));
}

TEST(Hessian, LanczosBracketsDenseSpectrum) {
  Rng rng(8);
  const SstressProblem pr = random_problem(rng, 25, 2);
  const Matrix Y = rng.gauss(25, 2);
  const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(pr.hessian_blocks(Y)).eigenvalues();
  const auto [lo, hi] = hessian_extremes_lanczos(pr, Y, 50);
  EXPECT_NEAR(lo, ev.minCoeff(), 1e-6 * ev.cwiseAbs().maxCoeff());
  EXPECT_NEAR(hi, ev.maxCoeff(), 1e-6 * ev.cwiseAbs().maxCoeff());
}

TEST(LineScalars, DescentSlopeAtZero) {
  Rng rng(9);
  const SstressProblem pr = random_problem(rng, 10, 2);
  const Matrix Y = rng.gauss(10, 2), g = pr.egrad(Y);
  const LineValue lv = pr.ls_scalars(Y, -g, 0.0);
  EXPECT_NEAR(lv.slope, -g.squaredNorm(), 1e-10 * g.squaredNorm());
  EXPECT_LT(lv.slope, 0.0);
  EXPECT_DOUBLE_EQ(lv.value, pr.cost(Y));
}

TEST(LineScalars, QuarticReproducesCostAlongTheLine) {
  Rng rng(10);
  const SstressProblem pr = random_problem(rng, 12, 3);
  const Matrix Y = rng.gauss(12, 3), eta = rng.gauss(12, 3);
  const auto c = pr.line_polynomial(Y, eta);
  for (double a : {-1.0, 0.0, 0.3, 1.0, 2.5}) {
    const double poly = c[0] + a * (c[1] + a * (c[2] + a * (c[3] + a * c[4])));
    const double direct = pr.cost(Y + a * eta);
    EXPECT_NEAR(poly, direct, 1e-9 * (1 + std::abs(direct)));
    const double dpoly = c[1] + a * (2 * c[2] + a * (3 * c[3] + a * 4 * c[4]));
    EXPECT_NEAR(pr.ls_scalars(Y, eta, a).slope, dpoly, 1e-9 * (1 + std::abs(dpoly)));
  }
}

TEST(Problem, RejectsShapeMismatch) {
  EXPECT_THROW(SstressProblem(Edm{Matrix::Zero(3, 3)}, sample_bernoulli(4, 1.0, 1)), std::invalid_argument);
}
