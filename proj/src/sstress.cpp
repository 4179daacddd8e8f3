#include "edmc/sstress.hpp"

#include "edmc/edm.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <stdexcept>

namespace edmc {

namespace {

// 2 g*(S) Y = 4 (diag(S1) Y - S Y)
Matrix adjoint_times(const Matrix& S, const Matrix& Y) {
  Matrix out = -(S * Y);
  out += S.rowwise().sum().asDiagonal() * Y;
  return 4.0 * out;
}

}  // namespace

SstressProblem::SstressProblem(const Edm& De, const SampleMask& mask, const WeightMatrix& W) {
  const Index n = De.size();
  if (mask.n != n || W.data.rows() != n || W.data.cols() != n)
    throw std::invalid_argument("SstressProblem: shape mismatch");
  target_ = De.data;
  H_ = Matrix::Zero(n, n);
  for (const auto& [i, j] : mask.pairs) {
    const double w = W.data(i, j);
    H_(i, j) = H_(j, i) = w * w;
  }
  unit_weights_ = true;
  for (const auto& [i, j] : mask.pairs)
    if (W.data(i, j) != 1.0) unit_weights_ = false;
  mask_ = mask;
}

SstressProblem::SstressProblem(const Edm& De, const SampleMask& mask)
    : SstressProblem(De, mask, WeightMatrix{Matrix::Ones(De.size(), De.size())}) {}

SstressProblem SstressProblem::from_dense(Matrix target, Matrix weights, double offset) {
  if (target.rows() != target.cols() || weights.rows() != target.rows() || weights.cols() != target.cols())
    throw std::invalid_argument("SstressProblem::from_dense: shape mismatch");
  SstressProblem p;
  p.target_ = std::move(target);
  p.H_ = std::move(weights);
  p.H_.diagonal().setZero();
  p.offset_ = offset;
  return p;
}

Matrix SstressProblem::residual_weighted(const Matrix& Y) const {
  return H_.cwiseProduct(squared_distances(Y) - target_);
}

double SstressProblem::cost(const Matrix& Y) const {
  const Matrix R = squared_distances(Y) - target_;
  return 0.5 * (H_.array() * R.array().square()).sum() + offset_;
}

Matrix SstressProblem::egrad(const Matrix& Y) const { return adjoint_times(residual_weighted(Y), Y); }

CostGrad SstressProblem::cost_and_grad(const Matrix& Y) const {
  const Matrix R = squared_distances(Y) - target_;
  const Matrix S1 = H_.cwiseProduct(R);
  return CostGrad{0.5 * (S1.array() * R.array()).sum() + offset_, adjoint_times(S1, Y)};
}

Matrix SstressProblem::ehess_apply(const Matrix& Y, const Matrix& Z) const {
  const Matrix S1 = residual_weighted(Y);
  const Matrix YZ = Y * Z.transpose();
  const Matrix S2 = H_.cwiseProduct(g_operator(YZ + YZ.transpose()));
  return adjoint_times(S1, Z) + adjoint_times(S2, Y);
}

Matrix SstressProblem::hessian_blocks(const Matrix& Y) const {
  const Index n = Y.rows();
  const Index d = Y.cols();
  const Matrix F = squared_distances(Y) - target_;
  Matrix hess = Matrix::Zero(n * d, n * d);
  const Matrix I = Matrix::Identity(d, d);
  for (Index k = 0; k < n; ++k) {
    for (Index j = 0; j < n; ++j) {
      if (j == k || H_(k, j) == 0.0) continue;
      const Vector p = (Y.row(k) - Y.row(j)).transpose();
      const double h = H_(k, j);
      const Matrix outer = p * p.transpose();
      hess.block(k * d, k * d, d, d) += h * (4.0 * F(k, j) * I + 8.0 * outer);
      hess.block(k * d, j * d, d, d) += h * (-4.0 * F(k, j) * I - 8.0 * outer);
    }
  }
  return 0.5 * (hess + hess.transpose());
}

LineValue SstressProblem::ls_scalars(const Matrix& Y, const Matrix& eta, double alpha) const {
  const CostGrad cg = cost_and_grad(Y + alpha * eta);
  return LineValue{cg.cost, (cg.egrad.array() * eta.array()).sum()};
}

std::array<double, 5> SstressProblem::line_polynomial(const Matrix& Y, const Matrix& eta) const {
  // residual(alpha) = R0 + 2 alpha B + alpha^2 C
  const Matrix R0 = squared_distances(Y) - target_;
  const Matrix YE = Y * eta.transpose();
  const Matrix B = 0.5 * g_operator(YE + YE.transpose());
  const Matrix C = squared_distances(eta);
  const auto h = H_.array();
  std::array<double, 5> c{};
  c[0] = 0.5 * (h * R0.array().square()).sum() + offset_;
  c[1] = 2.0 * (h * B.array() * R0.array()).sum();
  c[2] = (h * (2.0 * B.array().square() + C.array() * R0.array())).sum();
  c[3] = 2.0 * (h * B.array() * C.array()).sum();
  c[4] = 0.5 * (h * C.array().square()).sum();
  return c;
}

bool hessian_is_psd(const Matrix& hess, double tol) {
  if (hess.rows() == 0) return true;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (hess + hess.transpose()), Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  return lo >= -tol * std::max(hi, 0.0);
}

std::pair<double, double> hessian_extremes_lanczos(const SstressProblem& problem, const Matrix& Y, int steps,
                                                   std::uint64_t seed) {
  const Index n = Y.rows();
  const Index d = Y.cols();
  const Index dim = n * d;
  const Index m = std::min<Index>(steps, dim);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix Q(dim, m + 1);
  Vector alpha = Vector::Zero(m), beta = Vector::Zero(m);
  Vector q(dim);
  for (Index i = 0; i < dim; ++i) q(i) = normal(rng);
  Q.col(0) = q.normalized();
  Index used = 0;
  for (Index k = 0; k < m; ++k) {
    const Matrix Z = Eigen::Map<const Matrix>(Q.col(k).data(), d, n).transpose();
    const Matrix HZ = problem.ehess_apply(Y, Z).transpose();
    Vector w = Eigen::Map<const Vector>(HZ.data(), dim);
    alpha(k) = Q.col(k).dot(w);
    // Full reorthogonalization keeps the Ritz values clean at this size.
    w -= Q.leftCols(k + 1) * (Q.leftCols(k + 1).transpose() * w);
    w -= Q.leftCols(k + 1) * (Q.leftCols(k + 1).transpose() * w);
    used = k + 1;
    beta(k) = w.norm();
    if (beta(k) < 1e-12 * std::abs(alpha(k)) + 1e-300) break;
    Q.col(k + 1) = w / beta(k);
  }
  Matrix T = Matrix::Zero(used, used);
  for (Index k = 0; k < used; ++k) {
    T(k, k) = alpha(k);
    if (k + 1 < used) T(k, k + 1) = T(k + 1, k) = beta(k);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(T, Eigen::EigenvaluesOnly);
  return {eig.eigenvalues().minCoeff(), eig.eigenvalues().maxCoeff()};
}

bool hessian_psd_at(const SstressProblem& problem, const Matrix& Y, double tol) {
  if (Y.rows() <= 500) return hessian_is_psd(problem.hessian_blocks(Y), tol);
  const auto [lo, hi] = hessian_extremes_lanczos(problem, Y);
  return lo >= -tol * std::max(hi, 0.0);
}

}  // namespace edmc
