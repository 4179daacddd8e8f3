#include "edmc/rigidity.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <random>

namespace edmc {

Matrix rigidity_matrix(const SampleMask& mask, const Matrix& Y) {
  const Index d = Y.cols();
  Matrix R = Matrix::Zero(static_cast<Index>(mask.pairs.size()), Y.rows() * d);
  Index e = 0;
  for (const auto& [i, j] : mask.pairs) {
    const Eigen::RowVectorXd diff = Y.row(i) - Y.row(j);
    R.block(e, i * d, 1, d) = diff;
    R.block(e, j * d, 1, d) = -diff;
    ++e;
  }
  return R;
}

RigidityReport rigidity_probe(const SampleMask& mask, const Matrix& Y, std::uint64_t seed) {
  const Index n = Y.rows();
  const Index d = Y.cols();
  const auto edges = static_cast<Index>(mask.pairs.size());
  RigidityReport rep;

  // Small frameworks: rigid exactly when complete.
  if (n <= d + 1) {
    rep.required_rank = n * (n - 1) / 2;
    rep.rigidity_rank = edges;
    rep.generically_rigid = rep.generically_globally_rigid = (edges == rep.required_rank);
    return rep;
  }
  rep.required_rank = n * d - d * (d + 1) / 2;
  if (edges < rep.required_rank) return rep;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix P = Y;
  P.rowwise() -= Y.colwise().mean();
  double scale = std::sqrt(P.squaredNorm() / static_cast<double>(n * d));
  if (!(scale > 0.0)) scale = 1.0;
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < d; ++k) P(i, k) += 1e-2 * scale * normal(rng);

  const Matrix R = rigidity_matrix(mask, P);
  Eigen::BDCSVD<Matrix> svd(R, Eigen::ComputeThinU);
  const Vector& s = svd.singularValues();
  const double tol = 1e-8 * s(0);
  Index rank = 0;
  while (rank < s.size() && s(rank) > tol) ++rank;
  rep.rigidity_rank = rank;
  rep.generically_rigid = rank == rep.required_rank;
  if (!rep.generically_rigid) return rep;

  // Random equilibrium stress: project a random edge vector onto the left null space of R.
  Vector w(edges);
  for (Index e = 0; e < edges; ++e) w(e) = normal(rng);
  const Matrix Ur = svd.matrixU().leftCols(rank);
  w -= Ur * (Ur.transpose() * w);

  Matrix Omega = Matrix::Zero(n, n);
  Index e = 0;
  for (const auto& [i, j] : mask.pairs) {
    Omega(i, j) -= w(e);
    Omega(j, i) -= w(e);
    Omega(i, i) += w(e);
    Omega(j, j) += w(e);
    ++e;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(Omega, Eigen::EigenvaluesOnly);
  const Vector lam = eig.eigenvalues().cwiseAbs();
  const double lam_tol = 1e-8 * std::max(lam.maxCoeff(), 1e-300);
  rep.stress_nullity = (lam.array() <= lam_tol).count();
  rep.generically_globally_rigid = rep.stress_nullity == d + 1;
  return rep;
}

}  // namespace edmc
