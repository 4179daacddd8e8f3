#include "edmc/edm.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace edmc {

namespace {

void require_square(const Matrix& M, const char* what) {
  if (M.rows() != M.cols()) throw std::invalid_argument(std::string(what) + ": matrix must be square");
}

}  // namespace

Matrix SampleMask::indicator() const {
  Matrix M = Matrix::Zero(n, n);
  for (const auto& [i, j] : pairs) {
    M(i, j) = 1.0;
    M(j, i) = 1.0;
  }
  return M;
}

double SampleMask::density() const {
  if (n == 0) return 0.0;
  return 2.0 * static_cast<double>(pairs.size()) / (static_cast<double>(n) * static_cast<double>(n));
}

bool is_hollow_symmetric(const Matrix& D, double tol) {
  if (D.rows() != D.cols()) return false;
  const double scale = std::max(1.0, D.cwiseAbs().maxCoeff());
  if ((D - D.transpose()).cwiseAbs().maxCoeff() > tol * scale) return false;
  return D.diagonal().cwiseAbs().maxCoeff() <= tol * scale;
}

Matrix g_operator(const Matrix& G) {
  require_square(G, "g_operator");
  const Index n = G.rows();
  const Vector dg = G.diagonal();
  Matrix D = -2.0 * G;
  D.colwise() += dg;
  D.rowwise() += dg.transpose();
  for (Index i = 0; i < n; ++i) D(i, i) = dg(i) + dg(i) - 2.0 * G(i, i);
  return D;
}

Matrix g_adjoint(const Matrix& D) {
  require_square(D, "g_adjoint");
  Matrix out = -2.0 * D;
  out.diagonal() += 2.0 * D.rowwise().sum();
  return out;
}

Matrix squared_distances(const Matrix& Y) {
  const Vector sq = Y.rowwise().squaredNorm();
  Matrix D = -2.0 * (Y * Y.transpose());
  D.colwise() += sq;
  D.rowwise() += sq.transpose();
  D.diagonal().setZero();
  return D;
}

Edm gram_to_edm(const GramMatrix& G) { return Edm{g_operator(G.data)}; }

Matrix centering_matrix(Index n) {
  return Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
}

Matrix center_rows(const Matrix& Y) {
  Matrix out = Y;
  out.rowwise() -= Y.colwise().mean();
  return out;
}

GramMatrix edm_to_gram(const Edm& D) {
  require_square(D.data, "edm_to_gram");
  // -JDJ/2 without forming J: subtract row and column means, add back the grand mean.
  const Vector row_mean = D.data.rowwise().mean();
  const Vector col_mean = D.data.colwise().mean().transpose();
  const double grand = D.data.mean();
  Matrix G = D.data;
  G.colwise() -= row_mean;
  G.rowwise() -= col_mean.transpose();
  G.array() += grand;
  G *= -0.5;
  return GramMatrix{0.5 * (G + G.transpose())};
}

MdsResult classical_mds(const Edm& D, Index d, double tol) {
  const Index n = D.size();
  if (d < 1 || d > n) throw std::invalid_argument("classical_mds: dimension out of range");
  const GramMatrix G = edm_to_gram(D);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(G.data);
  // Eigen sorts ascending; flip to descending.
  const Vector evals = eig.eigenvalues().reverse();
  const Matrix evecs = eig.eigenvectors().rowwise().reverse();

  MdsResult out;
  out.eigenvalues = evals;
  const double total = evals.cwiseAbs().sum();
  const double scale = std::max(1.0, evals.cwiseAbs().maxCoeff());
  Matrix Y(n, d);
  for (Index k = 0; k < d; ++k) {
    const double lam = evals(k);
    if (lam < -tol * scale) out.negative_leading = true;
    Y.col(k) = evecs.col(k) * std::sqrt(std::max(lam, 0.0));
  }
  out.truncated_mass = total > 0.0 ? evals.tail(n - d).cwiseAbs().sum() / total : 0.0;
  out.truncated = out.truncated_mass > tol;
  out.points.data = center_rows(Y);
  out.points.centered = true;
  return out;
}

}  // namespace edmc
