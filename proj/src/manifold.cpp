#include "edmc/manifold.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace edmc {

namespace {

void require_same_shape(const Matrix& A, const Matrix& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols()) throw std::invalid_argument("manifold: shape mismatch");
}

Matrix skew(const Matrix& A) { return 0.5 * (A - A.transpose()); }

}  // namespace

MetricGram metric_gram(const Matrix& Y) {
  MetricGram mg;
  mg.gram = Y.transpose() * Y;
  if (!mg.gram.allFinite()) throw std::domain_error("metric_gram: non-finite Y'Y");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(mg.gram);
  const double top = eig.eigenvalues().maxCoeff();
  const double low = eig.eigenvalues().minCoeff();
  if (!(top > 0.0)) throw std::domain_error("metric_gram: singular Y'Y");
  Matrix M = mg.gram;
  if (low < 1e-10 * top) {
    M.diagonal().array() += 1e-10 * top;
    mg.regularized = true;
  }
  mg.inverse = M.llt().solve(Matrix::Identity(M.rows(), M.cols()));
  mg.inverse = 0.5 * (mg.inverse + mg.inverse.transpose());
  return mg;
}

double inner(const Matrix& Y, const Matrix& Z1, const Matrix& Z2, Metric metric) {
  require_same_shape(Z1, Z2);
  if (metric == Metric::G1) return (Z1.array() * Z2.array()).sum();
  require_same_shape(Y, Z1);
  const Matrix M = Y.transpose() * Y;
  return (M.array() * (Z1.transpose() * Z2).array()).sum();
}

double norm(const Matrix& Y, const Matrix& Z, Metric metric) {
  return std::sqrt(std::max(inner(Y, Z, Z, metric), 0.0));
}

Matrix solve_sylvester_skew(const Matrix& Y, const Matrix& Z) {
  require_same_shape(Y, Z);
  const Index d = Y.cols();
  if (d < 2) return Matrix::Zero(d, d);
  const Matrix M = Y.transpose() * Y;
  const Matrix rhs = Y.transpose() * Z - Z.transpose() * Y;

  // Coordinates over the basis E_ab = e_a e_b' - e_b e_a', a < b.
  const Index m = d * (d - 1) / 2;
  Matrix A(m, m);
  Vector b(m);
  Index col = 0;
  for (Index a = 0; a < d; ++a) {
    for (Index c = a + 1; c < d; ++c) {
      Matrix E = Matrix::Zero(d, d);
      E(a, c) = 1.0;
      E(c, a) = -1.0;
      const Matrix L = E * M + M * E;
      Index row = 0;
      for (Index i = 0; i < d; ++i)
        for (Index j = i + 1; j < d; ++j) A(row++, col) = L(i, j);
      ++col;
    }
  }
  Index row = 0;
  for (Index i = 0; i < d; ++i)
    for (Index j = i + 1; j < d; ++j) b(row++) = rhs(i, j);

  Eigen::FullPivLU<Matrix> lu(A);
  if (!lu.isInvertible()) throw std::domain_error("solve_sylvester_skew: singular Y'Y");
  const Vector x = lu.solve(b);
  Matrix Omega = Matrix::Zero(d, d);
  Index k = 0;
  for (Index i = 0; i < d; ++i)
    for (Index j = i + 1; j < d; ++j) {
      Omega(i, j) = x(k);
      Omega(j, i) = -x(k);
      ++k;
    }
  return Omega;
}

Matrix project_vertical(const Matrix& Y, const Matrix& Z, Metric metric) {
  require_same_shape(Y, Z);
  if (metric == Metric::G1) return Y * solve_sylvester_skew(Y, Z);
  const MetricGram mg = metric_gram(Y);
  return Y * skew(mg.inverse * (Y.transpose() * Z));
}

HorizontalVector project_horizontal(const Matrix& Y, const Matrix& Z, Metric metric) {
  return HorizontalVector{Y, Z - project_vertical(Y, Z, metric), metric};
}

double horizontal_defect(const Matrix& Y, const Matrix& Z, Metric metric) {
  const double scale = std::max(Y.norm() * Z.norm(), 1e-300);
  const Matrix S = Y.transpose() * Z;
  if (metric == Metric::G1) return (S - S.transpose()).norm() / scale;
  const MetricGram mg = metric_gram(Y);
  const Matrix T = mg.inverse * S;
  return (T - T.transpose()).norm() / (scale * mg.inverse.norm());
}

HorizontalVector riemannian_gradient(const Matrix& Y, const Matrix& egrad, Metric metric) {
  require_same_shape(Y, egrad);
  if (metric == Metric::G1) return HorizontalVector{Y, egrad, metric};
  const MetricGram mg = metric_gram(Y);
  return HorizontalVector{Y, egrad * mg.inverse, metric};
}

bool full_column_rank(const Matrix& Y, double rel_tol) {
  if (Y.cols() == 0) return false;
  Eigen::JacobiSVD<Matrix> svd(Y);
  const Vector& s = svd.singularValues();
  return s(0) > 0.0 && s(s.size() - 1) > rel_tol * s(0);
}

RetractResult retract(const Matrix& Y, const Matrix& eta, double t) {
  require_same_shape(Y, eta);
  RetractResult r{Y + t * eta, false};
  r.rank_deficient = !full_column_rank(r.point);
  return r;
}

HorizontalVector transport(const Matrix& Y_to, const HorizontalVector& xi, Metric metric) {
  if (xi.metric != metric) throw std::invalid_argument("transport: metric mismatch");
  return project_horizontal(Y_to, xi.dir, metric);
}

}  // namespace edmc
