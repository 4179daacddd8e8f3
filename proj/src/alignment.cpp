#include "edmc/alignment.hpp"

#include "edmc/edm.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace edmc {

ProcrustesResult procrustes(const Matrix& Y, const Matrix& Y_star) {
  if (Y.rows() != Y_star.rows() || Y.cols() != Y_star.cols())
    throw std::invalid_argument("procrustes: shape mismatch");
  // Y*'Y = A D B'  ->  psi = A B'
  const Matrix C = Y_star.transpose() * Y;
  Eigen::JacobiSVD<Matrix> svd(C, Eigen::ComputeFullU | Eigen::ComputeFullV);
  ProcrustesResult out;
  out.rotation = svd.matrixU() * svd.matrixV().transpose();
  out.delta = Y - Y_star * out.rotation;
  const Vector& s = svd.singularValues();
  out.degenerate = s.size() == 0 || s(s.size() - 1) <= 1e-12 * std::max(s(0), 1e-300);
  return out;
}

Matrix RigidTransform::apply(const Matrix& Y) const {
  Matrix out = Y * rotation;
  out.rowwise() += translation.transpose();
  return out;
}

RigidTransform fit_rigid(const Matrix& source, const Matrix& target) {
  const Vector src_mean = source.colwise().mean().transpose();
  const Vector tgt_mean = target.colwise().mean().transpose();
  Matrix S = source;
  Matrix T = target;
  S.rowwise() -= src_mean.transpose();
  T.rowwise() -= tgt_mean.transpose();
  // minimize |S R - T|: R = U V' from S'T = U D V'
  Eigen::JacobiSVD<Matrix> svd(S.transpose() * T, Eigen::ComputeFullU | Eigen::ComputeFullV);
  RigidTransform rt;
  rt.rotation = svd.matrixU() * svd.matrixV().transpose();
  rt.translation = tgt_mean - rt.rotation.transpose() * src_mean;
  return rt;
}

RecoveryMetrics recovery_metrics(const Matrix& Y_hat, const Scene& scene, const Edm& D_star) {
  const Matrix& Y_true = scene.positions.data;
  if (Y_hat.rows() != Y_true.rows() || Y_hat.cols() != Y_true.cols())
    throw std::invalid_argument("recovery_metrics: shape mismatch");
  const double dnorm = D_star.data.norm();
  if (dnorm == 0.0) throw std::invalid_argument("recovery_metrics: zero reference EDM");

  RecoveryMetrics m;
  m.re = (squared_distances(Y_hat) - D_star.data).norm() / dnorm;

  const Index n = Y_hat.rows();
  std::vector<char> is_anchor(static_cast<std::size_t>(n), 0);
  for (Index a : scene.anchors) is_anchor[static_cast<std::size_t>(a)] = 1;
  const auto na = static_cast<Index>(scene.anchors.size());

  RigidTransform rt;
  if (na > 0) {
    Matrix src(na, Y_hat.cols()), tgt(na, Y_hat.cols());
    for (Index k = 0; k < na; ++k) {
      src.row(k) = Y_hat.row(scene.anchors[static_cast<std::size_t>(k)]);
      tgt.row(k) = Y_true.row(scene.anchors[static_cast<std::size_t>(k)]);
    }
    rt = fit_rigid(src, tgt);
  } else {
    rt = fit_rigid(Y_hat, Y_true);
  }
  const Matrix aligned = rt.apply(Y_hat);
  double sq = 0.0;
  for (Index i = 0; i < n; ++i)
    if (!is_anchor[static_cast<std::size_t>(i)]) sq += (aligned.row(i) - Y_true.row(i)).squaredNorm();
  const Index free_rows = n - na;
  m.msle = free_rows > 0 ? std::sqrt(sq) / static_cast<double>(free_rows) : 0.0;
  return m;
}

}  // namespace edmc
