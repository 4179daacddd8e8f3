#pragma once

#include "edmc/types.hpp"

#include <array>
#include <optional>

namespace edmc {

struct CostGrad {
  double cost = 0.0;
  Matrix egrad;
};

struct LineValue {
  double value = 0.0;
  double slope = 0.0;
};

/// Weighted s-stress  1/2 sum_ij H_ij (g(YY')_ij - T_ij)^2 + offset,
/// summed over the full symmetric matrix (each pair counts twice).
class SstressProblem {
 public:
  // H = P_mask(W .* W), target D_e. Without W the weights are all ones.
  SstressProblem(const Edm& De, const SampleMask& mask, const WeightMatrix& W);
  SstressProblem(const Edm& De, const SampleMask& mask);
  // Arbitrary symmetric weights and target; no mask is recorded.
  static SstressProblem from_dense(Matrix target, Matrix weights, double offset = 0.0);

  Index n() const { return target_.rows(); }
  const Matrix& target() const { return target_; }
  const Matrix& weights() const { return H_; }
  const std::optional<SampleMask>& mask() const { return mask_; }
  bool unit_weights() const { return unit_weights_; }

  double cost(const Matrix& Y) const;
  Matrix egrad(const Matrix& Y) const;
  CostGrad cost_and_grad(const Matrix& Y) const;
  Matrix ehess_apply(const Matrix& Y, const Matrix& Z) const;
  // Dense nd x nd Hessian, row/column index i*d + a for coordinate a of point i.
  Matrix hessian_blocks(const Matrix& Y) const;

  // Value and slope of alpha -> cost(Y + alpha eta); the slope is <egrad, eta>_F.
  LineValue ls_scalars(const Matrix& Y, const Matrix& eta, double alpha) const;
  // Coefficients c0..c4 of the quartic alpha -> cost(Y + alpha eta).
  std::array<double, 5> line_polynomial(const Matrix& Y, const Matrix& eta) const;

 private:
  SstressProblem() = default;
  Matrix residual_weighted(const Matrix& Y) const;

  Matrix target_;
  Matrix H_;
  double offset_ = 0.0;
  bool unit_weights_ = false;
  std::optional<SampleMask> mask_;
};

// lambda_min >= -tol * lambda_max.
bool hessian_is_psd(const Matrix& hess, double tol = 1e-8);
// Smallest and largest eigenvalue estimates of the Hessian operator via Lanczos.
std::pair<double, double> hessian_extremes_lanczos(const SstressProblem& problem, const Matrix& Y, int steps = 200,
                                                   std::uint64_t seed = 1);
// Dense check for small problems, Lanczos above n = 500.
bool hessian_psd_at(const SstressProblem& problem, const Matrix& Y, double tol = 1e-8);

}  // namespace edmc
