#pragma once

#include "edmc/types.hpp"

namespace edmc {

// G1: tr(Z1'Z2).  G2: tr((Y'Y) Z1'Z2), the scaled metric.
enum class Metric { G1, G2 };

/// Tangent representative at `base`, horizontal under `metric`.
struct HorizontalVector {
  Matrix base;
  Matrix dir;
  Metric metric = Metric::G1;
};

// Y'Y and its inverse. Near-singular Y'Y (sigma_min/sigma_max < 1e-10) is
// regularized by adding eps*I; exactly zero or non-finite Y'Y throws.
struct MetricGram {
  Matrix gram;
  Matrix inverse;
  bool regularized = false;
};
MetricGram metric_gram(const Matrix& Y);

double inner(const Matrix& Y, const Matrix& Z1, const Matrix& Z2, Metric metric);
double norm(const Matrix& Y, const Matrix& Z, Metric metric);

// Skew Omega with Omega Y'Y + Y'Y Omega = Y'Z - Z'Y.
Matrix solve_sylvester_skew(const Matrix& Y, const Matrix& Z);

Matrix project_vertical(const Matrix& Y, const Matrix& Z, Metric metric);
HorizontalVector project_horizontal(const Matrix& Y, const Matrix& Z, Metric metric);
// Residual of the horizontal-space condition, relative to |Y||Z|.
double horizontal_defect(const Matrix& Y, const Matrix& Z, Metric metric);

HorizontalVector riemannian_gradient(const Matrix& Y, const Matrix& egrad, Metric metric);

struct RetractResult {
  Matrix point;
  bool rank_deficient = false;
};
RetractResult retract(const Matrix& Y, const Matrix& eta, double t);

HorizontalVector transport(const Matrix& Y_to, const HorizontalVector& xi, Metric metric);

bool full_column_rank(const Matrix& Y, double rel_tol = 1e-12);

}  // namespace edmc
