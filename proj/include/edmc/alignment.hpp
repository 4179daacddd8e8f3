#pragma once

#include "edmc/types.hpp"

#include <vector>

namespace edmc {

struct ProcrustesResult {
  Matrix rotation;  // d x d orthogonal
  Matrix delta;     // Y - Y_star * rotation
  bool degenerate = false;  // cross-Gram rank deficient; rotation not unique
};

// Orthogonal factor closest to aligning Y_star onto Y.
ProcrustesResult procrustes(const Matrix& Y, const Matrix& Y_star);

struct RigidTransform {
  Matrix rotation;     // applied on the right
  Vector translation;  // row vector added after rotation
  Matrix apply(const Matrix& Y) const;
};

// Least-squares rotation (reflection allowed) plus translation taking source rows onto target rows.
RigidTransform fit_rigid(const Matrix& source, const Matrix& target);

struct RecoveryMetrics {
  double re = 0.0;
  double msle = 0.0;
};

// RE on the full EDM; MSLE on non-anchor rows after an anchor-based rigid fit
// (all rows are used for the fit when the scene has no anchors).
RecoveryMetrics recovery_metrics(const Matrix& Y_hat, const Scene& scene, const Edm& D_star);

}  // namespace edmc
