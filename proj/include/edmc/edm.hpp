#pragma once

#include "edmc/types.hpp"

namespace edmc {

// Linear map from Gram matrices to EDMs: diag(G)1' + 1diag(G)' - 2G.
Matrix g_operator(const Matrix& G);
// Adjoint of g_operator under the trace inner product: 2(diag(D1) - D).
Matrix g_adjoint(const Matrix& D);
// g(YY') without forming YY' separately.
Matrix squared_distances(const Matrix& Y);

Edm gram_to_edm(const GramMatrix& G);
// Double centering -JDJ/2.
GramMatrix edm_to_gram(const Edm& D);

Matrix centering_matrix(Index n);
Matrix center_rows(const Matrix& Y);

struct MdsResult {
  PointSet points;
  Vector eigenvalues;             // of the centered Gram matrix, descending
  double truncated_mass = 0.0;    // |spectrum| beyond d over total |spectrum|
  bool negative_leading = false;  // a kept eigenvalue was negative beyond tolerance
  bool truncated = false;         // truncated_mass above tolerance
};

MdsResult classical_mds(const Edm& D, Index d, double tol = 1e-10);

}  // namespace edmc
