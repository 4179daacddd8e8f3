#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <utility>
#include <vector>

namespace edmc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// An n x d configuration, one point per row.
struct PointSet {
  Matrix data;
  bool centered = false;

  Index n() const { return data.rows(); }
  Index d() const { return data.cols(); }
};

/// Squared pairwise distances. Hollow and symmetric when valid.
struct Edm {
  Matrix data;
  Index size() const { return data.rows(); }
};

struct GramMatrix {
  Matrix data;
};

/// Per-pair confidence in [0, 1]; only entries on the mask are consulted.
struct WeightMatrix {
  Matrix data;
};

enum class SamplingScheme { UnitBall, Bernoulli, Explicit };

/// Observed pairs, stored with i < j and sorted lexicographically.
struct SampleMask {
  Index n = 0;
  std::vector<std::pair<Index, Index>> pairs;
  SamplingScheme scheme = SamplingScheme::Explicit;
  double parameter = 0.0;  // radius for UnitBall, rate for Bernoulli
  bool anchor_clique = false;

  std::size_t size() const { return pairs.size(); }
  /// Symmetric 0/1 indicator with zero diagonal.
  Matrix indicator() const;
  /// Filled fraction of the n x n matrix, counting both mirror entries.
  double density() const;
};

struct Scene {
  PointSet positions;
  std::vector<Index> anchors;
  double side = 1.0;
  std::uint64_t seed = 0;
};

bool is_hollow_symmetric(const Matrix& D, double tol = 1e-12);

}  // namespace edmc
