#include "edmc/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace edmc {

SampleMask mask_from_pairs(Index n, std::vector<std::pair<Index, Index>> pairs) {
  for (auto& [i, j] : pairs) {
    if (i == j || i < 0 || j < 0 || i >= n || j >= n) throw std::invalid_argument("mask pair out of range");
    if (i > j) std::swap(i, j);
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  SampleMask m;
  m.n = n;
  m.pairs = std::move(pairs);
  m.scheme = SamplingScheme::Explicit;
  return m;
}

SampleMask sample_unit_ball(const Edm& D, double r, const std::vector<Index>& anchors, bool anchor_clique) {
  if (r < 0.0) throw std::invalid_argument("sample_unit_ball: negative radius");
  const Index n = D.size();
  std::vector<char> is_anchor(static_cast<std::size_t>(n), 0);
  if (anchor_clique) {
    for (Index a : anchors) {
      if (a < 0 || a >= n) throw std::invalid_argument("sample_unit_ball: anchor out of range");
      is_anchor[static_cast<std::size_t>(a)] = 1;
    }
  }
  SampleMask m;
  m.n = n;
  m.scheme = SamplingScheme::UnitBall;
  m.parameter = r;
  m.anchor_clique = anchor_clique;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const bool close = std::sqrt(std::max(D.data(i, j), 0.0)) < r;
      const bool clique = is_anchor[static_cast<std::size_t>(i)] && is_anchor[static_cast<std::size_t>(j)];
      if (close || clique) m.pairs.emplace_back(i, j);
    }
  }
  return m;
}

SampleMask sample_bernoulli(Index n, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("sample_bernoulli: p outside [0,1]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  SampleMask m;
  m.n = n;
  m.scheme = SamplingScheme::Bernoulli;
  m.parameter = p;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (unif(rng) < p) m.pairs.emplace_back(i, j);
  return m;
}

SampleMask sample_bernoulli_entrywise(Index n, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("sample_bernoulli_entrywise: p outside [0,1]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  SampleMask m;
  m.n = n;
  m.scheme = SamplingScheme::Bernoulli;
  m.parameter = p;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const bool upper = unif(rng) < p;
      const bool lower = unif(rng) < p;
      if (upper || lower) m.pairs.emplace_back(i, j);
    }
  return m;
}

double rssi_factor(double x, double sigma, double gamma) {
  const double s = kPathLossEta * gamma;
  return std::exp(-x / s - sigma * sigma / (2.0 * s * s));
}

Edm apply_rssi_noise(const Edm& D, double sigma, double gamma, std::uint64_t seed) {
  if (sigma < 0.0 || gamma <= 0.0) throw std::invalid_argument("apply_rssi_noise: bad parameters");
  if (sigma == 0.0) return D;
  const Index n = D.size();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  Edm out{D.data};
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double d = std::sqrt(std::max(D.data(i, j), 0.0)) * rssi_factor(normal(rng), sigma, gamma);
      out.data(i, j) = out.data(j, i) = d * d;
    }
    out.data(i, i) = 0.0;
  }
  return out;
}

Edm inject_outliers(const Edm& De, const SampleMask& mask, double p_out, double v_out, std::uint64_t seed) {
  if (!(p_out >= 0.0 && p_out <= 1.0) || !(v_out > 0.0))
    throw std::invalid_argument("inject_outliers: bad parameters");
  Edm out{De.data};
  const auto m = mask.pairs.size();
  const auto count = static_cast<std::size_t>(std::floor(p_out * static_cast<double>(m) + 1e-12));
  if (count == 0) return out;
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> idx(m);
  for (std::size_t k = 0; k < m; ++k) idx[k] = k;
  // Partial Fisher-Yates: the first `count` slots become a uniform subset.
  for (std::size_t k = 0; k < count; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, m - 1);
    std::swap(idx[k], idx[pick(rng)]);
  }
  std::uniform_real_distribution<double> mag(1.0, 1.0 + v_out);
  for (std::size_t k = 0; k < count; ++k) {
    const auto [i, j] = mask.pairs[idx[k]];
    const double v = mag(rng);
    out.data(i, j) += v;
    out.data(j, i) += v;
  }
  return out;
}

WeightMatrix build_weights(const Edm& De, const Edm& Dtruth) {
  if (De.size() != Dtruth.size()) throw std::invalid_argument("build_weights: shape mismatch");
  const Matrix de = De.data.cwiseMax(0.0).cwiseSqrt();
  const Matrix dt = Dtruth.data.cwiseMax(0.0).cwiseSqrt();
  WeightMatrix W{(-(de - dt).cwiseAbs().array().sqrt().sqrt()).exp().matrix()};
  return W;
}

}  // namespace edmc
