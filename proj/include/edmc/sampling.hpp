#pragma once

#include "edmc/types.hpp"

#include <cstdint>
#include <vector>

namespace edmc {

// Pairs closer than r, plus the anchor clique when requested.
SampleMask sample_unit_ball(const Edm& D, double r, const std::vector<Index>& anchors, bool anchor_clique);
// Each pair i<j kept with probability p.
SampleMask sample_bernoulli(Index n, double p, std::uint64_t seed);
// Each ordered entry (i, j), i != j, drawn with probability p; a pair is kept if
// either of its two entries is drawn.
SampleMask sample_bernoulli_entrywise(Index n, double p, std::uint64_t seed);
SampleMask mask_from_pairs(Index n, std::vector<std::pair<Index, Index>> pairs);

// Log-normal path-loss factor multiplying a distance.
double rssi_factor(double x, double sigma, double gamma);
constexpr double kPathLossEta = 4.342944819032518;  // 10 / ln 10

// Perturbs each upper-triangle distance once and stores the squared result.
Edm apply_rssi_noise(const Edm& D, double sigma, double gamma, std::uint64_t seed);
// Adds U[1, 1+v_out] to floor(p_out * |mask|) distinct observed squared entries.
Edm inject_outliers(const Edm& De, const SampleMask& mask, double p_out, double v_out, std::uint64_t seed);
// w_ij = exp(-|de_ij - d_ij|^(1/4)) on distances.
WeightMatrix build_weights(const Edm& De, const Edm& Dtruth);

}  // namespace edmc
