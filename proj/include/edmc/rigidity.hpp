#pragma once

#include "edmc/types.hpp"

#include <cstdint>

namespace edmc {

struct RigidityReport {
  bool generically_rigid = false;
  bool generically_globally_rigid = false;
  Index rigidity_rank = 0;
  Index required_rank = 0;   // nd - d(d+1)/2
  Index stress_nullity = -1; // -1 when the stress test was skipped
};

// Randomized rank tests on a generic perturbation of Y (seeded), threshold 1e-8 * sigma_max.
RigidityReport rigidity_probe(const SampleMask& mask, const Matrix& Y, std::uint64_t seed = 0x5eed);

Matrix rigidity_matrix(const SampleMask& mask, const Matrix& Y);

}  // namespace edmc
