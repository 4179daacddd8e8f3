#pragma once

#include "edmc/harness/experiment.hpp"
#include "edmc/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace edmc::harness {

struct BasinSpec {
  Index n = 300;
  Index d = 2;
  double p = 0.5;
  bool entrywise = false;
  int draws = 100;
  std::uint64_t seed = 1;
  double frob_divisor = 120.0;  // ||Delta||_F^2 <= sigma_d / frob_divisor
  int max_rejects = 100000;
};

struct RatioSummary {
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
};

struct BasinReport {
  double sigma_1 = 0.0;
  double sigma_d = 0.0;
  double kappa = 0.0;
  double mu = 0.0;
  double row_cap = 0.0;  // bound on squared row norms of Delta
  int rejects = 0;
  int cap_widenings = 0;
  std::vector<double> convexity;   // <grad, Delta> / (p sigma_d ||Delta||_F^2)
  std::vector<double> smoothness;  // ||grad||_F / (p mu d sigma_1 ||Delta||_F)
  RatioSummary convexity_summary;
  RatioSummary smoothness_summary;
};

// Random perturbations of a Gaussian ground truth inside the attractive region.
BasinReport basin_probe(const BasinSpec& spec);
std::string basin_json(const BasinReport& report);

struct PhaseGridSpec {
  std::string axis = "n";  // "n": rows are sizes at fixed d; "d": rows are dimensions at fixed n
  std::vector<double> rows{100};
  // Either sampling rates or multipliers of log(n)/n.
  std::vector<double> p_values;
  std::vector<double> c_values;
  Index fixed_n = 500;
  Index fixed_d = 2;
  bool entrywise = true;
  int trials = 200;
  std::uint64_t seed = 1;
  int threads = 1;
  double re_threshold = 1e-3;
};

struct PhaseCell {
  double row = 0.0;
  double p = 0.0;
  double c = 0.0;  // p n / log n
  double success = 0.0;
  int trials = 0;
};

// svd_mds_init + gd success fractions over a grid of (n or d) x p.
std::vector<PhaseCell> phase_grid(const PhaseGridSpec& spec);
std::string phase_grid_csv(const std::vector<PhaseCell>& cells);

struct RigidityRow {
  double value = 0.0;
  double rigid_rate = 0.0;
  double globally_rigid_rate = 0.0;
  int trials = 0;
};

// Fraction of sampled masks that are generically (globally) rigid along the sweep axis.
std::vector<RigidityRow> rigidity_curve(const ExperimentSpec& spec);
std::string rigidity_csv(const std::vector<RigidityRow>& rows);

}  // namespace edmc::harness
