#pragma once

#include "edmc/solvers.hpp"
#include "edmc/types.hpp"

#include <array>
#include <functional>
#include <cstdint>
#include <string>
#include <vector>

namespace edmc::harness {

enum class Scenario { PaperSquare, GaussianCloud, Irregular };
enum class SamplingKind { UnitBall, Bernoulli };

struct ExperimentSpec {
  std::string name = "experiment";

  // scene
  Scenario scenario = Scenario::PaperSquare;
  Index sensors = 100;  // paper square / irregular: free nodes besides anchors
  Index n = 300;        // gaussian cloud size
  Index d = 2;
  double side = 1.0;
  std::vector<std::array<double, 2>> polygon;  // irregular region boundary
  std::vector<std::array<double, 2>> anchor_positions;

  // measurements
  SamplingKind sampling = SamplingKind::UnitBall;
  double radius = 0.4;
  double p = 0.1;
  bool entrywise = false;  // Bernoulli draws per ordered entry instead of per pair
  bool anchor_clique = true;
  double sigma = 0.0;
  double gamma = 2.0;
  double p_out = 0.0;
  double v_out = 0.5;

  // sweep
  std::string sweep_axis;  // r | sigma | p | p_out | v_out | n ; empty = single point
  std::vector<double> sweep_values;
  int trials = 50;
  std::uint64_t master_seed = 1;
  std::vector<std::string> solvers{"rank-reduction"};
  double re_exact = 1e-5;
  double re_loose = 1e-3;
  bool loose_success = false;
  bool hessian_check = true;
  int threads = 1;

  SolverConfig solver = SolverConfig::noiseless();
  bool solver_overridden = false;  // keep `solver` even for noisy measurements
  AdmmConfig admm;

  bool noiseless() const { return sigma == 0.0 && p_out == 0.0; }
  double success_threshold() const { return loose_success ? re_loose : re_exact; }
  void validate() const;
};

// Sets one sweep axis on a copy of the spec.
ExperimentSpec with_axis(ExperimentSpec spec, const std::string& axis, double value);

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t sweep_index, std::uint64_t trial_index);

Scene gen_scene(const ExperimentSpec& spec, std::uint64_t seed);

struct Instance {
  Scene scene;
  Edm truth;
  Edm observed;
  SampleMask mask;
  WeightMatrix weights;
  std::uint64_t seed = 0;
};

// Scene, mask, noise and outliers from one seed. Anchor-anchor entries stay exact.
Instance make_instance(const ExperimentSpec& spec, std::uint64_t seed);

const std::vector<std::string>& known_solvers();
bool is_known_solver(const std::string& name);

// Runs one pipeline and fills the error metrics.
TrialReport run_pipeline(const std::string& solver, const Instance& inst, const ExperimentSpec& spec);

struct TrialRecord {
  Index sweep_index = 0;
  double value = 0.0;
  int trial = 0;
  TrialReport report;
};

struct SweepRow {
  double value = 0.0;
  std::string solver;
  double re_q85 = 0.0;
  double msle_q85 = 0.0;
  double success = 0.0;
  double wall_ms = 0.0;
  double re_mean = 0.0;
  double msle_mean = 0.0;
  double grad_vanish_rate = 0.0;
  double hessian_psd_rate = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<TrialRecord> trials;
};

SweepResult run_sweep(const ExperimentSpec& spec);
std::vector<SweepRow> aggregate(const std::vector<TrialRecord>& trials, const ExperimentSpec& spec);

// Linear-interpolated quantile of the sorted sample.
double quantile(std::vector<double> values, double q);

std::string sweep_csv(const SweepResult& result);
std::string trials_csv(const SweepResult& result);

// Runs fn(i) for i in [0, count) on a pool of workers.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace edmc::harness
