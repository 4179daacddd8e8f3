#pragma once

#include "edmc/linesearch.hpp"
#include "edmc/manifold.hpp"
#include "edmc/sstress.hpp"
#include "edmc/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace edmc {

struct SolverConfig {
  int imax = 600;
  double grad_tol = 1e-15;
  double step_tol = 0.0;
  Metric metric = Metric::G1;
  LineSearchParams ls;
  double armijo_c1 = 0.5;
  int armijo_max_halvings = 10;
  double switch_omega = 0.005;
  double switch_delta = 0.7;
  bool start_with_hz = false;  // skip the Armijo phase
  double eta_bar = 0.01;       // lower truncation constant of the HZ+ beta
  int n1 = 300;                // lifted-rank iterations per reduction stage
  int n2 = 300;                // final iterations at the target rank
  // Plain gradient descent stops; the gradient and step floors apply on top of grad_tol/step_tol.
  double gd_grad_tol = 1e-6;
  double gd_step_tol = 1e-10;
  double gd_cost_tol = 1e-10;
  int gd_max_ascents = 10;
  std::uint64_t perturb_seed = 17;  // for rank-deficient starts

  static SolverConfig noiseless();
  static SolverConfig noisy();
};

struct AdmmConfig {
  double rho0 = 1e-3;
  double lambda = 1e-6;
  double tau = 1.05;
  double rho_max = 100.0;
  int t_f = 2;
  double eps_tol = 0.02;
  int n_outer = 600;
  int inner_iters = 2;
  // U0 = P_obs(De - g(Y0)) / rho0 instead of zero. The scaled residual throws a
  // warm start far off in the first Y step, so it is off by default.
  bool residual_dual_init = false;
};

enum class SolverStatus {
  GradientTolerance,
  StepTolerance,
  MaxIterations,
  CostStagnation,
  AscentAbort,
  LineSearchFailure,
  Diverged,
  ResidualTolerance,
};

const char* to_string(SolverStatus status);

struct TrialReport {
  std::string solver;
  std::uint64_t seed = 0;
  PointSet y_hat;
  double re = 0.0;
  double msle = 0.0;
  int iters = 0;
  double final_grad_norm = 0.0;
  std::optional<bool> hessian_psd;
  double wall_ms = 0.0;
  std::vector<double> cost_trace;
  SolverStatus status = SolverStatus::MaxIterations;
  std::vector<Index> rank_trace;  // lifted ranks visited by rank reduction
  int regularizations = 0;        // near-singular Y'Y events under the scaled metric
  int perturbations = 0;          // rank-deficient starts that were perturbed
  bool init_padded = false;
  bool failed() const {
    return status == SolverStatus::Diverged || status == SolverStatus::AscentAbort || !y_hat.data.allFinite();
  }
};

// Riemannian conjugate gradient with Armijo then Hager-Zhang steps.
TrialReport rcg(const SstressProblem& problem, const Matrix& Y0, const SolverConfig& cfg);
// Same iteration with steepest-descent directions.
TrialReport gd(const SstressProblem& problem, const Matrix& Y0, const SolverConfig& cfg);

double beta_hz_plus(const Matrix& grad_new, const Matrix& grad_old, const Matrix& dir_old_transported, Metric metric,
                    const Matrix& Y_new, double eta_bar = 0.01);

struct SpectralInit {
  Matrix Y;
  bool padded = false;  // fewer than k nonnegative eigenvalues
};

// Truncates the rescaled observations to rank truncation_rank (default k + 2, the
// rank of an EDM in k dimensions), then cMDS at rank k.
SpectralInit svd_mds_init(const Edm& De, const SampleMask& mask, Index k, Index truncation_rank = -1);

// Lifted-rank continuation down to rank d. Without Y0 the start is svd_mds_init at d+2.
TrialReport rank_reduction(const SstressProblem& problem, Index d, const SolverConfig& cfg,
                           const std::optional<Matrix>& Y0 = std::nullopt);

// S_{1/rho}(x) = sign(x) max(|x| - 1/rho, 0)
double soft_threshold(double x, double rho);

// l1 data term with an augmented-Lagrangian splitting; Y updates by short RCG runs.
TrialReport madmm(const SstressProblem& problem, const Matrix& Y0, const AdmmConfig& cfg, const SolverConfig& scfg);

// Adds seeded noise of relative size 1e-10 when Y lacks full column rank.
Matrix ensure_full_rank(const Matrix& Y, std::uint64_t seed, bool* perturbed = nullptr);

}  // namespace edmc
