#include "edmc/solvers.hpp"

#include "edmc/edm.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

namespace edmc {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double frob_dot(const Matrix& A, const Matrix& B) { return (A.array() * B.array()).sum(); }

// Metric-dependent pieces evaluated once per iterate.
struct Frame {
  Metric metric;
  const Matrix* Y;
  MetricGram mg;

  Frame(const Matrix& point, Metric m) : metric(m), Y(&point) {
    if (m == Metric::G2) mg = metric_gram(point);
  }
  Matrix gradient(const Matrix& egrad) const { return metric == Metric::G1 ? egrad : egrad * mg.inverse; }
  double inner(const Matrix& A, const Matrix& B) const {
    if (metric == Metric::G1) return frob_dot(A, B);
    return (mg.gram.array() * (A.transpose() * B).array()).sum();
  }
  Matrix horizontal(const Matrix& Z) const {
    if (metric == Metric::G1) return Z - (*Y) * solve_sylvester_skew(*Y, Z);
    const Matrix T = mg.inverse * (Y->transpose() * Z);
    return Z - (*Y) * (0.5 * (T - T.transpose()));
  }
};

enum class Direction { ConjugateGradient, Steepest };

TrialReport descend(const SstressProblem& problem, const Matrix& Y0, const SolverConfig& cfg, Direction rule) {
  if (Y0.rows() != problem.n() || Y0.cols() < 1) throw std::invalid_argument("descend: start has the wrong shape");
  const auto start = Clock::now();
  TrialReport rep;
  rep.solver = rule == Direction::Steepest ? "gd" : "rcg";
  const bool steepest = rule == Direction::Steepest;
  const double grad_tol = steepest ? std::max(cfg.grad_tol, cfg.gd_grad_tol) : cfg.grad_tol;
  const double step_tol = steepest ? std::max(cfg.step_tol, cfg.gd_step_tol) : cfg.step_tol;

  Matrix Y = Y0;
  if (cfg.metric == Metric::G2) {
    bool perturbed = false;
    Y = ensure_full_rank(Y0, cfg.perturb_seed, &perturbed);
    rep.perturbations += perturbed ? 1 : 0;
  }

  CostGrad cg = problem.cost_and_grad(Y);
  double f = cg.cost;
  Frame frame(Y, cfg.metric);
  rep.regularizations += frame.mg.regularized ? 1 : 0;
  Matrix p = frame.gradient(cg.egrad);
  Matrix xi = -p;
  double pnorm = p.norm();
  rep.cost_trace.push_back(f);

  SwitchState sw;
  sw.omega = cfg.switch_omega;
  sw.delta = cfg.switch_delta;
  sw.rule = cfg.start_with_hz ? StepRule::HagerZhang : StepRule::Armijo;
  double last_alpha = 1.0;
  int ascents = 0;
  rep.status = SolverStatus::MaxIterations;

  if (!std::isfinite(f)) {
    rep.status = SolverStatus::Diverged;
  } else if (pnorm <= grad_tol) {
    rep.status = SolverStatus::GradientTolerance;
  } else {
    for (int k = 0; k < cfg.imax; ++k) {
      double slope0 = frob_dot(cg.egrad, xi);
      if (!(slope0 < 0.0)) {
        xi = -p;
        slope0 = frob_dot(cg.egrad, xi);
        if (!(slope0 < 0.0)) {
          rep.status = SolverStatus::LineSearchFailure;
          break;
        }
      }

      const LineFunction line = [&](double a) {
        const CostGrad t = problem.cost_and_grad(Y + a * xi);
        return LineSample{a, t.cost, frob_dot(t.egrad, xi)};
      };
      const LineSample origin{0.0, f, slope0};
      const QuarticStep q = initial_quartic_step(problem.line_polynomial(Y, xi));

      double alpha = 0.0;
      bool armijo_failed = false;
      if (sw.rule == StepRule::Armijo) {
        const auto value = [&](double a) { return problem.cost(Y + a * xi); };
        const ArmijoResult ar =
            armijo_backtrack(value, f, slope0, q.fallback ? last_alpha : q.alpha, cfg.armijo_c1,
                             cfg.armijo_max_halvings);
        if (ar.failed) {
          armijo_failed = true;
          sw.rule = StepRule::HagerZhang;
        } else {
          alpha = ar.alpha;
        }
      }
      if (sw.rule == StepRule::HagerZhang && alpha == 0.0) {
        const double c0 = q.fallback ? last_alpha : q.alpha;
        WolfeMode mode = sw.approx_wolfe ? WolfeMode::Approx : WolfeMode::Standard;
        LineSearchResult ls = hz_search(line, origin, c0, f, mode, cfg.ls);
        if (mode == WolfeMode::Standard && ls.status == LineSearchStatus::MaxIterations) {
          // Decrease test lost to rounding; switch to the approximate conditions for good.
          sw.approx_wolfe = true;
          ls = hz_search(line, origin, c0, f, WolfeMode::Approx, cfg.ls);
        }
        const bool usable = ls.alpha > 0.0 && (ls.status == LineSearchStatus::Converged ||
                                               ls.status == LineSearchStatus::StepCapped ||
                                               (ls.status == LineSearchStatus::MaxIterations && ls.value < f));
        if (!usable) {
          rep.status = SolverStatus::LineSearchFailure;
          break;
        }
        alpha = ls.alpha;
      }
      last_alpha = alpha;

      const double step_len = alpha * xi.norm();
      Matrix Y_new = Y + alpha * xi;
      CostGrad cg_new = problem.cost_and_grad(Y_new);
      if (!std::isfinite(cg_new.cost)) {
        rep.status = SolverStatus::Diverged;
        break;
      }
      Frame frame_new(Y_new, cfg.metric);
      rep.regularizations += frame_new.mg.regularized ? 1 : 0;
      Matrix p_new = frame_new.gradient(cg_new.egrad);

      if (rule == Direction::ConjugateGradient) {
        const Matrix xi_t = frame_new.horizontal(xi);
        const Matrix p_old_t = frame_new.horizontal(p);
        const double beta = beta_hz_plus(p_new, p_old_t, xi_t, cfg.metric, Y_new, cfg.eta_bar);
        xi = -p_new + beta * xi_t;
      } else {
        xi = -p_new;
      }

      sw = switch_update(sw, f, cg_new.cost, armijo_failed);
      const double f_prev = f;
      if (cg_new.cost > f_prev) ++ascents;

      Y = std::move(Y_new);
      cg = std::move(cg_new);
      f = cg.cost;
      p = std::move(p_new);
      pnorm = p.norm();
      rep.cost_trace.push_back(f);
      rep.iters = k + 1;

      if (pnorm <= grad_tol) {
        rep.status = SolverStatus::GradientTolerance;
        break;
      }
      if (step_len <= step_tol) {
        rep.status = SolverStatus::StepTolerance;
        break;
      }
      if (steepest) {
        if (std::abs(f_prev - f) <= cfg.gd_cost_tol) {
          rep.status = SolverStatus::CostStagnation;
          break;
        }
        if (ascents >= cfg.gd_max_ascents) {
          rep.status = SolverStatus::AscentAbort;
          break;
        }
      }
    }
  }

  rep.y_hat.data = Y;
  rep.final_grad_norm = pnorm;
  rep.wall_ms = elapsed_ms(start);
  return rep;
}

}  // namespace

SolverConfig SolverConfig::noiseless() { return SolverConfig{}; }

SolverConfig SolverConfig::noisy() {
  SolverConfig c;
  c.grad_tol = 1e-6;
  c.step_tol = 1e-10;
  return c;
}

const char* to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::GradientTolerance: return "gradient_tolerance";
    case SolverStatus::StepTolerance: return "step_tolerance";
    case SolverStatus::MaxIterations: return "max_iterations";
    case SolverStatus::CostStagnation: return "cost_stagnation";
    case SolverStatus::AscentAbort: return "ascent_abort";
    case SolverStatus::LineSearchFailure: return "line_search_failure";
    case SolverStatus::Diverged: return "diverged";
    case SolverStatus::ResidualTolerance: return "residual_tolerance";
  }
  return "unknown";
}

TrialReport rcg(const SstressProblem& problem, const Matrix& Y0, const SolverConfig& cfg) {
  return descend(problem, Y0, cfg, Direction::ConjugateGradient);
}

TrialReport gd(const SstressProblem& problem, const Matrix& Y0, const SolverConfig& cfg) {
  return descend(problem, Y0, cfg, Direction::Steepest);
}

double beta_hz_plus(const Matrix& grad_new, const Matrix& grad_old, const Matrix& dir_old_transported, Metric metric,
                    const Matrix& Y_new, double eta_bar) {
  const Matrix y = grad_new - grad_old;
  const double dy = inner(Y_new, dir_old_transported, y, metric);
  const double dnorm = norm(Y_new, dir_old_transported, metric);
  const double ynorm = norm(Y_new, y, metric);
  if (!(std::abs(dy) > 1e-14 * dnorm * ynorm) || !std::isfinite(dy)) return 0.0;
  const double yy = inner(Y_new, y, y, metric);
  const double beta_hz =
      (inner(Y_new, y, grad_new, metric) - 2.0 * yy / dy * inner(Y_new, dir_old_transported, grad_new, metric)) / dy;
  const double gold = norm(Y_new, grad_old, metric);
  const double eta = -1.0 / (dnorm * std::min(eta_bar, gold));
  if (!std::isfinite(eta)) return std::isfinite(beta_hz) ? std::max(beta_hz, 0.0) : 0.0;
  return std::max(beta_hz, eta);
}

SpectralInit svd_mds_init(const Edm& De, const SampleMask& mask, Index k, Index truncation_rank) {
  const Index n = De.size();
  if (mask.pairs.empty()) throw std::invalid_argument("svd_mds_init: empty mask");
  if (k < 1 || k >= n) throw std::invalid_argument("svd_mds_init: rank out of range");
  if (truncation_rank < 0) truncation_rank = k + 2;
  truncation_rank = std::min(truncation_rank, n);

  // Observed fraction of off-diagonal pairs; the diagonal of an EDM is known.
  const double p = 2.0 * static_cast<double>(mask.size()) / (static_cast<double>(n) * static_cast<double>(n - 1));
  Matrix observed = Matrix::Zero(n, n);
  for (const auto& [i, j] : mask.pairs) observed(i, j) = observed(j, i) = De.data(i, j) / p;

  // Best rank-t approximation of a symmetric matrix: keep the largest |eigenvalues|.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(observed);
  const Vector& lam = eig.eigenvalues();
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return std::abs(lam(a)) > std::abs(lam(b)); });
  Matrix Dhat = Matrix::Zero(n, n);
  for (Index t = 0; t < truncation_rank; ++t) {
    const Index i = order[static_cast<std::size_t>(t)];
    Dhat.noalias() += lam(i) * eig.eigenvectors().col(i) * eig.eigenvectors().col(i).transpose();
  }

  const GramMatrix G = edm_to_gram(Edm{Dhat});
  Eigen::SelfAdjointEigenSolver<Matrix> geig(G.data);
  SpectralInit out;
  out.Y = Matrix::Zero(n, k);
  // Eigenvalues within rounding of zero give zero columns rather than sqrt(noise).
  const double floor = 1e-12 * std::max(geig.eigenvalues()(n - 1), 0.0);
  for (Index c = 0; c < k; ++c) {
    const Index i = n - 1 - c;
    const double v = geig.eigenvalues()(i);
    if (v > floor)
      out.Y.col(c) = geig.eigenvectors().col(i) * std::sqrt(v);
    else if (v < -floor || !(floor > 0.0))
      out.padded = true;
  }
  out.Y = center_rows(out.Y);
  return out;
}

Matrix ensure_full_rank(const Matrix& Y, std::uint64_t seed, bool* perturbed) {
  if (perturbed) *perturbed = false;
  if (full_column_rank(Y, 1e-12)) return Y;
  Eigen::JacobiSVD<Matrix> svd(Y);
  double scale = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  if (!(scale > 0.0)) scale = 1.0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out = Y;
  for (Index i = 0; i < out.rows(); ++i)
    for (Index j = 0; j < out.cols(); ++j) out(i, j) += 1e-10 * scale * normal(rng);
  if (perturbed) *perturbed = true;
  return out;
}

TrialReport rank_reduction(const SstressProblem& problem, Index d, const SolverConfig& cfg,
                           const std::optional<Matrix>& Y0) {
  const auto start = Clock::now();
  if (d < 1) throw std::invalid_argument("rank_reduction: d must be positive");
  TrialReport rep;
  rep.solver = "rank-reduction";

  Matrix Y;
  if (Y0) {
    Y = *Y0;
  } else {
    if (!problem.mask()) throw std::invalid_argument("rank_reduction: problem has no mask for initialization");
    const SpectralInit init = svd_mds_init(Edm{problem.target()}, *problem.mask(), d + 2, d + 2);
    Y = init.Y;
    rep.init_padded = init.padded;
  }
  Index k = Y.cols();
  rep.rank_trace.push_back(k);

  SolverConfig lifted = cfg;
  lifted.metric = Metric::G2;
  lifted.imax = cfg.n1;
  while (k > d) {
    const TrialReport stage = rcg(problem, Y, lifted);
    rep.iters += stage.iters;
    rep.regularizations += stage.regularizations;
    rep.perturbations += stage.perturbations;
    Y = stage.y_hat.data;

    Eigen::JacobiSVD<Matrix> svd(Y, Eigen::ComputeThinU);
    const Vector& s = svd.singularValues();
    // Largest relative gap (s_i - s_{i+1}) / s_i over i = 1..k-1, first index on ties.
    Index r = 1;
    double best = -1.0;
    for (Index i = 0; i + 1 < k; ++i) {
      const double gap = s(i) > 0.0 ? (s(i) - s(i + 1)) / s(i) : 0.0;
      if (gap > best) {
        best = gap;
        r = i + 1;
      }
    }
    r = std::max(r, d);
    Y = svd.matrixU().leftCols(r) * s.head(r).asDiagonal();
    k = r;
    rep.rank_trace.push_back(k);
  }

  SolverConfig fin = cfg;
  fin.metric = Metric::G1;
  fin.imax = cfg.n2;
  TrialReport last = rcg(problem, Y, fin);
  rep.iters += last.iters;
  rep.y_hat = last.y_hat;
  rep.final_grad_norm = last.final_grad_norm;
  rep.cost_trace = std::move(last.cost_trace);
  rep.status = last.status;
  rep.wall_ms = elapsed_ms(start);
  return rep;
}

double soft_threshold(double x, double rho) {
  const double t = 1.0 / rho;
  const double m = std::abs(x) - t;
  if (m <= 0.0) return 0.0;
  return x > 0.0 ? m : -m;
}

TrialReport madmm(const SstressProblem& problem, const Matrix& Y0, const AdmmConfig& cfg, const SolverConfig& scfg) {
  const auto start = Clock::now();
  if (!problem.mask()) throw std::invalid_argument("madmm: problem has no mask");
  TrialReport rep;
  rep.solver = "madmm";

  const Index n = problem.n();
  const Matrix& De = problem.target();
  const Matrix obs = problem.mask()->indicator();
  Matrix unobs = Matrix::Ones(n, n) - obs;
  unobs.diagonal().setZero();

  SolverConfig inner = scfg;
  inner.metric = Metric::G1;
  inner.imax = cfg.inner_iters;
  inner.start_with_hz = true;
  inner.grad_tol = 0.0;
  inner.step_tol = 0.0;

  Matrix Y = Y0;
  Matrix G = squared_distances(Y);
  double rho = cfg.rho0;
  Matrix U = cfg.residual_dual_init ? Matrix(obs.cwiseProduct(De - G) / rho) : Matrix::Zero(n, n);
  Matrix Z = obs.cwiseProduct(De) + unobs.cwiseProduct(G);

  const auto objective = [&](const Matrix& Gy) {
    return obs.cwiseProduct(Gy - De).cwiseAbs().sum() + 0.5 * cfg.lambda * unobs.cwiseProduct(Gy).squaredNorm();
  };
  rep.cost_trace.push_back(objective(G));
  std::vector<double> primal;
  rep.status = SolverStatus::MaxIterations;

  for (int k = 0; k < cfg.n_outer; ++k) {
    const Matrix G_prev = G;
    // Z step: shrink the observed residual, pass the rest through.
    const Matrix X = G - De + U;
    Z = unobs.cwiseProduct(G + U);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (obs(i, j) != 0.0) Z(i, j) = soft_threshold(X(i, j), rho) + De(i, j);

    // Y step on lambda/2 |P_unobs(g)|^2 + rho/2 |g - (Z - U)|^2, written as weighted s-stress.
    const Matrix T = Z - U;
    const double wl = cfg.lambda + rho;
    Matrix H = rho * obs + wl * unobs;
    Matrix target = obs.cwiseProduct(T) + (rho / wl) * unobs.cwiseProduct(T);
    const double offset = 0.5 * (cfg.lambda * rho / wl) * unobs.cwiseProduct(T).squaredNorm();
    const SstressProblem sub = SstressProblem::from_dense(std::move(target), std::move(H), offset);
    const TrialReport step = rcg(sub, Y, inner);
    rep.iters = k + 1;
    Y = step.y_hat.data;
    G = squared_distances(Y);
    rep.final_grad_norm = step.final_grad_norm;

    U += G - Z;
    const double r_norm = (G - Z).norm();
    const double d_norm = rho * (G_prev - G).norm();
    rep.cost_trace.push_back(objective(G));
    primal.push_back(r_norm);

    if (!std::isfinite(r_norm) || !Y.allFinite()) {
      rep.status = SolverStatus::Diverged;
      break;
    }
    if (primal.size() > 50 && r_norm > 10.0 * primal[primal.size() - 51] && r_norm > 1e-12) {
      rep.status = SolverStatus::Diverged;
      break;
    }
    if (r_norm <= cfg.eps_tol * std::max(Z.norm(), G.norm()) && d_norm <= cfg.eps_tol * (rho * U).norm()) {
      rep.status = SolverStatus::ResidualTolerance;
      break;
    }
    if ((k % cfg.t_f) == 0 && rho < cfg.rho_max) {
      rho *= cfg.tau;
      U /= cfg.tau;
    }
  }

  rep.y_hat.data = Y;
  rep.wall_ms = elapsed_ms(start);
  return rep;
}

}  // namespace edmc
