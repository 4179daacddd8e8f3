#include "edmc/harness/selfcheck.hpp"

#include "edmc/edm.hpp"
#include "edmc/linesearch.hpp"
#include "edmc/manifold.hpp"
#include "edmc/sampling.hpp"
#include "edmc/solvers.hpp"
#include "edmc/sstress.hpp"

#include <cmath>
#include <cstdio>
#include <random>

namespace edmc::harness {

namespace {

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t s) : gen(s) {}
  Matrix gauss(Index r, Index c) {
    std::normal_distribution<double> nd;
    Matrix M(r, c);
    for (Index i = 0; i < M.size(); ++i) M(i) = nd(gen);
    return M;
  }
  Matrix sym(Index n) {
    const Matrix A = gauss(n, n);
    return 0.5 * (A + A.transpose());
  }
};

std::string sci(const char* label, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s %.2e", label, v);
  return buf;
}

CheckResult adjoint_check(Rng& rng) {
  double worst = 0;
  for (int t = 0; t < 20; ++t) {
    const Index n = 3 + t;
    const Matrix G = rng.sym(n), D = rng.sym(n);
    const double lhs = (g_operator(G).array() * D.array()).sum();
    const double rhs = (G.array() * g_adjoint(D).array()).sum();
    worst = std::max(worst, std::abs(lhs - rhs) / (1 + std::abs(lhs)));
  }
  return {"adjoint identity", worst <= 1e-10, sci("max rel err", worst)};
}

CheckResult roundtrip_check(Rng& rng) {
  double worst = 0;
  for (int t = 0; t < 20; ++t) {
    const Matrix Y = center_rows(rng.gauss(4 + t, 1 + t % 3));
    const Edm D = gram_to_edm(GramMatrix{Y * Y.transpose()});
    const Matrix back = gram_to_edm(edm_to_gram(D)).data;
    worst = std::max(worst, (back - D.data).norm() / D.data.norm());
  }
  return {"edm round trip", worst <= 1e-10, sci("max rel err", worst)};
}

SstressProblem random_problem(Rng& rng, Index n, Index d) {
  const Matrix Y = rng.gauss(n, d);
  const Edm D{squared_distances(Y)};
  const SampleMask mask = sample_bernoulli(n, 0.6, rng.gen());
  Matrix W = Matrix::Ones(n, n);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) W(i, j) = W(j, i) = u(rng.gen);
  Edm noisy = D;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) noisy.data(i, j) = noisy.data(j, i) = D.data(i, j) * (1 + 0.1 * u(rng.gen));
  return SstressProblem(noisy, mask, WeightMatrix{W});
}

CheckResult derivative_check(Rng& rng) {
  double g_err = 0, h_err = 0, blk_err = 0;
  for (int t = 0; t < 5; ++t) {
    const Index n = 6 + 2 * t, d = 1 + t % 3;
    const SstressProblem pr = random_problem(rng, n, d);
    const Matrix Y = rng.gauss(n, d), Z = rng.gauss(n, d);
    const double h = 1e-5;
    const double fd = (pr.cost(Y + h * Z) - pr.cost(Y - h * Z)) / (2 * h);
    const double an = (pr.egrad(Y).array() * Z.array()).sum();
    g_err = std::max(g_err, std::abs(fd - an) / (1 + std::abs(an)));
    const Matrix hfd = (pr.egrad(Y + h * Z) - pr.egrad(Y - h * Z)) / (2 * h);
    const Matrix han = pr.ehess_apply(Y, Z);
    h_err = std::max(h_err, (hfd - han).norm() / (1 + han.norm()));
    const Matrix H = pr.hessian_blocks(Y);
    Vector z(n * d);
    for (Index i = 0; i < n; ++i)
      for (Index a = 0; a < d; ++a) z(i * d + a) = Z(i, a);
    const double q1 = z.dot(H * z), q2 = (Z.array() * han.array()).sum();
    blk_err = std::max(blk_err, std::abs(q1 - q2) / (1 + std::abs(q2)));
  }
  const bool ok = g_err <= 1e-6 && h_err <= 1e-5 && blk_err <= 1e-8;
  return {"derivatives", ok, sci("grad", g_err) + ", " + sci("hess", h_err) + ", " + sci("blocks", blk_err)};
}

CheckResult projection_check(Rng& rng) {
  double worst = 0;
  for (Metric m : {Metric::G1, Metric::G2})
    for (Index d : {1, 2, 3, 5}) {
      const Matrix Y = rng.gauss(12, d), Z = rng.gauss(12, d);
      const Matrix V = project_vertical(Y, Z, m);
      const Matrix Hz = project_horizontal(Y, Z, m).dir;
      worst = std::max(worst, (V + Hz - Z).norm() / Z.norm());
      worst = std::max(worst, (project_horizontal(Y, Hz, m).dir - Hz).norm() / Z.norm());
      const double scale = Z.squaredNorm() * (m == Metric::G1 ? 1.0 : Y.squaredNorm());
      worst = std::max(worst, std::abs(inner(Y, V, Hz, m)) / scale);
      worst = std::max(worst, horizontal_defect(Y, Hz, m));
    }
  return {"quotient projections", worst <= 1e-10, sci("max defect", worst)};
}

CheckResult linesearch_check(Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int bad = 0, violations = 0;
  LineSearchParams params;
  for (int t = 0; t < 100; ++t) {
    // Convex-ish quartic with negative slope at zero.
    const double c1 = -std::abs(u(rng.gen)) - 0.1, c2 = u(rng.gen), c3 = u(rng.gen), c4 = std::abs(u(rng.gen)) + 0.05;
    const auto phi = [&](double a) { return 1 + c1 * a + c2 * a * a + c3 * a * a * a + c4 * a * a * a * a; };
    const auto dphi = [&](double a) { return c1 + 2 * c2 * a + 3 * c3 * a * a + 4 * c4 * a * a * a; };
    const WolfeMode mode = t % 2 ? WolfeMode::Approx : WolfeMode::Standard;
    const LineSearchResult r = hz_search(phi, dphi, params, 1.0, mode, 0.5 + std::abs(u(rng.gen)));
    violations += r.bracket_violations;
    if (r.status != LineSearchStatus::Converged) continue;
    const bool ok = mode == WolfeMode::Standard
                        ? wolfe_check(phi(0), dphi(0), r.alpha, r.value, r.slope, params)
                        : approx_wolfe_check(dphi(0), r.slope, r.value, phi(0), params.eps * std::abs(phi(0)), params);
    bad += ok ? 0 : 1;
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d predicate failures, %d bracket violations", bad, violations);
  return {"line search contract", bad == 0 && violations == 0, buf};
}

CheckResult toy_check(Rng& rng) {
  Matrix Ys(3, 1);
  Ys << 0, 1, 5;
  const SstressProblem pr(Edm{squared_distances(Ys)}, mask_from_pairs(3, {{0, 1}, {0, 2}, {1, 2}}));
  int ok = 0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) ok += pr.cost(rank_reduction(pr, 1, SolverConfig::noiseless(), rng.gauss(3, 2)).y_hat.data) <= 1e-12;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%d/%d starts converged", ok, trials);
  return {"toy convergence", ok >= trials - 1, buf};
}

}  // namespace

std::vector<CheckResult> run_selfcheck(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<CheckResult> out;
  out.push_back(adjoint_check(rng));
  out.push_back(roundtrip_check(rng));
  out.push_back(derivative_check(rng));
  out.push_back(projection_check(rng));
  out.push_back(linesearch_check(rng));
  out.push_back(toy_check(rng));
  return out;
}

}  // namespace edmc::harness
