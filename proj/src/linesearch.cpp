#include "edmc/linesearch.hpp"

#include "edmc/types.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace edmc {

void LineSearchParams::validate(bool approx_mode) const {
  const bool c2_ok = approx_mode ? (c2 > 0.0 && c2 <= 1.0) : (c2 > 0.0 && c2 < 1.0);
  // c1 == c2 is admitted: the default table sets both to 0.1.
  if (!c2_ok || !(c1 > 0.0 && c1 < 0.5 && c1 <= c2))
    throw std::invalid_argument("LineSearchParams: need 0 < c1 <= c2, c1 < 0.5, c2 < 1");
  if (!(eps >= 0.0) || !(alpha_max > 0.0) || !(theta > 0.0 && theta < 1.0) ||
      !(gamma_bracket > 0.0 && gamma_bracket < 1.0) || !(expand > 1.0) || max_bracket_iters < 1)
    throw std::invalid_argument("LineSearchParams: constant out of range");
}

bool wolfe_check(double phi0, double dphi0, double alpha, double phi_a, double dphi_a,
                 const LineSearchParams& params) {
  if (!(dphi0 < 0.0)) throw std::invalid_argument("wolfe_check: slope at zero is not negative");
  return params.c1 * alpha * dphi0 >= phi_a - phi0 && dphi_a >= params.c2 * dphi0;
}

bool approx_wolfe_check(double dphi0, double dphi_a, double phi_a, double phi0, double eps_k,
                        const LineSearchParams& params) {
  return (2.0 * params.c1 - 1.0) * dphi0 >= dphi_a && dphi_a >= params.c2 * dphi0 && phi_a <= phi0 + eps_k;
}

namespace {

// Hager-Zhang bracket/secant machinery. Every evaluation is tested for
// acceptance; `done_` short-circuits the remaining steps once one passes.
class HagerZhang {
 public:
  HagerZhang(const LineFunction& fn, const LineSample& origin, double f_ref, WolfeMode mode,
             const LineSearchParams& prm)
      : fn_(fn), origin_(origin), mode_(mode), prm_(prm) {
    eps_k_ = prm.eps * std::abs(f_ref);
    best_ = origin;
  }

  LineSearchResult run(double initial_step) {
    LineSearchResult res;
    if (!(origin_.slope < 0.0) || !std::isfinite(origin_.value)) {
      res.status = std::isfinite(origin_.value) && std::isfinite(origin_.slope) ? LineSearchStatus::NotDescent
                                                                               : LineSearchStatus::NonFinite;
      res.value = origin_.value;
      res.slope = origin_.slope;
      return res;
    }
    double c = initial_step;
    if (!(c > 0.0) || !std::isfinite(c)) c = 1.0;
    c = std::min(c, prm_.alpha_max);

    auto [a, b] = bracket(c);
    int iters = 0;
    while (!stopped() && iters < prm_.max_bracket_iters) {
      ++iters;
      const double width = b.alpha - a.alpha;
      auto [A, B] = secant2(a, b);
      if (stopped()) break;
      if (B.alpha - A.alpha > prm_.gamma_bracket * width) {
        std::tie(A, B) = update(A, B, 0.5 * (A.alpha + B.alpha));
        if (stopped()) break;
      }
      a = A;
      b = B;
      if (b.alpha - a.alpha <= 4.0 * std::numeric_limits<double>::epsilon() * b.alpha) break;
    }
    return finish();
  }

 private:
  using Pair = std::pair<LineSample, LineSample>;

  bool stopped() const { return done_ || capped_ || nonfinite_ || evals_ > 4 * prm_.max_bracket_iters + 20; }

  bool accepts(const LineSample& s) const {
    if (!(s.alpha > 0.0)) return false;
    if (mode_ == WolfeMode::Standard)
      return wolfe_check(origin_.value, origin_.slope, s.alpha, s.value, s.slope, prm_);
    return approx_wolfe_check(origin_.slope, s.slope, s.value, origin_.value, eps_k_, prm_);
  }

  LineSample eval(double alpha) {
    LineSample s = fn_(alpha);
    s.alpha = alpha;
    ++evals_;
    if (!std::isfinite(s.value) || !std::isfinite(s.slope)) {
      nonfinite_ = true;
      return s;
    }
    if (s.value < best_.value) best_ = s;
    if (!done_ && accepts(s)) {
      done_ = true;
      accepted_ = s;
    }
    return s;
  }

  bool low(const LineSample& s) const { return s.value <= origin_.value + eps_k_; }

  void check(const Pair& ab) {
    const auto& [a, b] = ab;
    const bool ok = low(a) && a.slope < 0.0 && b.slope >= 0.0 && a.alpha <= b.alpha;
    if (!ok) ++violations_;
    assert(ok && "Hager-Zhang bracket invariant");
  }

  // Shrinks [a, b] where phi'(b) < 0 but phi(b) is too high, until the slope flips.
  Pair bisect(LineSample a, LineSample b) {
    while (!stopped()) {
      const LineSample d = eval((1.0 - prm_.theta) * a.alpha + prm_.theta * b.alpha);
      if (stopped()) break;
      if (d.slope >= 0.0) {
        Pair out{a, d};
        check(out);
        return out;
      }
      if (low(d))
        a = d;
      else
        b = d;
    }
    return {a, b};
  }

  Pair bracket(double c) {
    LineSample a = origin_;
    for (int j = 0; j < prm_.max_bracket_iters; ++j) {
      const LineSample s = eval(c);
      if (stopped()) return {a, s};
      if (s.slope >= 0.0) {
        Pair out{a, s};
        check(out);
        return out;
      }
      if (!low(s)) return bisect(a, s);
      a = s;
      if (c >= prm_.alpha_max) {
        capped_ = true;
        capped_at_ = s;
        return {a, s};
      }
      c = std::min(prm_.expand * c, prm_.alpha_max);
    }
    return {a, a};
  }

  Pair update(const LineSample& a, const LineSample& b, double c) {
    if (!(c > a.alpha && c < b.alpha)) return {a, b};
    const LineSample s = eval(c);
    if (stopped()) return {a, b};
    Pair out;
    if (s.slope >= 0.0)
      out = {a, s};
    else if (low(s))
      out = {s, b};
    else
      return bisect(a, s);
    check(out);
    return out;
  }

  static double secant(const LineSample& a, const LineSample& b) {
    const double den = b.slope - a.slope;
    if (den == 0.0 || !std::isfinite(den)) return 0.5 * (a.alpha + b.alpha);
    return (a.alpha * b.slope - b.alpha * a.slope) / den;
  }

  Pair secant2(const LineSample& a, const LineSample& b) {
    const double c = secant(a, b);
    auto [A, B] = update(a, b, c);
    if (stopped()) return {A, B};
    double cbar = std::numeric_limits<double>::quiet_NaN();
    if (c == B.alpha) cbar = secant(b, B);
    if (c == A.alpha) cbar = secant(a, A);
    if (c == A.alpha || c == B.alpha) return update(A, B, cbar);
    return {A, B};
  }

  LineSearchResult finish() const {
    LineSearchResult res;
    res.evaluations = evals_;
    res.bracket_violations = violations_;
    if (done_) {
      res.alpha = accepted_.alpha;
      res.value = accepted_.value;
      res.slope = accepted_.slope;
      res.status = LineSearchStatus::Converged;
      return res;
    }
    if (nonfinite_) {
      res.alpha = 0.0;
      res.value = origin_.value;
      res.slope = origin_.slope;
      res.status = LineSearchStatus::NonFinite;
      return res;
    }
    const LineSample& pick = capped_ ? capped_at_ : best_;
    res.alpha = pick.alpha;
    res.value = pick.value;
    res.slope = pick.slope;
    res.status = capped_ ? LineSearchStatus::StepCapped : LineSearchStatus::MaxIterations;
    return res;
  }

  const LineFunction& fn_;
  LineSample origin_;
  WolfeMode mode_;
  const LineSearchParams& prm_;
  double eps_k_ = 0.0;
  LineSample best_;
  LineSample accepted_;
  LineSample capped_at_;
  bool done_ = false;
  bool capped_ = false;
  bool nonfinite_ = false;
  int evals_ = 0;
  int violations_ = 0;
};

}  // namespace

LineSearchResult hz_search(const LineFunction& phi, const LineSample& origin, double initial_step, double f_ref,
                           WolfeMode mode, const LineSearchParams& params) {
  HagerZhang hz(phi, origin, f_ref, mode, params);
  return hz.run(initial_step);
}

LineSearchResult hz_search(const std::function<double(double)>& phi, const std::function<double(double)>& dphi,
                           const LineSearchParams& params, double f_ref, WolfeMode mode, double initial_step) {
  const LineFunction fn = [&](double a) { return LineSample{a, phi(a), dphi(a)}; };
  return hz_search(fn, fn(0.0), initial_step, f_ref, mode, params);
}

QuarticStep initial_quartic_step(const std::array<double, 5>& coeffs) {
  // derivative: c1 + 2 c2 a + 3 c3 a^2 + 4 c4 a^3
  std::array<double, 4> dc{coeffs[1], 2.0 * coeffs[2], 3.0 * coeffs[3], 4.0 * coeffs[4]};
  int deg = 3;
  const double scale = std::max({std::abs(dc[0]), std::abs(dc[1]), std::abs(dc[2]), std::abs(dc[3])});
  if (scale == 0.0) throw std::invalid_argument("initial_quartic_step: constant polynomial");
  while (deg > 0 && std::abs(dc[static_cast<std::size_t>(deg)]) <= 1e-300) --deg;

  auto value = [&](double a) {
    return (((coeffs[4] * a + coeffs[3]) * a + coeffs[2]) * a + coeffs[1]) * a + coeffs[0];
  };
  auto deriv = [&](double a) { return ((dc[3] * a + dc[2]) * a + dc[1]) * a + dc[0]; };
  auto second = [&](double a) { return (3.0 * dc[3] * a + 2.0 * dc[2]) * a + dc[1]; };

  std::vector<double> roots;
  if (deg == 1) {
    roots.push_back(-dc[0] / dc[1]);
  } else if (deg >= 2) {
    Matrix companion = Matrix::Zero(deg, deg);
    const double lead = dc[static_cast<std::size_t>(deg)];
    for (int i = 0; i < deg; ++i) companion(0, i) = -dc[static_cast<std::size_t>(deg - 1 - i)] / lead;
    for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
    Eigen::EigenSolver<Matrix> es(companion, false);
    for (Index i = 0; i < deg; ++i) {
      const auto z = es.eigenvalues()(i);
      if (std::abs(z.imag()) <= 1e-8 * std::max(1.0, std::abs(z))) roots.push_back(z.real());
    }
  }

  QuarticStep out;
  double best_val = std::numeric_limits<double>::infinity();
  bool found = false;
  for (double r : roots) {
    // Newton polish of the companion root.
    for (int it = 0; it < 3; ++it) {
      const double s = second(r);
      if (s == 0.0) break;
      const double nr = r - deriv(r) / s;
      if (!std::isfinite(nr)) break;
      r = nr;
    }
    if (!(r > 0.0) || second(r) < 0.0) continue;
    const double v = value(r);
    if (v < best_val) {
      best_val = v;
      out.alpha = r;
      found = true;
    }
  }
  if (!found) {
    out.alpha = 1.0;
    out.fallback = true;
  }
  return out;
}

ArmijoResult armijo_backtrack(const std::function<double(double)>& phi, double phi0, double dphi0, double alpha0,
                              double c1, int max_halvings) {
  ArmijoResult res;
  double alpha = alpha0;
  for (int t = 0; t < max_halvings; ++t) {
    const double v = phi(alpha);
    if (std::isfinite(v) && phi0 - v >= -c1 * alpha * dphi0) {
      res.alpha = alpha;
      res.value = v;
      res.halvings = t;
      return res;
    }
    alpha *= 0.5;
  }
  res.failed = true;
  res.halvings = max_halvings;
  res.alpha = 0.0;
  res.value = phi0;
  return res;
}

SwitchState switch_update(SwitchState state, double f_prev, double f_new, bool armijo_failed) {
  state.Q = 1.0 + state.Q * state.delta;
  state.C = state.C + (std::abs(f_prev) - state.C) / state.Q;
  const bool stagnant = std::abs(f_new - f_prev) <= state.omega * state.C;
  if (stagnant) state.approx_wolfe = true;
  if (stagnant || armijo_failed) state.rule = StepRule::HagerZhang;
  return state;
}

}  // namespace edmc
