#pragma once

#include <array>
#include <functional>

namespace edmc {

struct LineSearchParams {
  double c1 = 0.1;
  double c2 = 0.1;
  double eps = 1e-14;       // approximate-Wolfe error scale, eps_k = eps * |f_ref|
  double alpha_max = 200.0;
  double theta = 0.5;       // bisection split inside the bracket update
  double gamma_bracket = 0.66;
  double expand = 5.0;      // growth factor while searching for a bracket
  int max_bracket_iters = 60;

  // Throws std::invalid_argument when the constants leave the admissible range.
  void validate(bool approx_mode = false) const;
};

enum class WolfeMode { Standard, Approx };

struct LineSample {
  double alpha = 0.0;
  double value = 0.0;
  double slope = 0.0;
};

using LineFunction = std::function<LineSample(double)>;

enum class LineSearchStatus { Converged, StepCapped, MaxIterations, NonFinite, NotDescent };

struct LineSearchResult {
  double alpha = 0.0;
  double value = 0.0;
  double slope = 0.0;
  LineSearchStatus status = LineSearchStatus::Converged;
  int evaluations = 0;
  int bracket_violations = 0;  // brackets breaking phi(a) <= phi0+eps_k, phi'(a) < 0, phi'(b) >= 0
};

bool wolfe_check(double phi0, double dphi0, double alpha, double phi_a, double dphi_a, const LineSearchParams& params);
bool approx_wolfe_check(double dphi0, double dphi_a, double phi_a, double phi0, double eps_k,
                        const LineSearchParams& params);

// Hager-Zhang bracketing line search. `origin` is the sample at alpha = 0.
LineSearchResult hz_search(const LineFunction& phi, const LineSample& origin, double initial_step, double f_ref,
                           WolfeMode mode, const LineSearchParams& params);
// Convenience form with separate value and slope callables.
LineSearchResult hz_search(const std::function<double(double)>& phi, const std::function<double(double)>& dphi,
                           const LineSearchParams& params, double f_ref, WolfeMode mode, double initial_step = 1.0);

struct QuarticStep {
  double alpha = 1.0;
  bool fallback = false;  // no positive critical point; default returned
};

// Global minimizer over alpha > 0 of c0 + c1 a + c2 a^2 + c3 a^3 + c4 a^4.
QuarticStep initial_quartic_step(const std::array<double, 5>& coeffs);

struct ArmijoResult {
  double alpha = 0.0;
  double value = 0.0;
  int halvings = 0;
  bool failed = false;
};

ArmijoResult armijo_backtrack(const std::function<double(double)>& phi, double phi0, double dphi0, double alpha0,
                              double c1, int max_halvings = 10);

enum class StepRule { Armijo, HagerZhang };

struct SwitchState {
  double C = 0.0;
  double Q = 0.0;
  StepRule rule = StepRule::Armijo;
  bool approx_wolfe = false;  // set together with the cost-stagnation switch
  double omega = 0.005;
  double delta = 0.7;
};

// One step of the running cost average. Moves to Hager-Zhang permanently when
// |f_new - f_prev| <= omega * C or when Armijo backtracking failed.
SwitchState switch_update(SwitchState state, double f_prev, double f_new, bool armijo_failed);

}  // namespace edmc
