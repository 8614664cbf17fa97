#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "hollow/tensor.hpp"

namespace hollow::ode {

using Vec = std::vector<double>;

// Right-hand side y' = f(t, y). The optional providers return the
// dimension-wise Jacobian diagonal (one backward sweep for a HollowNet, or
// an analytic/finite-difference fallback) and the full Jacobian (small-d
// oracle use only).
struct OdeProblem {
  int d = 0;
  std::function<Vec(double, const Vec&)> f;
  std::function<Vec(double, const Vec&)> dim_f;            // optional
  std::function<std::vector<Vec>(double, const Vec&)> jac; // optional
  double t0 = 0.0, t1 = 1.0;
  Vec y0;
};

enum class Corrector { Functional, JacobiNewton, FullNewton };

Corrector corrector_from_string(const std::string& s);
const char* corrector_name(Corrector c);

struct SolverConfig {
  double rtol = 1e-6;
  double atol = 1e-6;
  double tau_a = 1e-8;  // fixed-point absolute tolerance
  double tau_r = 1e-8;  // fixed-point relative tolerance
  int max_corrector_iters = 4;
  double h_init = 0.0;  // 0 = choose automatically
  double h_min = 1e-12;
  double h_max = std::numeric_limits<double>::infinity();
  bool adaptive = true;  // false: fixed step h_init throughout
  Corrector corrector = Corrector::Functional;

  void validate() const;
};

struct StepStats {
  long nfe = 0;                     // dynamics evaluations
  long n_dim_derivative_calls = 0;  // D_dim provider invocations
  long steps_accepted = 0;
  long steps_rejected = 0;
  std::vector<long> corrector_iters_histogram;  // index = iterations used
  long corrector_iters_total = 0;

  void count_corrector(int iters) {
    if (corrector_iters_histogram.size() <= std::size_t(iters))
      corrector_iters_histogram.resize(iters + 1, 0);
    ++corrector_iters_histogram[iters];
    corrector_iters_total += iters;
  }
};

struct Trajectory {
  std::vector<double> t;
  std::vector<Vec> y;
};

struct SolveResult {
  Trajectory traj;
  StepStats stats;
};

// Solver failure (h underflow on stiff problems, corrector breakdown in
// fixed-step mode); carries the statistics accumulated so far.
struct SolveFailure : Error {
  SolveFailure(const std::string& msg, StepStats s)
      : Error(msg), stats(std::move(s)) {}
  StepStats stats;
};

// Adaptive Dormand-Prince 5(4) with PI-free step control:
// accept when the scaled error is <= 1, rescale by
// clamp(0.9 * err^(-1/5), 0.2, 10).
SolveResult rk45_adaptive(const OdeProblem& problem, const SolverConfig& config);

// Adams-Bashforth-Moulton order 4: AB4 predictor, AM4 corrector solved by the
// configured corrector iteration; |predictor - corrector| drives step control.
// History is warm-started by RK45 and kept on a uniform grid; the step size
// changes by factors of two (doubling reuses stored history points, halving
// interpolates midpoints and re-evaluates f there).
SolveResult abm_solve(const OdeProblem& problem, const SolverConfig& config);

}  // namespace hollow::ode
