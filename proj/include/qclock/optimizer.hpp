#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qclock/chain.hpp"

namespace qclock {

struct NelderMeadOptions {
  int budget = 20000;        // objective evaluations
  double rel_tol = 1e-10;    // stop when the simplex spread in f falls below this
  double initial_step = 0.1;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  int iterations = 0;
  bool converged = false;
};

// Adaptive-coefficient Nelder–Mead (Gao–Han parameters) on an unconstrained
// objective. Fully deterministic for a given starting simplex.
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::vector<std::vector<double>> simplex,
                             const NelderMeadOptions& opt = {});
std::vector<std::vector<double>> axis_simplex(std::span<const double> x0, double step);

// Mirror-symmetric coupling profile built from a bulk value, m explicit
// boundary values and (optionally) an algebraic tail joining them:
//   g_i = b_i                                  for i ≤ m
//   g_i = g_bulk + (b_m - g_bulk)(m / i)^p     for m < i ≤ ⌈(N-1)/2⌉
// Parameters live in log space so every coupling stays positive.
struct ProfileParametrization {
  int n_sites = 2;
  int window_m = 6;
  bool tail = true;
  // Boundary values parametrized as positive ratios b_k = b_{k+1}(1 + e^{θ_k}),
  // b_{m+1} = g_bulk, so the profile decreases monotonically into the bulk.
  bool monotone = true;

  int dimension() const;
  std::vector<double> couplings(std::span<const double> theta) const;
  // Parameters reproducing a flat profile with value g.
  std::vector<double> flat(double g) const;
  int half_length() const { return n_sites / 2; }
  int effective_window() const;
};

struct CouplingProfile {
  std::vector<double> values;
  std::vector<double> parameters;
  double objective = 0.0;  // D/J
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  int best_restart = 0;
};

struct OptimizerOptions {
  int window_m = 6;
  bool tail = true;
  bool monotone = true;
  int budget = 20000;  // evaluations per restart
  int restarts = 3;
  std::uint64_t seed = 0;
  double rel_tol = 1e-10;
  // Starting flat value in units of Γ; the impedance-matching guess is Γ/2.
  double initial_g = 0.5;
  // Upper bound on any coupling in units of Γ. Without it the simplex drifts
  // into strongly bound dimers that act as shorter chains.
  double max_coupling = 2.0;
  // Optional warm start (a coupling profile of any length, resampled).
  std::vector<double> warm_start;
};

// D/J of a chain at zero temperature and full bias by Landauer quadrature.
// Returns +inf for profiles outside the domain.
double fano_objective(const ChainSpec& spec);

CouplingProfile optimize_couplings(int n_sites, double gamma, const OptimizerOptions& opt = {});

struct PowerLawFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double exponent_err = 0.0;
  double prefactor_err = 0.0;  // on the log scale
  int points = 0;
};

// OLS on (log x, log y); errors from the residual-variance covariance. An
// exact power law yields a tiny positive floor instead of zero.
PowerLawFit fit_power_law(std::span<const double> xs, std::span<const double> ys);

struct ApodizationReport {
  double bulk_value = 0.0;
  int window_length = 0;
  double boundary_ratio = 1.0;
};

ApodizationReport apodization_report(std::span<const double> couplings);

}  // namespace qclock
