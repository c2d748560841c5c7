#pragma once

#include <functional>
#include <span>
#include <vector>

namespace qclock {

// Vector-valued integrand evaluated on a batch of nodes: fills
// out[c * x.size() + k] with component c at node x[k].
using BatchIntegrand = std::function<void(std::span<const double> x, std::span<double> out)>;

struct QuadOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  int max_intervals = 4000;
};

struct QuadResult {
  std::vector<double> value;
  std::vector<double> error;
  int evaluations = 0;
  bool converged = false;
};

// Globally adaptive Gauss–Kronrod (7/15) on [a, b] with optional interior
// breakpoints. Does not throw on non-convergence; callers decide.
QuadResult integrate(const BatchIntegrand& f, int components, double a, double b,
                     const QuadOptions& opt = {}, std::span<const double> breakpoints = {});

// Integral over the whole real line: [-L, L] directly (split at breakpoints)
// plus both tails mapped to (0, 1] by E = ±L/u.
QuadResult integrate_real_line(const BatchIntegrand& f, int components, double half_width,
                               const QuadOptions& opt = {},
                               std::span<const double> breakpoints = {});

// Scalar convenience wrapper.
double integrate_scalar(const std::function<double(double)>& f, double a, double b,
                        const QuadOptions& opt = {}, double* error = nullptr);

}  // namespace qclock
