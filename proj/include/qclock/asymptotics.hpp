#pragma once

#include <string>

#include "qclock/types.hpp"

namespace qclock {

namespace special {

double bessel_j0(double x);
double bessel_j1(double x);
// Si(x) = ∫₀ˣ sin(t)/t dt and Ci(x) = -∫ₓ^∞ cos(t)/t dt for x > 0.
double sine_integral(double x);
double cosine_integral(double x);
// Lower real branch of the Lambert W function on [-1/e, 0).
double lambert_wm1(double z);

}  // namespace special

// Signals that the logarithmic and diffusive laws never cross (a = 2πD/J ≥ 1/e).
class NoCrossing : public DomainError {
 public:
  using DomainError::DomainError;
};

// Current of the shifted Fermi sea on the infinite chain, 2g/π.
double mean_current_infinite(double g);

// Connected bulk current correlator ⟨⟨j(τ) j(0)⟩⟩ of the shifted Fermi sea.
double bulk_correlator(double g, double tau);

// Exact bulk number variance 2∫₀ᵗ (t-τ) ⟨⟨j(τ)j(0)⟩⟩ dτ in Bessel, Si and Ci form.
double bulk_variance_closed_form(double g, double t);
// (1/2π²)(log 4gt + γ + 1).
double bulk_variance_asymptotic(double g, double t);

// Number variance of the sine-kernel process in a window holding x levels on average.
double sine_kernel_number_variance(double x);

// Anderson localization length ξ(E) = (96g² - 24E²)/W² in units of the lattice spacing.
double localization_length(double energy, double disorder, double g);

struct Crossover {
  double time = 0.0;     // t* from the Lambert-W solution of (1/2π) log(J t) = D t
  double leading = 0.0;  // log(J/D)/D
  double ticks = 0.0;    // J t*
};

// Throws NoCrossing when 2πD/J ≥ 1/e.
Crossover crossover_time(double current, double diffusion);

// Scaling form Σ e^Σ / J of the thermal cross-over (Σ > 1).
double thermal_crossover(double current, double sigma);

struct DisorderCrossover {
  double time = 0.0;  // (ε₀/ε)² / J
  bool regime_ok = true;
  std::string diagnostic;
};

// Cross-over dominated by disorder of strength ε against the threshold ε₀.
// The scaling needs D/J ≪ (ε/ε₀)² ≪ 1 (checked with a factor 10 margin);
// outside that regime the value is still returned with a diagnostic.
DisorderCrossover disorder_crossover(double current, double eps, double eps0, double diffusion);

}  // namespace qclock
