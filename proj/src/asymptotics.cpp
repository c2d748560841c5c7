#include "qclock/asymptotics.hpp"

#include <cmath>
#include <complex>
#include <limits>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/lambert_w.hpp>

namespace qclock {

namespace special {

double bessel_j0(double x) { return boost::math::cyl_bessel_j(0, x); }
double bessel_j1(double x) { return boost::math::cyl_bessel_j(1, x); }

namespace {

// Si and Ci together: power series below x = 2, otherwise the continued
// fraction of E1(ix) = -Ci(x) + i(Si(x) - π/2) evaluated by modified Lentz.
void sici(double x, double& si, double& ci) {
  constexpr double eps = 1e-16;
  if (x < 2.0) {
    const double x2 = x * x;
    double term = x, s = x;  // term = (-1)^k x^(2k+1) / (2k+1)!
    for (int k = 1; k < 60; ++k) {
      term *= -x2 / ((2.0 * k) * (2.0 * k + 1.0));
      const double add = term / (2.0 * k + 1.0);
      s += add;
      if (std::abs(add) < eps * std::abs(s)) break;
    }
    double c = 0.0;
    term = 1.0;  // (-1)^k x^(2k) / (2k)!
    for (int k = 1; k < 60; ++k) {
      term *= -x2 / ((2.0 * k - 1.0) * (2.0 * k));
      const double add = term / (2.0 * k);
      c += add;
      if (std::abs(add) < eps * (std::abs(c) + 1e-300)) break;
    }
    si = s;
    ci = kEulerGamma + std::log(x) + c;
    return;
  }
  using C = std::complex<double>;
  constexpr double tiny = 1e-300;
  C b(1.0, x);
  C c = 1.0 / tiny;
  C d = 1.0 / b;
  C h = d;
  for (int i = 1; i < 100000; ++i) {
    const double a = -static_cast<double>(i) * static_cast<double>(i);
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    const C del = c * d;
    h *= del;
    if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < eps) break;
  }
  h *= C(std::cos(x), -std::sin(x));
  ci = -h.real();
  si = kPi / 2.0 + h.imag();
}

}  // namespace

double sine_integral(double x) {
  if (x < 0.0) return -sine_integral(-x);
  if (x == 0.0) return 0.0;
  double si, ci;
  sici(x, si, ci);
  return si;
}

double cosine_integral(double x) {
  if (!(x > 0.0)) throw DomainError("Ci needs x > 0");
  double si, ci;
  sici(x, si, ci);
  return ci;
}

double lambert_wm1(double z) {
  if (!(z >= -1.0 / std::exp(1.0) - 1e-16 && z < 0.0)) throw DomainError("W_{-1} needs z in [-1/e, 0)");
  return boost::math::lambert_wm1(std::max(z, -std::exp(-1.0)));
}

}  // namespace special

double mean_current_infinite(double g) {
  if (!(g >= 0.0)) throw DomainError("coupling must be non-negative");
  return 2.0 * g / kPi;
}

namespace {

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

}  // namespace

double bulk_correlator(double g, double tau) {
  if (!(tau >= 0.0)) throw DomainError("correlator needs tau >= 0");
  const double x = 2.0 * g * tau;
  const double j0 = special::bessel_j0(x), j1 = special::bessel_j1(x), s = sinc(x);
  return 0.5 * g * g * (j0 * j0 - j1 * j1) - 2.0 * g * g / (kPi * kPi) * s * s;
}

double bulk_variance_closed_form(double g, double t) {
  if (!(t >= 0.0) || !(g >= 0.0)) throw DomainError("variance needs g, t >= 0");
  const double a = 2.0 * g * t;
  if (a == 0.0) return 0.0;
  // The closed form cancels to O(a²); use the short-time expansion C(0) t² there.
  if (a < 1e-3) return a * a * (0.125 - 0.5 / (kPi * kPi));
  const double j0 = special::bessel_j0(a), j1 = special::bessel_j1(a);
  const double s = std::sin(a);
  const double bessel = 0.25 * a * a * (j0 * j0 + j1 * j1) - 0.25 * a * j0 * j1;
  const double sinc_part = s * s - a * special::sine_integral(2.0 * a) +
                           0.5 * (std::log(2.0 * a) + kEulerGamma - special::cosine_integral(2.0 * a));
  return bessel + sinc_part / (kPi * kPi);
}

double bulk_variance_asymptotic(double g, double t) {
  if (!(t > 0.0) || !(g > 0.0)) throw DomainError("asymptotic variance needs g, t > 0");
  return (std::log(4.0 * g * t) + kEulerGamma + 1.0) / (2.0 * kPi * kPi);
}

double sine_kernel_number_variance(double x) {
  if (!(x > 0.0)) throw DomainError("window must be positive");
  return (std::log(2.0 * kPi * x) + kEulerGamma + 1.0) / (kPi * kPi);
}

double localization_length(double energy, double disorder, double g) {
  if (!(disorder > 0.0)) throw DomainError("disorder strength must be positive");
  if (!(g > 0.0) || std::abs(energy) > 2.0 * g) throw DomainError("energy outside the band");
  return std::max(0.0, 96.0 * g * g - 24.0 * energy * energy) / (disorder * disorder);
}

Crossover crossover_time(double current, double diffusion) {
  if (!(current > 0.0) || !(diffusion > 0.0)) throw DomainError("crossover needs J > 0 and D > 0");
  const double a = 2.0 * kPi * diffusion / current;
  if (a > std::exp(-1.0)) throw NoCrossing("noise too large: the log law never crosses D t");
  const double x = -special::lambert_wm1(-a) / a;
  return {x / current, std::log(current / diffusion) / diffusion, x};
}

double thermal_crossover(double current, double sigma) {
  if (!(current > 0.0)) throw DomainError("current must be positive");
  if (!(sigma > 1.0)) throw DomainError("thermal crossover needs Σ > 1");
  return sigma * std::exp(sigma) / current;
}

DisorderCrossover disorder_crossover(double current, double eps, double eps0, double diffusion) {
  if (!(current > 0.0) || !(eps > 0.0) || !(eps0 > 0.0) || !(diffusion >= 0.0))
    throw DomainError("disorder crossover needs J, ε, ε₀ > 0 and D ≥ 0");
  const double r = (eps / eps0) * (eps / eps0);
  DisorderCrossover out;
  out.time = 1.0 / (r * current);
  if (!(diffusion / current < 0.1 * r)) {
    out.regime_ok = false;
    out.diagnostic = "intrinsic noise not negligible: D/J is not << (eps/eps0)^2";
  } else if (!(r < 0.1)) {
    out.regime_ok = false;
    out.diagnostic = "disorder not perturbative: (eps/eps0)^2 is not << 1";
  }
  return out;
}

}  // namespace qclock
