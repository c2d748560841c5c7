#pragma once

#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "qclock/chain.hpp"
#include "qclock/types.hpp"

namespace qclock {

struct SpectralDecomposition {
  Vector eigenvalues;      // λ, all with Im λ < 0
  Matrix right_vectors;    // Q
  Matrix inverse_vectors;  // Q⁻¹
  Matrix coeffs;           // C_{λμ} = Q_{1λ}(Q⁻¹)_{λN} conj(Q_{1μ}(Q⁻¹)_{μN})
  double gamma_left = 1.0;
  double gamma_right = 1.0;
  double min_gap = 0.0;
};

struct TransportSummary {
  double current = 0.0;
  double diffusion = 0.0;
  double fano = 0.0;  // +inf when current vanishes
};

TransportSummary make_summary(double current, double diffusion);

// Γ_L Γ_R |[(h_eff - E)^{-1}]_{1N}|². Raw values above 1 + 1e-9 throw
// InvariantViolation; values in (1, 1 + 1e-9] are clamped.
double transmission(const EffectiveHamiltonian& h, double energy);
// Batched form (SIMD-dispatched), same clamping policy.
void transmission(const EffectiveHamiltonian& h, std::span<const double> energies,
                  std::span<double> out);

// Gap tolerance is relative to the spectral norm scale of h_eff.
SpectralDecomposition spectral_decompose(const EffectiveHamiltonian& h, double gap_tol = 1e-9);

// Zero temperature, full bias. J = -i Σ C_{λμ}/(λ - μ*) times Γ_LΓ_R.
double current_zero_T(const SpectralDecomposition& dec);
// D = J - ∫T²/2π, with ∫T² from the double-pole residues.
double noise_zero_T(const SpectralDecomposition& dec);
TransportSummary residue_summary(const SpectralDecomposition& dec);

// Lead occupations as functions of energy. Fermi leads use μ and β
// (β = +inf gives step functions; μ = ±inf gives a filled/empty lead).
// Constant leads use the energy-independent f of the wide-band picture.
struct LeadPair {
  enum class Kind { Fermi, Constant } kind = Kind::Constant;
  double mu_left = 0.0, mu_right = 0.0, beta = std::numeric_limits<double>::infinity();
  double f_left = 1.0, f_right = 0.0;

  static LeadPair fermi(double mu_l, double mu_r, double beta);
  static LeadPair constant(double f_l, double f_r);
  static LeadPair full_bias() { return constant(1.0, 0.0); }

  double left(double e) const;
  double right(double e) const;
  // Energies where the occupations have kinks or steep features.
  std::vector<double> features() const;
};

struct QuadratureSettings {
  double abs_tol = 1e-12;
  double rel_tol = 1e-11;
  int max_intervals = 20000;
};

// Landauer–Büttiker current and zero-frequency noise by adaptive quadrature:
//   J = ∫ T (f_L - f_R) / 2π
//   D = ∫ [T (f_L(1-f_L) + f_R(1-f_R)) + T(1-T)(f_L - f_R)²] / 2π
// Throws QuadratureError carrying the achieved tolerance when it cannot converge.
TransportSummary lb_numeric(const EffectiveHamiltonian& h, const LeadPair& leads,
                            const QuadratureSettings& q = {});
TransportSummary lb_numeric(const EffectiveHamiltonian& h, double mu_l, double mu_r, double beta,
                            const QuadratureSettings& q = {});

// Residue route with automatic fallback to quadrature on near-degenerate spectra.
struct TransportResult {
  TransportSummary summary;
  bool used_quadrature = false;
};
TransportResult zero_t_transport(const EffectiveHamiltonian& h);
TransportResult zero_t_transport(const ChainSpec& spec, std::span<const double> shifts = {});

// Constant occupations from the zero-T/full-bias pair (J, D):
//   J_f = (f_L - f_R) J,  D_f = (f_L(1-f_L) + f_R(1-f_R)) J + (f_L - f_R)² D.
TransportSummary constant_bias_transport(double j0, double d0, double f_left, double f_right);

// Symmetric entropy parametrization: J tanh(Σ/2), D tanh²(Σ/2) + J / (2cosh²(Σ/2)).
TransportSummary wbl_finite_bias(double j0, double d0, double sigma);

// Perfect-boxcar thermal limit: (1/2πβ)[tanh(2βg - Σ) + tanh(2βg + Σ)].
double thermal_boxcar_diffusion(double g, double beta, double sigma);

// |J_ME - J_LB| ≲ (‖T‖_∞ / 2π)(Γ / Δ_edge).
double me_lb_gap_bound(double t_max, double gamma, double delta_edge);

struct ForwardNoise {
  double j_plus = 0.0, d_plus = 0.0;
  double j_minus = 0.0, d_minus = 0.0;
  // Covariance of the forward and backward counts per unit time; the total
  // noise obeys D = D₊ + D₋ - 2 C₊₋.
  double cross_term = 0.0;
};

ForwardNoise forward_only_noise(const EffectiveHamiltonian& h, const LeadPair& leads,
                                const QuadratureSettings& q = {});
ForwardNoise forward_only_noise(const EffectiveHamiltonian& h, double mu_l, double mu_r,
                                double beta, const QuadratureSettings& q = {});

// Half-width of the core quadrature window: 2 max g + 10 Γ.
double quadrature_half_width(const EffectiveHamiltonian& h);

}  // namespace qclock
