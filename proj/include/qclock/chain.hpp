#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qclock/rng.hpp"
#include "qclock/types.hpp"

namespace qclock {

// A boundary-driven hopping chain: N sites, N-1 couplings, injection at site 1
// and extraction at site N with rate Γ and bath occupations f_L, f_R.
struct ChainSpec {
  int n_sites = 1;
  std::vector<double> couplings;  // g_1..g_{N-1}
  double boundary_rate = 1.0;     // Γ (Γ_L when asymmetric)
  std::optional<double> boundary_rate_right;  // Γ_R; defaults to Γ
  double occ_left = 1.0;
  double occ_right = 0.0;
  std::optional<double> entropy;  // Σ; fixes f_L = 1/(1+e^-Σ), f_R = 1 - f_L
  std::optional<std::uint64_t> seed;

  double gamma_left() const noexcept { return boundary_rate; }
  double gamma_right() const noexcept { return boundary_rate_right.value_or(boundary_rate); }
  bool full_bias() const noexcept { return occ_left == 1.0 && occ_right == 0.0; }

  // Throws DomainError on any broken invariant.
  void validate() const;

  static ChainSpec uniform(int n, double g, double gamma = 1.0);
  // Profile with the given couplings, full bias.
  static ChainSpec from_couplings(std::vector<double> g, double gamma = 1.0);
  // Symmetric finite bias parametrized by the entropy per transported excitation.
  ChainSpec with_entropy(double sigma) const;
  ChainSpec with_occupations(double f_left, double f_right) const;
};

// Occupation of the left bath for entropy Σ (the right bath gets 1 - f_L).
double occupation_from_entropy(double sigma);

void to_json(nlohmann::json& j, const ChainSpec& spec);
void from_json(const nlohmann::json& j, ChainSpec& spec);

ChainSpec load_chain_spec(const std::string& path);
void save_chain_spec(const ChainSpec& spec, const std::string& path);

// Single-excitation effective Hamiltonian h_eff = h - (i/2)(Γ_L Π_1 + Γ_R Π_N).
// Stored densely and as a tridiagonal band; the band is what the hot kernels use.
struct EffectiveHamiltonian {
  Matrix matrix;
  RealVector onsite_shifts;
  Vector diagonal;              // complex diagonal of h_eff
  std::vector<double> offdiag;  // real, symmetric
  double gamma_left = 1.0;
  double gamma_right = 1.0;

  int size() const noexcept { return static_cast<int>(diagonal.size()); }
  // Hermitian part h (real symmetric tridiagonal).
  RealMatrix hermitian_part() const;
};

EffectiveHamiltonian build_effective_hamiltonian(const ChainSpec& spec,
                                                 std::span<const double> shifts = {});

// δω_i i.i.d. uniform on [-W/2, W/2]; consumes exactly N draws.
std::vector<double> sample_onsite_disorder(int n_sites, double strength, RngStream& rng);

struct DisorderedChain {
  ChainSpec spec;
  std::vector<double> shifts;
};

DisorderedChain apply_onsite_disorder(const ChainSpec& spec, double strength, RngStream& rng);

// ĝ_i = g_i + δĝ_i with δĝ_i uniform on [-Δ/2, Δ/2]. Rejects Δ >= 2 min g.
ChainSpec apply_coupling_disorder(const ChainSpec& spec, double strength, RngStream& rng);

}  // namespace qclock
