#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qclock/chain.hpp"
#include "qclock/types.hpp"

namespace qclock {

// Unconditional covariance flow dC/dt = K C + C K† + P.
struct DriftMatrix {
  Matrix K;  // i h - ½(Γ_L Π_1 + Γ_R Π_N)
  Matrix P;  // Γ_L f_L Π_1 + Γ_R f_R Π_N
  double gamma_left = 1.0, gamma_right = 1.0;
  double f_left = 1.0, f_right = 0.0;
};

// Throws DomainError when K is not Hurwitz (e.g. a site decoupled from both leads).
DriftMatrix drift_matrix(const ChainSpec& spec, std::span<const double> shifts = {});

// Solves K X + X K† = Y by complex Schur reduction (Bartels–Stewart). The
// factorization of K is reused across right-hand sides.
class LyapunovSolver {
 public:
  explicit LyapunovSolver(const Matrix& K);
  Matrix solve(const Matrix& Y) const;
  const Matrix& K() const noexcept { return K_; }

 private:
  Matrix K_, U_, T_;
};

Matrix lyapunov_solve(const Matrix& K, const Matrix& Y);
// Same equation through the N²-sized Kronecker system; intended for N ≤ 64.
Matrix lyapunov_solve_kron(const Matrix& K, const Matrix& Y);
// max |K X + X K† - Y|
double lyapunov_residual(const Matrix& K, const Matrix& X, const Matrix& Y);

// e^{K t} with the eigendecomposition path when it is well conditioned and
// scaling-and-squaring otherwise.
class Propagator {
 public:
  explicit Propagator(const Matrix& K, double max_condition = 1e6);
  Matrix exp(double t) const;
  // Row `r` of e^{K t}.
  Eigen::RowVectorXcd exp_row(double t, int r) const;
  bool uses_eigenbasis() const noexcept { return eigen_; }
  double condition() const noexcept { return cond_; }

 private:
  Matrix K_, V_, Vinv_;
  Vector lambda_;
  bool eigen_ = false;
  double cond_ = 0.0;
};

struct VarianceCurve {
  std::vector<double> times;
  std::vector<double> variance;
  std::vector<double> slope;  // D(t) = d Var / dt
  double current = 0.0;
  double diffusion = 0.0;
  double activity = 0.0;
  // Largest |Im| / |Re| seen in the traces that are supposed to be real.
  double imag_ratio = 0.0;
};

// Everything the exact moment formulas need for one chain, computed once.
class MomentEngine {
 public:
  explicit MomentEngine(const ChainSpec& spec, std::span<const double> shifts = {});

  const ChainSpec& spec() const noexcept { return spec_; }
  const DriftMatrix& drift() const noexcept { return drift_; }
  const Matrix& steady_state() const noexcept { return css_; }
  const LyapunovSolver& lyapunov() const noexcept { return lyap_; }
  const Propagator& propagator() const;

  double current() const noexcept { return current_; }
  double activity() const noexcept { return activity_; }
  // One-body matrix of 𝒥ρ_ss / J (net right-lead current superoperator).
  const Matrix& jump_dressed() const;
  double diffusion() const;

  // J Γ_R (e^{Kτ}(C^σ - C_ss)e^{K†τ})_NN = ⟨I(τ)I(0)⟩ - J² for τ > 0.
  double boundary_correlator(double tau) const;

  VarianceCurve number_variance(std::span<const double> times) const;
  // Bond k counted from the right end (k = 1 is the last bond).
  VarianceCurve bulk_number_variance(int k, std::span<const double> times) const;
  // Hermitian one-body matrix with ⟨j_k⟩ = tr[J_k C] for the particle current
  // across bond k from the left part to the right part.
  Matrix bond_current_matrix(int k) const;

 private:
  ChainSpec spec_;
  std::vector<double> shifts_;
  DriftMatrix drift_;
  LyapunovSolver lyap_;
  Matrix css_;
  double current_ = 0.0, activity_ = 0.0;
  mutable std::optional<Propagator> prop_;
  mutable std::optional<Matrix> csigma_;
  mutable std::optional<double> diffusion_;
  mutable double imag_ratio_ = 0.0;
};

Matrix steady_state_covariance(const ChainSpec& spec, std::span<const double> shifts = {});
double me_current(const ChainSpec& spec, std::span<const double> shifts = {});
double dynamical_activity(const ChainSpec& spec, std::span<const double> shifts = {});
Matrix jump_dressed_covariance(const ChainSpec& spec, std::span<const double> shifts = {});
double diffusion_constant(const ChainSpec& spec, std::span<const double> shifts = {});
VarianceCurve number_variance_exact(const ChainSpec& spec, std::span<const double> times);
VarianceCurve bulk_number_variance(const ChainSpec& spec, int k, std::span<const double> times);

// Full counting statistics of a Gaussian state: for N = Σ A_ji c_i† c_j,
// log ⟨e^{λN}⟩ = log det[I + C(e^{λA} - I)]. Mean tr[CA], variance tr[CA²] - tr[(CA)²].
double levitov_lesovik_log_mgf(const Matrix& C, const Matrix& A, double lambda);
// Cumulants by Richardson-extrapolated central differences of the log-MGF.
double levitov_lesovik_mean(const Matrix& C, const Matrix& A, double h = 1e-4);
double levitov_lesovik_variance(const Matrix& C, const Matrix& A, double h = 1e-3);

// Covariance of the infinite-lattice Fermi sea at filling ν restricted to a
// window of L sites: C_ij = sin(πν(i-j)) / (π(i-j)). With unit density the
// window length is x = νL.
Matrix fermi_sea_window(int sites, double filling);

std::vector<double> log_spaced(double t0, double t1, int steps);

}  // namespace qclock
