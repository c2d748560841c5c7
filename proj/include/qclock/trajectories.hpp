#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "qclock/chain.hpp"
#include "qclock/types.hpp"

namespace qclock {

enum class JumpKind { LeftIn = 0, LeftOut = 1, RightIn = 2, RightOut = 3 };
const char* jump_name(JumpKind k) noexcept;

// Conditional one-body matrix C_ij = ⟨c_i† c_j⟩ of a pure Slater state with
// M excitations (C² = C, tr C = M).
struct CovarianceState {
  Matrix matrix;
  int n_excitations = 0;

  static CovarianceState vacuum(int n_sites);
  int size() const noexcept { return static_cast<int>(matrix.rows()); }
  double purity_error() const;  // max |C² - C|
  // Throws InvariantViolation when Hermiticity, the spectrum or purity drift
  // past the given tolerances.
  void check(double hermitian_tol = 1e-10, double purity_tol = 1e-6) const;
};

// (LeftIn, LeftOut, RightIn, RightOut) rates. Negative values below -1e-12
// throw InvariantViolation; tiny negatives are clipped to zero.
std::array<double, 4> jump_rates(const CovarianceState& c, double f_left, double f_right, double gamma_left,
                                 double gamma_right);
inline std::array<double, 4> jump_rates(const CovarianceState& c, double f_left, double f_right, double gamma) {
  return jump_rates(c, f_left, f_right, gamma, gamma);
}

// One classical RK4 step of the no-jump Riccati flow, followed by
// re-symmetrization. The Hermitian part of h drives the coherent term.
CovarianceState no_jump_step(const CovarianceState& c, const EffectiveHamiltonian& h, double f_left,
                             double f_right, double dt);

// Conditional state after a jump; throws ImpossibleJump when its probability vanishes.
CovarianceState apply_jump(const CovarianceState& c, JumpKind kind);

struct ReprojectInfo {
  double gap = 1.0;  // distance of the spectrum from 1/2 across the cut
  bool warned = false;
};
// Rounds the spectrum of C to the nearest projector of rank M.
CovarianceState reproject(const CovarianceState& c, ReprojectInfo* info = nullptr);

enum class TrajectoryMethod {
  Rk4,    // fixed step, Bernoulli thinning, periodic reprojection
  Exact,  // orbital propagation with waiting times from the exact survival function
};

struct TrajectoryOptions {
  double t_max = std::numeric_limits<double>::infinity();
  long n_ticks = 0;         // stop after this many RightOut jumps (0 = no limit)
  double dt = 0.0;          // 0 picks 0.01 / max(Γ, 2 max g)
  std::uint64_t seed = 0;
  int reproject_every = 50;
  TrajectoryMethod method = TrajectoryMethod::Rk4;
  // Times at which to store the conditional covariance (ascending).
  std::vector<double> snapshot_times;
};

double default_time_step(const ChainSpec& spec);

struct TickRecord {
  std::vector<double> tick_times;      // RightOut
  std::vector<double> right_in_times;  // RightIn, counted negatively in N_t
  std::array<long, 4> jumps{};         // per JumpKind
  std::uint64_t seed = 0;
  double dt = 0.0;  // 0 for the exact engine
  double t_end = 0.0;
  double max_purity_error = 0.0;
  int reprojection_warnings = 0;
  std::vector<Matrix> snapshots;
};

TickRecord simulate_trajectory(const ChainSpec& spec, const TrajectoryOptions& opt,
                               std::span<const double> shifts = {});
// Independent trajectories; trajectory i uses stream_seed(master_seed, i).
std::vector<TickRecord> simulate_ensemble(const ChainSpec& spec, int trajectories, std::uint64_t master_seed,
                                          TrajectoryOptions opt, std::span<const double> shifts = {});

// Statistics with jackknife (leave one trajectory out) standard errors.
struct MomentEstimate {
  double x = 0.0;  // n for T_n, t for N_t
  double mean = 0.0, mean_err = 0.0;
  double var = 0.0, var_err = 0.0;
  long samples = 0;
};

// Times at which the net right-lead count first reaches 1, 2, ...; equal to
// tick_times when no RightIn jumps occurred.
std::vector<double> net_tick_times(const TickRecord& r);

// T_n = t_{k+n} - t_k on the net tick times, from non-overlapping windows after
// discarding the first ticks.
std::vector<MomentEstimate> waiting_time_stats(std::span<const TickRecord> records, std::span<const int> n_values,
                                               int discard_first = 200);
// Net right-lead count in windows of length t, sliding over the stationary part.
std::vector<MomentEstimate> count_stats(std::span<const TickRecord> records, std::span<const double> times,
                                        int discard_first = 200);

struct Histogram {
  double lo = 0.0, hi = 1.0;
  std::vector<double> prob;  // fraction of all samples per bin
  long samples = 0;
  double mean = 0.0;  // sample mean of all samples, including out-of-range ones
  double width() const { return (hi - lo) / static_cast<double>(prob.size()); }
};

Histogram make_histogram(std::span<const double> samples, double lo, double hi, int bins);

struct ConditionalWaiting {
  Histogram all, fast, slow;  // slow/fast: previous wait above/below the mean
  double mean_fast = 0.0, mean_fast_err = 0.0;
  double mean_slow = 0.0, mean_slow_err = 0.0;
  double current = 0.0;  // 1 / mean wait
};

ConditionalWaiting conditional_waiting_histogram(std::span<const TickRecord> records, int discard_first = 200,
                                                 int bins = 60);

struct DistributionFit {
  double scale = 1.0;
  double goodness = 0.0;  // sum of squared residuals of bin probabilities
};

// β = 2 surmise p(s) = (32/π²) s² exp(-4s²/π), s = T / E[T], fitted up to a scale.
DistributionFit wigner_dyson_fit(const Histogram& h);
// Exponential p(s) = b exp(-b s), the uncorrelated (Poisson) reference.
DistributionFit exponential_fit(const Histogram& h);

}  // namespace qclock
