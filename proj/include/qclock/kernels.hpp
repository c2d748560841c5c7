#pragma once

#include <span>

#include "qclock/types.hpp"

// Hot loops with a scalar reference and an AVX2 variant picked at runtime.
// Both variants perform the same IEEE operations in the same order (no FMA
// contraction), so results agree bitwise; the tests assert exactly that.
namespace qclock::kernels {

enum class Isa { Scalar, Avx2 };

bool avx2_available() noexcept;
// Variant used by the dispatching entry points. Honors QCLOCK_FORCE_SCALAR=1
// and force_scalar().
Isa active_isa() noexcept;
void force_scalar(bool on) noexcept;
const char* isa_name(Isa isa) noexcept;

// Tridiagonal h_eff viewed as split real/imaginary diagonal plus real couplings.
struct TridiagView {
  const double* diag_re;
  const double* diag_im;
  const double* off;  // n - 1 entries
  int n;
  double gamma_left;
  double gamma_right;
};

// T(E_k) = Γ_L Γ_R |[(h_eff - E_k)^{-1}]_{1N}|² for every energy in the batch,
// via the backward continued-fraction recurrence of the tridiagonal resolvent.
void transmission_batch(const TridiagView& h, std::span<const double> energies,
                        std::span<double> out);
void transmission_batch_scalar(const TridiagView& h, std::span<const double> energies,
                               std::span<double> out);
void transmission_batch_avx2(const TridiagView& h, std::span<const double> energies,
                             std::span<double> out);

// Right-hand side of the no-jump covariance flow
//   dC/dt = i(hC - Ch) - a1 (Π1 C + C Π1 - 2 C Π1 C) - aN (ΠN C + C ΠN - 2 C ΠN C)
// for column-major n x n C with real tridiagonal h (diag d, couplings o).
struct RiccatiParams {
  const double* d;
  const double* o;  // n - 1 entries
  int n;
  double a1;
  double aN;
};

void riccati_rhs(const RiccatiParams& p, const cplx* C, cplx* out);
void riccati_rhs_scalar(const RiccatiParams& p, const cplx* C, cplx* out);
void riccati_rhs_avx2(const RiccatiParams& p, const cplx* C, cplx* out);

}  // namespace qclock::kernels
