#include "qclock/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <vector>

#include "kernels_detail.hpp"

namespace qclock::kernels {

namespace {

std::atomic<bool> g_force_scalar{false};

bool env_forces_scalar() {
  const char* v = std::getenv("QCLOCK_FORCE_SCALAR");
  return v != nullptr && std::strcmp(v, "0") != 0 && *v != '\0';
}

}  // namespace

bool avx2_available() noexcept {
#if defined(__x86_64__) || defined(__i386__)
  static const bool ok = __builtin_cpu_supports("avx2");
  return ok;
#else
  return false;
#endif
}

Isa active_isa() noexcept {
  static const bool env = env_forces_scalar();
  if (env || g_force_scalar.load(std::memory_order_relaxed) || !avx2_available())
    return Isa::Scalar;
  return Isa::Avx2;
}

void force_scalar(bool on) noexcept { g_force_scalar.store(on, std::memory_order_relaxed); }

const char* isa_name(Isa isa) noexcept { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

void transmission_batch_scalar(const TridiagView& h, std::span<const double> energies,
                               std::span<double> out) {
  std::vector<double> g2(static_cast<std::size_t>(h.n > 1 ? h.n - 1 : 0));
  bool broken = false;
  for (int k = 0; k + 1 < h.n; ++k) {
    g2[k] = h.off[k] * h.off[k];
    broken = broken || g2[k] == 0.0;
  }
  for (std::size_t e = 0; e < energies.size(); ++e)
    out[e] = broken ? 0.0 : detail::transmission_one(h, g2.data(), energies[e]);
}

void riccati_rhs_scalar(const RiccatiParams& p, const cplx* C, cplx* out) {
  const auto* c = reinterpret_cast<const double*>(C);
  auto* o = reinterpret_cast<double*>(out);
  for (int j = 0; j < p.n; ++j)
    for (int i = 0; i < p.n; ++i) detail::riccati_entry(p, c, o, i, j);
}

void transmission_batch(const TridiagView& h, std::span<const double> energies,
                        std::span<double> out) {
  if (active_isa() == Isa::Avx2)
    transmission_batch_avx2(h, energies, out);
  else
    transmission_batch_scalar(h, energies, out);
}

void riccati_rhs(const RiccatiParams& p, const cplx* C, cplx* out) {
  if (active_isa() == Isa::Avx2)
    riccati_rhs_avx2(p, C, out);
  else
    riccati_rhs_scalar(p, C, out);
}

}  // namespace qclock::kernels
