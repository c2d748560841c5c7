// Compiled with -mavx2 only (no FMA) so every product and sum rounds exactly
// like the scalar reference.
#include <immintrin.h>

#include <vector>

#include "kernels_detail.hpp"

namespace qclock::kernels {

void transmission_batch_avx2(const TridiagView& h, std::span<const double> energies,
                             std::span<double> out) {
  const int n = h.n;
  std::vector<double> g2(static_cast<std::size_t>(n > 1 ? n - 1 : 0));
  bool broken = false;
  for (int k = 0; k + 1 < n; ++k) {
    g2[k] = h.off[k] * h.off[k];
    broken = broken || g2[k] == 0.0;
  }
  const std::size_t m = energies.size();
  if (broken) {
    for (std::size_t e = 0; e < m; ++e) out[e] = 0.0;
    return;
  }

  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d gg = _mm256_set1_pd(h.gamma_left * h.gamma_right);
  std::size_t e = 0;
  for (; e + 4 <= m; e += 4) {
    const __m256d en = _mm256_loadu_pd(energies.data() + e);
    __m256d re = _mm256_sub_pd(_mm256_set1_pd(h.diag_re[n - 1]), en);
    __m256d im = _mm256_set1_pd(h.diag_im[n - 1]);
    __m256d inv = _mm256_div_pd(one, _mm256_add_pd(_mm256_mul_pd(re, re), _mm256_mul_pd(im, im)));
    __m256d q = one;
    for (int k = n - 2; k >= 0; --k) {
      const __m256d s = _mm256_mul_pd(_mm256_set1_pd(g2[k]), inv);
      q = _mm256_mul_pd(q, s);
      re = _mm256_sub_pd(_mm256_sub_pd(_mm256_set1_pd(h.diag_re[k]), en), _mm256_mul_pd(s, re));
      im = _mm256_add_pd(_mm256_set1_pd(h.diag_im[k]), _mm256_mul_pd(s, im));
      inv = _mm256_div_pd(one, _mm256_add_pd(_mm256_mul_pd(re, re), _mm256_mul_pd(im, im)));
    }
    _mm256_storeu_pd(out.data() + e, _mm256_mul_pd(_mm256_mul_pd(gg, q), inv));
  }
  for (; e < m; ++e) out[e] = detail::transmission_one(h, g2.data(), energies[e]);
}

namespace {

// (a * b) for two packed complex numbers in a and one broadcast complex b.
inline __m256d cmul_bcast(__m256d a, double br, double bi) {
  const __m256d t1 = _mm256_mul_pd(a, _mm256_set1_pd(br));
  const __m256d t2 = _mm256_mul_pd(_mm256_permute_pd(a, 0x5), _mm256_set1_pd(bi));
  return _mm256_addsub_pd(t1, t2);
}

}  // namespace

void riccati_rhs_avx2(const RiccatiParams& p, const cplx* Cc, cplx* outc) {
  const int n = p.n;
  const auto* C = reinterpret_cast<const double*>(Cc);
  auto* out = reinterpret_cast<double*>(outc);
  if (n < 4) {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) detail::riccati_entry(p, C, out, i, j);
    return;
  }

  // Per-row coefficients duplicated into (re, im) slots.
  std::vector<double> d2(2 * static_cast<std::size_t>(n)), o2(2 * static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) d2[2 * i] = d2[2 * i + 1] = p.d[i];
  for (int i = 0; i + 1 < n; ++i) o2[2 * i] = o2[2 * i + 1] = p.o[i];

  const __m256d neg_re = _mm256_set_pd(0.0, -0.0, 0.0, -0.0);
  const __m256d minus_two = _mm256_set1_pd(-2.0);
  const __m256d a1 = _mm256_set1_pd(p.a1);
  const __m256d aN = _mm256_set1_pd(p.aN);
  auto at = [&](int r, int c) { return C + 2 * (r + c * n); };

  for (int j = 0; j < n; ++j) {
    detail::riccati_entry(p, C, out, 0, j);
    const __m256d dj = _mm256_set1_pd(p.d[j]);
    int i = 1;
    for (; i + 2 <= n - 1; i += 2) {
      const __m256d dd = _mm256_sub_pd(_mm256_loadu_pd(&d2[2 * i]), dj);
      __m256d t = _mm256_mul_pd(dd, _mm256_loadu_pd(at(i, j)));
      t = _mm256_add_pd(t, _mm256_mul_pd(_mm256_loadu_pd(&o2[2 * (i - 1)]), _mm256_loadu_pd(at(i - 1, j))));
      t = _mm256_add_pd(t, _mm256_mul_pd(_mm256_loadu_pd(&o2[2 * i]), _mm256_loadu_pd(at(i + 1, j))));
      if (j > 0)
        t = _mm256_sub_pd(t, _mm256_mul_pd(_mm256_set1_pd(p.o[j - 1]), _mm256_loadu_pd(at(i, j - 1))));
      if (j < n - 1)
        t = _mm256_sub_pd(t, _mm256_mul_pd(_mm256_set1_pd(p.o[j]), _mm256_loadu_pd(at(i, j + 1))));
      // multiply by i: (re, im) -> (-im, re)
      __m256d r = _mm256_xor_pd(_mm256_permute_pd(t, 0x5), neg_re);

      const int sites[2] = {0, n - 1};
      for (int s = 0; s < 2; ++s) {
        const int site = sites[s];
        const __m256d ci = _mm256_loadu_pd(at(i, site));
        const double* b = at(site, j);
        __m256d u = _mm256_mul_pd(minus_two, cmul_bcast(ci, b[0], b[1]));
        if (j == site) u = _mm256_add_pd(u, ci);
        r = _mm256_sub_pd(r, _mm256_mul_pd(s == 0 ? a1 : aN, u));
      }
      _mm256_storeu_pd(out + 2 * (i + j * n), r);
    }
    for (; i < n; ++i) detail::riccati_entry(p, C, out, i, j);
  }
}

}  // namespace qclock::kernels
