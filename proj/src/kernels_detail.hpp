#pragma once

// Shared element formulas. Both kernel translation units include this so the
// scalar tails of the vector code are literally the reference arithmetic.

#include "qclock/kernels.hpp"

namespace qclock::kernels::detail {

inline double transmission_one(const TridiagView& h, const double* g2, double e) {
  const int n = h.n;
  double re = h.diag_re[n - 1] - e;
  double im = h.diag_im[n - 1];
  double inv = 1.0 / (re * re + im * im);
  double q = 1.0;
  for (int k = n - 2; k >= 0; --k) {
    const double s = g2[k] * inv;
    q = q * s;
    re = (h.diag_re[k] - e) - s * re;
    im = h.diag_im[k] + s * im;
    inv = 1.0 / (re * re + im * im);
  }
  return h.gamma_left * h.gamma_right * q * inv;
}

// One entry (i, j) of the Riccati right-hand side; C and out are interleaved
// complex, column-major.
inline void riccati_entry(const RiccatiParams& p, const double* C, double* out, int i, int j) {
  const int n = p.n;
  auto re = [&](int r, int c) { return C[2 * (r + c * n)]; };
  auto im = [&](int r, int c) { return C[2 * (r + c * n) + 1]; };

  const double dd = p.d[i] - p.d[j];
  double tr = dd * re(i, j);
  double ti = dd * im(i, j);
  if (i > 0) {
    tr = tr + p.o[i - 1] * re(i - 1, j);
    ti = ti + p.o[i - 1] * im(i - 1, j);
  }
  if (i < n - 1) {
    tr = tr + p.o[i] * re(i + 1, j);
    ti = ti + p.o[i] * im(i + 1, j);
  }
  if (j > 0) {
    tr = tr - p.o[j - 1] * re(i, j - 1);
    ti = ti - p.o[j - 1] * im(i, j - 1);
  }
  if (j < n - 1) {
    tr = tr - p.o[j] * re(i, j + 1);
    ti = ti - p.o[j] * im(i, j + 1);
  }
  double rr = -ti;
  double ri = tr;

  for (int lead = 0; lead < 2; ++lead) {
    const int site = lead == 0 ? 0 : n - 1;
    const double a = lead == 0 ? p.a1 : p.aN;
    const double ar = re(i, site), ai = im(i, site);
    const double br = re(site, j), bi = im(site, j);
    double ur = -2.0 * (ar * br - ai * bi);
    double ui = -2.0 * (ai * br + ar * bi);
    if (i == site) {
      ur = ur + br;
      ui = ui + bi;
    }
    if (j == site) {
      ur = ur + ar;
      ui = ui + ai;
    }
    rr = rr - a * ur;
    ri = ri - a * ui;
  }
  out[2 * (i + j * n)] = rr;
  out[2 * (i + j * n) + 1] = ri;
}

}  // namespace qclock::kernels::detail
