#include <doctest.h>

#include <cmath>
#include <limits>

#include "fixtures.hpp"
#include "qclock/landauer.hpp"
#include "qclock/quadrature.hpp"
#include "qclock/rng.hpp"

using namespace qclock;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Apodized profile shaped like the optimizer output, fixed so tests stay fast.
ChainSpec apodized(int n) {
  std::vector<double> g(static_cast<std::size_t>(n - 1), 0.45);
  const double edge[] = {0.72, 0.56, 0.5, 0.47};
  for (int k = 0; k < 4 && k < (n - 1) / 2; ++k) g[k] = g[n - 2 - k] = edge[k];
  return ChainSpec::from_couplings(g);
}

ChainSpec random_profile(int n, std::uint64_t seed) {
  RngStream r(seed);
  std::vector<double> g(static_cast<std::size_t>(n - 1));
  for (double& x : g) x = r.uniform(0.2, 1.0);
  return ChainSpec::from_couplings(g);
}

}  // namespace

TEST_CASE("resonant level") {
  auto h = build_effective_hamiltonian(ChainSpec::uniform(1, 0.0));
  CHECK(transmission(h, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  for (double e : {-2.0, 0.3, 5.0}) CHECK(transmission(h, e) == doctest::Approx(1.0 / (e * e + 1.0)).epsilon(1e-14));

  // Independent quadrature oracle on T(E) = 1/(E²+1).
  auto T = [](double e) { return 1.0 / (e * e + 1.0); };
  BatchIntegrand f = [&](std::span<const double> x, std::span<double> out) {
    for (std::size_t k = 0; k < x.size(); ++k) {
      out[k] = T(x[k]) / (2 * kPi);
      out[x.size() + k] = T(x[k]) * (1 - T(x[k])) / (2 * kPi);
    }
  };
  QuadResult q = integrate_real_line(f, 2, 5.0);
  CHECK(q.value[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(q.value[1] == doctest::Approx(0.25).epsilon(1e-12));

  auto dec = spectral_decompose(h);
  CHECK(dec.eigenvalues[0] == cplx(0.0, -1.0));
  CHECK(std::abs(dec.coeffs(0, 0) - 1.0) < 1e-15);
  TransportSummary r = residue_summary(dec);
  CHECK(r.current == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r.diffusion == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(r.fano == doctest::Approx(0.5).epsilon(1e-14));
  TransportSummary l = lb_numeric(h, kInf, -kInf, kInf);
  CHECK(l.current == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(l.diffusion == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("disconnected chain does not transmit") {
  auto h = build_effective_hamiltonian(ChainSpec::uniform(2, 0.0));
  for (double e : {-1.0, 0.0, 0.7}) CHECK(transmission(h, e) == 0.0);
}

TEST_CASE("two-site decomposition") {
  auto h = build_effective_hamiltonian(ChainSpec::uniform(2, 0.5));
  auto dec = spectral_decompose(h);
  Matrix rec = dec.right_vectors * dec.eigenvalues.asDiagonal() * dec.inverse_vectors;
  CHECK((rec - h.matrix).cwiseAbs().maxCoeff() < 1e-12);
  // (-i/2) ± 1/2
  std::vector<double> re{dec.eigenvalues[0].real(), dec.eigenvalues[1].real()};
  std::sort(re.begin(), re.end());
  CHECK(re[0] == doctest::Approx(-0.5));
  CHECK(re[1] == doctest::Approx(0.5));
}

TEST_CASE("transmission bounds and symmetry") {
  for (int n : {3, 10, 25}) {
    ChainSpec s = random_profile(n, 100 + n);
    // mirror-symmetrize
    for (int i = 0; i < n - 1; ++i) s.couplings[n - 2 - i] = s.couplings[i];
    auto h = build_effective_hamiltonian(s);
    for (double e = -4.0; e <= 4.0; e += 0.173) {
      const double t = transmission(h, e);
      CHECK(t >= 0.0);
      CHECK(t <= 1.0);
      CHECK(std::abs(t - transmission(h, -e)) < 1e-10);
    }
  }
}

TEST_CASE("optimized chain transmission is boxcar-like") {
  auto h = build_effective_hamiltonian(fixtures::optimized20());
  const double edge = 2.0 * 0.1829;
  for (double x = -0.8; x <= 0.8; x += 0.05) CHECK(transmission(h, x * edge) > 0.9);
  CHECK(transmission(h, 2.0 * edge) < 1e-2);
  CHECK(transmission(h, 3.0) < 1e-2);
}

TEST_CASE("residue route matches quadrature") {
  for (int n = 2; n <= 40; n += (n < 10 ? 1 : 6)) {
    for (const ChainSpec& s : {apodized(n), random_profile(n, n)}) {
      auto h = build_effective_hamiltonian(s);
      TransportSummary q = lb_numeric(h, LeadPair::full_bias());
      TransportResult r = zero_t_transport(h);
      INFO("n=" << n);
      CHECK(r.summary.current == doctest::Approx(q.current).epsilon(1e-8));
      CHECK(r.summary.diffusion == doctest::Approx(q.diffusion).epsilon(1e-6));
      CHECK(r.summary.fano * r.summary.current == doctest::Approx(r.summary.diffusion).epsilon(1e-10));
    }
  }
}

TEST_CASE("degenerate spectra fall back to quadrature") {
  auto h = build_effective_hamiltonian(ChainSpec::uniform(3, 0.0));
  CHECK_THROWS_AS(spectral_decompose(h), DegenerateSpectrum);
  TransportResult r = zero_t_transport(ChainSpec::uniform(3, 0.0));
  CHECK(r.summary.current == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("empty bias window") {
  auto h = build_effective_hamiltonian(apodized(6));
  TransportSummary z = lb_numeric(h, 0.3, 0.3, kInf);
  CHECK(std::abs(z.current) < 1e-12);
  CHECK(std::abs(z.diffusion) < 1e-12);
  ForwardNoise fz = forward_only_noise(h, 0.3, 0.3, kInf);
  CHECK(std::abs(fz.j_plus) < 1e-12);
  CHECK(std::abs(fz.cross_term) < 1e-12);
}

TEST_CASE("constant occupations reduce to WBL formulas") {
  auto h = build_effective_hamiltonian(apodized(8));
  TransportSummary full = lb_numeric(h, LeadPair::full_bias());
  for (double sigma : {0.5, 2.0, 5.5}) {
    const double fl = 1.0 / (1.0 + std::exp(-sigma));
    TransportSummary q = lb_numeric(h, LeadPair::constant(fl, 1.0 - fl));
    TransportSummary w = wbl_finite_bias(full.current, full.diffusion, sigma);
    CHECK(q.current == doctest::Approx(w.current).epsilon(1e-9));
    CHECK(q.diffusion == doctest::Approx(w.diffusion).epsilon(1e-9));
  }
}

TEST_CASE("wbl_finite_bias limits") {
  TransportSummary a = wbl_finite_bias(0.3, 0.01, kInf);
  CHECK(a.current == 0.3);
  CHECK(a.diffusion == 0.01);
  TransportSummary z = wbl_finite_bias(0.3, 0.01, 0.0);
  CHECK(z.current == 0.0);
  CHECK(z.diffusion == doctest::Approx(0.15));
  CHECK(std::isinf(z.fano));
  // log D_Σ slope -1 at large Σ
  const double d1 = wbl_finite_bias(0.3, 1e-9, 14.0).diffusion, d2 = wbl_finite_bias(0.3, 1e-9, 16.0).diffusion;
  CHECK((std::log(d2) - std::log(d1)) / 2.0 == doctest::Approx(-1.0).epsilon(0.02));
}

TEST_CASE("thermal boxcar") {
  const double g = 0.5;
  for (double beta : {0.5, 2.0, 10.0})
    CHECK(thermal_boxcar_diffusion(g, beta, 0.0) == doctest::Approx(std::tanh(2 * beta * g) / (kPi * beta)));
  const double beta = 1.0;
  const double a = thermal_boxcar_diffusion(g, beta, 12.0), b = thermal_boxcar_diffusion(g, beta, 14.0);
  CHECK((std::log(b) - std::log(a)) / 2.0 == doctest::Approx(-2.0).epsilon(1e-3));
  CHECK(a == doctest::Approx(std::sinh(4 * beta * g) / (kPi * beta) * std::exp(-24.0)).epsilon(1e-3));
  // Bias inside the band: D β stays bounded.
  double lo = 1e300, hi = 0.0;
  for (double bt = 1.0; bt <= 1000.0; bt *= 2.0) {
    const double v = thermal_boxcar_diffusion(g, bt, 0.5 * bt) * bt;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(hi / lo < 2.0);
  CHECK_THROWS_AS(thermal_boxcar_diffusion(g, -1.0, 0.0), DomainError);
}

TEST_CASE("gap bound") {
  CHECK(me_lb_gap_bound(1.0, 1.0, 10.0) == doctest::Approx(1.0 / (20.0 * kPi)));
  CHECK(me_lb_gap_bound(1.0, 1.0, kInf) == 0.0);
  CHECK_THROWS_AS(me_lb_gap_bound(1.0, 1.0, 0.0), DomainError);
}

TEST_CASE("forward-only decomposition") {
  auto h = build_effective_hamiltonian(apodized(10));
  ForwardNoise full = forward_only_noise(h, LeadPair::full_bias());
  TransportSummary ref = lb_numeric(h, LeadPair::full_bias());
  CHECK(full.j_minus == 0.0);
  CHECK(full.cross_term == 0.0);
  CHECK(full.d_plus == doctest::Approx(ref.diffusion).epsilon(1e-10));

  for (const LeadPair& leads : {LeadPair::constant(0.9, 0.2), LeadPair::fermi(0.4, -0.4, 3.0)}) {
    ForwardNoise f = forward_only_noise(h, leads);
    TransportSummary s = lb_numeric(h, leads);
    CHECK(f.j_plus - f.j_minus == doctest::Approx(s.current).epsilon(1e-9));
    CHECK(std::abs(f.d_plus + f.d_minus - 2.0 * f.cross_term - s.diffusion) < 1e-8);
  }

  // Boxcar limit at large entropy: D₊ ~ J e^{-Σ}.
  auto dplus = [&](double sigma) {
    const double fl = 1.0 / (1.0 + std::exp(-sigma));
    return forward_only_noise(h, LeadPair::constant(fl, 1.0 - fl)).d_plus;
  };
  const double s1 = 8.0, s2 = 10.0;
  const double slope = (std::log(dplus(s2) - 0.0) - std::log(dplus(s1))) / (s2 - s1);
  // D₊ tends to the zero-T D plus J e^{-Σ}; subtract the constant part.
  const double d0 = ref.diffusion;
  const double slope_excess = (std::log(dplus(s2) - d0) - std::log(dplus(s1) - d0)) / (s2 - s1);
  CHECK(slope <= 0.0);
  CHECK(slope_excess == doctest::Approx(-1.0).epsilon(0.02));
}

TEST_CASE("finite temperature Fermi leads") {
  auto h = build_effective_hamiltonian(apodized(6));
  TransportSummary cold = lb_numeric(h, 10.0, -10.0, 50.0);
  TransportSummary full = lb_numeric(h, LeadPair::full_bias());
  CHECK(cold.current == doctest::Approx(full.current).epsilon(1e-8));
  TransportSummary warm = lb_numeric(h, 0.2, -0.2, 2.0);
  CHECK(warm.current > 0.0);
  CHECK(warm.diffusion > 0.0);
}
