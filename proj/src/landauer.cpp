#include "qclock/landauer.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "qclock/kernels.hpp"
#include "qclock/quadrature.hpp"

namespace qclock {

namespace {

constexpr double kTwoPi = 2.0 * kPi;

struct SplitDiagonal {
  std::vector<double> re, im;
  kernels::TridiagView view;
};

SplitDiagonal split(const EffectiveHamiltonian& h) {
  SplitDiagonal s;
  const int n = h.size();
  s.re.resize(n);
  s.im.resize(n);
  for (int i = 0; i < n; ++i) {
    s.re[i] = h.diagonal[i].real();
    s.im[i] = h.diagonal[i].imag();
  }
  s.view = {s.re.data(), s.im.data(), h.offdiag.data(), n, h.gamma_left, h.gamma_right};
  return s;
}

double clamp_transmission(double t) {
  if (!(t <= 1.0 + 1e-9) || t < 0.0)
    throw InvariantViolation("transmission outside [0, 1]: " + std::to_string(t));
  return std::min(t, 1.0);
}

double fermi(double e, double mu, double beta) {
  if (std::isinf(mu)) return mu > 0 ? 1.0 : 0.0;
  if (std::isinf(beta)) return e < mu ? 1.0 : (e > mu ? 0.0 : 0.5);
  const double x = beta * (e - mu);
  if (x > 0) {
    const double ex = std::exp(-x);
    return ex / (1.0 + ex);
  }
  return 1.0 / (1.0 + std::exp(x));
}

}  // namespace

TransportSummary make_summary(double current, double diffusion) {
  TransportSummary s{current, diffusion, 0.0};
  s.fano = current > 0.0 ? diffusion / current : std::numeric_limits<double>::infinity();
  return s;
}

double transmission(const EffectiveHamiltonian& h, double energy) {
  double out = 0.0;
  transmission(h, std::span<const double>(&energy, 1), std::span<double>(&out, 1));
  return out;
}

void transmission(const EffectiveHamiltonian& h, std::span<const double> energies,
                  std::span<double> out) {
  if (out.size() != energies.size()) throw DomainError("transmission: output size mismatch");
  SplitDiagonal s = split(h);
  kernels::transmission_batch(s.view, energies, out);
  for (double& t : out) t = clamp_transmission(t);
}

double quadrature_half_width(const EffectiveHamiltonian& h) {
  double gmax = 0.0, shift = 0.0;
  for (double g : h.offdiag) gmax = std::max(gmax, std::abs(g));
  for (int i = 0; i < h.size(); ++i) shift = std::max(shift, std::abs(h.diagonal[i].real()));
  return 2.0 * gmax + 10.0 * std::max(h.gamma_left, h.gamma_right) + shift;
}

SpectralDecomposition spectral_decompose(const EffectiveHamiltonian& h, double gap_tol) {
  const int n = h.size();
  Eigen::ComplexEigenSolver<Matrix> es(h.matrix, true);
  if (es.info() != Eigen::Success) throw DegenerateSpectrum("eigensolver failed");

  SpectralDecomposition d;
  d.gamma_left = h.gamma_left;
  d.gamma_right = h.gamma_right;
  d.eigenvalues = es.eigenvalues();
  d.right_vectors = es.eigenvectors();

  const double scale = std::max(1.0, h.matrix.cwiseAbs().rowwise().sum().maxCoeff());
  d.min_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    if (!(d.eigenvalues[i].imag() < -gap_tol * scale))
      throw DegenerateSpectrum("eigenvalue on or near the real axis");
    for (int j = i + 1; j < n; ++j)
      d.min_gap = std::min(d.min_gap, std::abs(d.eigenvalues[i] - d.eigenvalues[j]));
  }
  if (d.min_gap < gap_tol * scale) throw DegenerateSpectrum("near-degenerate eigenvalues");

  Eigen::PartialPivLU<Matrix> lu(d.right_vectors);
  d.inverse_vectors = lu.inverse();
  const double resid =
      (d.right_vectors * d.eigenvalues.asDiagonal() * d.inverse_vectors - h.matrix).cwiseAbs().maxCoeff();
  if (!(resid <= 1e-10 * scale)) throw DegenerateSpectrum("ill-conditioned eigenbasis");

  Vector a(n);
  for (int l = 0; l < n; ++l) a[l] = d.right_vectors(0, l) * d.inverse_vectors(l, n - 1);
  d.coeffs = a * a.adjoint();
  return d;
}

double current_zero_T(const SpectralDecomposition& d) {
  const int n = static_cast<int>(d.eigenvalues.size());
  cplx sum = 0.0;
  double mag = 0.0;
  for (int m = 0; m < n; ++m)
    for (int l = 0; l < n; ++l) {
      const cplx term = d.coeffs(l, m) / (d.eigenvalues[l] - std::conj(d.eigenvalues[m]));
      sum += term;
      mag += std::abs(term);
    }
  const cplx j = cplx(0.0, -1.0) * sum * (d.gamma_left * d.gamma_right);
  if (std::abs(j.imag()) > 1e-10 * std::max(1.0, mag * d.gamma_left * d.gamma_right))
    throw InvariantViolation("current residue sum has a non-negligible imaginary part");
  return j.real();
}

double noise_zero_T(const SpectralDecomposition& d) {
  const int n = static_cast<int>(d.eigenvalues.size());
  const Vector& lam = d.eigenvalues;
  const Vector mu = lam.conjugate();
  const Matrix& C = d.coeffs;

  // inv(l, m) = 1/(λ_l - μ_m); x(n, m) = Σ_l C_{ln}/(λ_l - μ_m)
  Matrix inv(n, n);
  for (int m = 0; m < n; ++m)
    for (int l = 0; l < n; ++l) inv(l, m) = 1.0 / (lam[l] - mu[m]);
  const Matrix x = C.transpose() * inv;

  cplx sum = 0.0;
  for (int m = 0; m < n; ++m) {
    cplx am1 = 0.0, a0 = 0.0;
    for (int l = 0; l < n; ++l) {
      am1 -= C(l, m) * inv(l, m);
      a0 -= C(l, m) * inv(l, m) * inv(l, m);
    }
    for (int k = 0; k < n; ++k)
      if (k != m) a0 += x(k, m) / (mu[k] - mu[m]);
    sum += 2.0 * a0 * am1;
  }
  const double g2 = d.gamma_left * d.gamma_right;
  const double int_t2 = (cplx(0.0, kTwoPi) * sum).real() * g2 * g2;
  return current_zero_T(d) - int_t2 / kTwoPi;
}

TransportSummary residue_summary(const SpectralDecomposition& dec) {
  return make_summary(current_zero_T(dec), noise_zero_T(dec));
}

LeadPair LeadPair::fermi(double mu_l, double mu_r, double beta) {
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  if (!(mu_l >= mu_r)) throw DomainError("require mu_left >= mu_right");
  LeadPair p;
  p.kind = Kind::Fermi;
  p.mu_left = mu_l;
  p.mu_right = mu_r;
  p.beta = beta;
  return p;
}

LeadPair LeadPair::constant(double f_l, double f_r) {
  if (!(f_l >= 0.0 && f_l <= 1.0 && f_r >= 0.0 && f_r <= 1.0))
    throw DomainError("occupations must lie in [0, 1]");
  LeadPair p;
  p.kind = Kind::Constant;
  p.f_left = f_l;
  p.f_right = f_r;
  return p;
}

double LeadPair::left(double e) const {
  return kind == Kind::Constant ? f_left : qclock::fermi(e, mu_left, beta);
}

double LeadPair::right(double e) const {
  return kind == Kind::Constant ? f_right : qclock::fermi(e, mu_right, beta);
}

std::vector<double> LeadPair::features() const {
  std::vector<double> f;
  if (kind == Kind::Fermi) {
    for (double mu : {mu_left, mu_right})
      if (std::isfinite(mu)) f.push_back(mu);
  }
  return f;
}

namespace {

// Integrates several T-weighted occupation kernels at once.
template <class Weights>
QuadResult integrate_transport(const EffectiveHamiltonian& h, const LeadPair& leads, int nc,
                               Weights weights, const QuadratureSettings& q) {
  SplitDiagonal s = split(h);
  BatchIntegrand f = [&](std::span<const double> e, std::span<double> out) {
    std::vector<double> t(e.size());
    kernels::transmission_batch(s.view, e, t);
    for (std::size_t k = 0; k < e.size(); ++k) {
      const double tk = clamp_transmission(t[k]);
      double w[8] = {};
      weights(tk, leads.left(e[k]), leads.right(e[k]), w);
      for (int c = 0; c < nc; ++c) out[c * e.size() + k] = w[c] / kTwoPi;
    }
  };
  const double L = quadrature_half_width(h);
  std::vector<double> bp = leads.features();
  double gmax = 0.0;
  for (double g : h.offdiag) gmax = std::max(gmax, g);
  // Pre-split the band so that every resonance (about N of them) starts out
  // inside a resolved panel; pure bisection can otherwise miss narrow peaks.
  double shift = 0.0;
  for (int i = 0; i < h.size(); ++i) shift = std::max(shift, std::abs(h.diagonal[i].real()));
  const double edge = 2.0 * gmax + shift;
  if (edge > 0.0) {
    const int panels = std::max(8, 2 * h.size());
    for (int k = 0; k <= panels; ++k) bp.push_back(-edge + 2.0 * edge * k / panels);
  }
  bp.push_back(0.0);
  QuadOptions opt{q.abs_tol, q.rel_tol, q.max_intervals};
  QuadResult r = integrate_real_line(f, nc, L, opt, bp);
  if (!r.converged) {
    double worst = 0.0;
    for (double e : r.error) worst = std::max(worst, e);
    throw QuadratureError("transport quadrature did not converge", worst);
  }
  return r;
}

}  // namespace

TransportSummary lb_numeric(const EffectiveHamiltonian& h, const LeadPair& leads,
                            const QuadratureSettings& q) {
  auto w = [](double t, double fl, double fr, double* out) {
    const double df = fl - fr;
    out[0] = t * df;
    out[1] = t * (fl * (1.0 - fl) + fr * (1.0 - fr)) + t * (1.0 - t) * df * df;
  };
  QuadResult r = integrate_transport(h, leads, 2, w, q);
  return make_summary(r.value[0], std::max(0.0, r.value[1]));
}

TransportSummary lb_numeric(const EffectiveHamiltonian& h, double mu_l, double mu_r, double beta,
                            const QuadratureSettings& q) {
  return lb_numeric(h, LeadPair::fermi(mu_l, mu_r, beta), q);
}

ForwardNoise forward_only_noise(const EffectiveHamiltonian& h, const LeadPair& leads,
                                const QuadratureSettings& q) {
  auto w = [](double t, double fl, double fr, double* out) {
    const double a = fl * (1.0 - fr), b = fr * (1.0 - fl);
    out[0] = t * a;
    out[1] = t * a - t * t * a * a;
    out[2] = t * b;
    out[3] = t * b - t * t * b * b;
    out[4] = -t * t * a * b;
  };
  QuadResult r = integrate_transport(h, leads, 5, w, q);
  ForwardNoise f{r.value[0], r.value[1], r.value[2], r.value[3], r.value[4]};
  return f;
}

ForwardNoise forward_only_noise(const EffectiveHamiltonian& h, double mu_l, double mu_r,
                                double beta, const QuadratureSettings& q) {
  return forward_only_noise(h, LeadPair::fermi(mu_l, mu_r, beta), q);
}

TransportResult zero_t_transport(const EffectiveHamiltonian& h) {
  try {
    return {residue_summary(spectral_decompose(h)), false};
  } catch (const DegenerateSpectrum&) {
    return {lb_numeric(h, LeadPair::full_bias()), true};
  }
}

TransportResult zero_t_transport(const ChainSpec& spec, std::span<const double> shifts) {
  return zero_t_transport(build_effective_hamiltonian(spec, shifts));
}

TransportSummary constant_bias_transport(double j0, double d0, double fl, double fr) {
  const double df = fl - fr;
  return make_summary(df * j0, (fl * (1.0 - fl) + fr * (1.0 - fr)) * j0 + df * df * d0);
}

TransportSummary wbl_finite_bias(double j0, double d0, double sigma) {
  if (!(sigma >= 0.0)) throw DomainError("entropy must be non-negative");
  if (std::isinf(sigma)) return make_summary(j0, d0);
  const double th = std::tanh(0.5 * sigma);
  const double ch = std::cosh(0.5 * sigma);
  return make_summary(j0 * th, d0 * th * th + j0 / (2.0 * ch * ch));
}

double thermal_boxcar_diffusion(double g, double beta, double sigma) {
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  return (std::tanh(2.0 * beta * g - sigma) + std::tanh(2.0 * beta * g + sigma)) / (kTwoPi * beta);
}

double me_lb_gap_bound(double t_max, double gamma, double delta_edge) {
  if (!(delta_edge > 0.0)) throw DomainError("band-edge distance must be positive");
  if (std::isinf(delta_edge)) return 0.0;
  return t_max / kTwoPi * gamma / delta_edge;
}

}  // namespace qclock
