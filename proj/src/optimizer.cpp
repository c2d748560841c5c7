#include "qclock/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qclock/landauer.hpp"
#include "qclock/parallel.hpp"
#include "qclock/rng.hpp"

namespace qclock {

std::vector<std::vector<double>> axis_simplex(std::span<const double> x0, double step) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> s(n + 1, std::vector<double>(x0.begin(), x0.end()));
  for (std::size_t k = 0; k < n; ++k) s[k + 1][k] += step;
  return s;
}

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::vector<std::vector<double>> x, const NelderMeadOptions& opt) {
  const int n = static_cast<int>(x.size()) - 1;
  if (n < 1) throw DomainError("nelder_mead: need at least one dimension");
  // Dimension-adaptive coefficients keep the simplex from collapsing in
  // higher dimensions.
  const double alpha = 1.0, beta = 1.0 + 2.0 / n, gamma = 0.75 - 1.0 / (2.0 * n),
               delta = 1.0 - 1.0 / n;

  NelderMeadResult r;
  auto eval = [&](const std::vector<double>& p) {
    ++r.evaluations;
    const double v = f(p);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };
  std::vector<double> fx(n + 1);
  for (int k = 0; k <= n; ++k) fx[k] = eval(x[k]);
  std::vector<int> order(n + 1);
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);

  auto combine = [&](double t, std::vector<double>& out) {
    // out = centroid + t (centroid - worst)
    const auto& w = x[order[n]];
    for (int i = 0; i < n; ++i) out[i] = centroid[i] + t * (centroid[i] - w[i]);
  };

  while (r.evaluations < opt.budget) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fx[a] < fx[b]; });
    const double fbest = fx[order[0]], fworst = fx[order[n]];
    if (std::isfinite(fworst) &&
        std::abs(fworst - fbest) <= opt.rel_tol * (std::abs(fbest) + std::abs(fworst)) + 1e-300) {
      r.converged = true;
      break;
    }
    ++r.iterations;
    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i) centroid[i] += x[order[k]][i] / n;

    combine(alpha, xr);
    const double fr = eval(xr);
    const double fsecond = fx[order[n - 1]];
    if (fr < fbest) {
      combine(alpha * beta, xe);
      const double fe = eval(xe);
      if (fe < fr) {
        x[order[n]] = xe;
        fx[order[n]] = fe;
      } else {
        x[order[n]] = xr;
        fx[order[n]] = fr;
      }
    } else if (fr < fsecond) {
      x[order[n]] = xr;
      fx[order[n]] = fr;
    } else {
      const bool outside = fr < fworst;
      combine(outside ? alpha * gamma : -gamma, xc);
      const double fc = eval(xc);
      if (fc < (outside ? fr : fworst)) {
        x[order[n]] = xc;
        fx[order[n]] = fc;
      } else {
        const auto best = x[order[0]];
        for (int k = 1; k <= n; ++k) {
          auto& p = x[order[k]];
          for (int i = 0; i < n; ++i) p[i] = best[i] + delta * (p[i] - best[i]);
          fx[order[k]] = eval(p);
        }
      }
    }
  }
  const int b = static_cast<int>(std::min_element(fx.begin(), fx.end()) - fx.begin());
  r.x = x[b];
  r.value = fx[b];
  return r;
}

int ProfileParametrization::effective_window() const {
  return std::max(0, std::min(window_m, (n_sites - 1) / 2));
}

int ProfileParametrization::dimension() const {
  const int h = half_length(), m = effective_window();
  if (m >= h) return h;
  return 1 + m + ((tail && m >= 1 && h - m >= 2) ? 1 : 0);
}

std::vector<double> ProfileParametrization::couplings(std::span<const double> theta) const {
  if (static_cast<int>(theta.size()) != dimension())
    throw DomainError("profile parameter count mismatch");
  const int n = n_sites - 1, h = half_length(), m = effective_window();
  std::vector<double> half(static_cast<std::size_t>(h));
  if (m >= h) {
    for (int i = 0; i < h; ++i) half[i] = std::exp(theta[i]);
  } else {
    const double bulk = std::exp(theta[0]);
    const bool has_tail = static_cast<int>(theta.size()) == m + 2;
    const double p = has_tail ? std::exp(theta[m + 1]) : 0.0;
    if (monotone) {
      double next = bulk;
      for (int i = m - 1; i >= 0; --i) next = half[i] = next * (1.0 + std::exp(theta[1 + i]));
    }
    for (int i = 0; i < h; ++i) {
      if (i < m) {
        if (!monotone) half[i] = std::exp(theta[1 + i]);
      } else if (has_tail)
        half[i] = bulk + (half[m - 1] - bulk) * std::pow(static_cast<double>(m) / (i + 1), p);
      else
        half[i] = bulk;
    }
  }
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < h; ++i) g[i] = g[n - 1 - i] = half[i];
  return g;
}

std::vector<double> ProfileParametrization::flat(double g) const {
  std::vector<double> theta(static_cast<std::size_t>(dimension()), std::log(g));
  const int h = half_length(), m = effective_window();
  // Monotone ratios cannot be exactly flat; 2% steps are close enough.
  if (monotone && m < h)
    for (int i = 0; i < m; ++i) theta[1 + i] = std::log(0.02);
  if (m < h && dimension() == m + 2) theta[m + 1] = std::log(2.0);
  return theta;
}

double fano_objective(const ChainSpec& spec) {
  for (double g : spec.couplings)
    if (!(g > 0.0) || !std::isfinite(g)) return std::numeric_limits<double>::infinity();
  try {
    // Quadrature over the SIMD transmission kernel: about 15x cheaper than an
    // eigendecomposition at N = 80 and immune to near-degenerate spectra.
    const TransportSummary s =
        lb_numeric(build_effective_hamiltonian(spec), LeadPair::full_bias());
    return s.current > 0.0 ? s.diffusion / s.current : std::numeric_limits<double>::infinity();
  } catch (const DomainError&) {
    return std::numeric_limits<double>::infinity();
  }
}

namespace {

// Linear resampling of a profile onto a half-chain of length h.
std::vector<double> resample_half(const std::vector<double>& g, int h) {
  const int src = static_cast<int>(g.size() + 1) / 2;
  std::vector<double> out(static_cast<std::size_t>(h));
  for (int i = 0; i < h; ++i) {
    // Keep the boundary values aligned site by site; stretch only the bulk.
    const int j = std::min(i, src - 1);
    out[i] = g[j];
  }
  return out;
}

// Parameters whose profile best matches a given half profile (boundary values
// copied, bulk from the innermost value, tail exponent 2).
std::vector<double> fit_parameters(const ProfileParametrization& P, const std::vector<double>& half) {
  const int h = P.half_length(), m = P.effective_window();
  std::vector<double> theta(static_cast<std::size_t>(P.dimension()));
  if (m >= h) {
    for (int i = 0; i < h; ++i) theta[i] = std::log(half[i]);
    return theta;
  }
  theta[0] = std::log(half[h - 1]);
  for (int i = 0; i < m; ++i) {
    const double next = i + 1 < m ? half[i + 1] : half[h - 1];
    theta[1 + i] = P.monotone ? std::log(std::max(half[i] / next - 1.0, 1e-6)) : std::log(half[i]);
  }
  if (P.dimension() == m + 2) theta[m + 1] = std::log(2.0);
  return theta;
}

}  // namespace

CouplingProfile optimize_couplings(int n_sites, double gamma, const OptimizerOptions& opt) {
  if (n_sites < 2) throw DomainError("optimize_couplings needs N >= 2");
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  if (opt.window_m < 0 || opt.window_m > (n_sites - 1) / 2)
    throw DomainError("window_m must lie in [0, floor((N-1)/2)]");
  if (opt.restarts < 1 || opt.budget < 1) throw DomainError("restarts and budget must be positive");

  ProfileParametrization P{n_sites, opt.window_m, opt.tail, opt.monotone};
  const double cap = opt.max_coupling * gamma;
  auto objective = [&](std::span<const double> theta) {
    std::vector<double> g = P.couplings(theta);
    for (double v : g)
      if (!(v <= cap)) return std::numeric_limits<double>::infinity();
    ChainSpec s = ChainSpec::from_couplings(std::move(g), gamma);
    return fano_objective(s);
  };

  std::vector<double> start;
  if (!opt.warm_start.empty()) start = fit_parameters(P, resample_half(opt.warm_start, P.half_length()));

  // Restarts are independent: restart r starts from a flat profile at
  // initial_g Γ / 2^r (r = 0 is the impedance-matching guess), or from the warm
  // start perturbed by a seeded jitter. Each restart re-seeds its simplex at the
  // optimum found until a fresh simplex stops improving.
  NelderMeadOptions nm{opt.budget, opt.rel_tol, 0.1};
  std::vector<NelderMeadResult> results(static_cast<std::size_t>(opt.restarts));
  parallel_for(results.size(), [&](std::size_t r) {
    std::vector<double> x0;
    if (!start.empty() && !opt.warm_start.empty()) {
      x0 = start;
      RngStream rng(opt.seed, r);
      if (r > 0)
        for (double& v : x0) v += 0.1 * (2.0 * rng.uniform() - 1.0);
    } else {
      x0 = P.flat(opt.initial_g * gamma * std::ldexp(1.0, -static_cast<int>(r)));
    }
    NelderMeadResult acc = nelder_mead(objective, axis_simplex(x0, nm.initial_step), nm);
    for (int polish = 0; polish < 4 && acc.evaluations < opt.budget; ++polish) {
      NelderMeadOptions left = nm;
      left.budget = opt.budget - acc.evaluations;
      left.initial_step = 0.02;
      NelderMeadResult more = nelder_mead(objective, axis_simplex(acc.x, left.initial_step), left);
      const bool improved = more.value < acc.value * (1.0 - 10.0 * opt.rel_tol);
      acc.evaluations += more.evaluations;
      acc.iterations += more.iterations;
      if (more.value < acc.value) {
        acc.x = more.x;
        acc.value = more.value;
      }
      acc.converged = more.converged;
      if (!improved) break;
    }
    results[r] = std::move(acc);
  });

  CouplingProfile best;
  best.objective = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < results.size(); ++r) {
    best.evaluations += results[r].evaluations;
    best.iterations += results[r].iterations;
    if (results[r].value < best.objective) {  // strict: ties keep the lower index
      best.objective = results[r].value;
      best.parameters = results[r].x;
      best.converged = results[r].converged;
      best.best_restart = static_cast<int>(r);
    }
  }
  best.values = P.couplings(best.parameters);
  return best;
}

PowerLawFit fit_power_law(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DomainError("fit_power_law: length mismatch");
  if (xs.size() < 3) throw DomainError("fit_power_law needs at least 3 points");
  const std::size_t n = xs.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw DomainError("fit_power_law needs positive data");
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("fit_power_law needs distinct x values");
  PowerLawFit fit;
  fit.points = static_cast<int>(n);
  fit.exponent = sxy / sxx;
  const double icpt = my - fit.exponent * mx;
  fit.prefactor = std::exp(icpt);
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = ly[i] - icpt - fit.exponent * lx[i];
    ssr += e * e;
  }
  const double s2 = ssr / static_cast<double>(n - 2);
  fit.exponent_err = std::max(std::sqrt(s2 / sxx), 1e-15);
  fit.prefactor_err = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  return fit;
}

ApodizationReport apodization_report(std::span<const double> g) {
  if (g.empty()) throw DomainError("apodization_report: empty profile");
  const std::size_t n = g.size();
  std::size_t lo = n / 3, hi = n - n / 3;
  if (hi <= lo) {
    lo = 0;
    hi = n;
  }
  std::vector<double> mid(g.begin() + lo, g.begin() + hi);
  std::sort(mid.begin(), mid.end());
  const std::size_t k = mid.size();
  const double bulk = k % 2 ? mid[k / 2] : 0.5 * (mid[k / 2 - 1] + mid[k / 2]);
  ApodizationReport r;
  r.bulk_value = bulk;
  // Consecutive deviating couplings counted inward from the left edge.
  int w = 0;
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    if (std::abs(g[i] - bulk) > 0.05 * bulk)
      w = static_cast<int>(i) + 1;
  }
  r.window_length = w;
  r.boundary_ratio = g.front() / bulk;
  return r;
}

}  // namespace qclock
