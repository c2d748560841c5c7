#include "qclock/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>

namespace qclock {

namespace {

constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b;
  std::vector<double> value, error;
  double worst;
  bool operator<(const Segment& o) const { return worst < o.worst; }
};

Segment rule(const BatchIntegrand& f, int nc, double a, double b, std::vector<double>& xs,
             std::vector<double>& ys) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  xs.resize(15);
  for (int k = 0; k < 7; ++k) {
    xs[k] = c - h * kXgk[k];
    xs[14 - k] = c + h * kXgk[k];
  }
  xs[7] = c;
  ys.assign(static_cast<std::size_t>(15 * nc), 0.0);
  f(xs, ys);
  Segment s{a, b, std::vector<double>(nc), std::vector<double>(nc), 0.0};
  for (int comp = 0; comp < nc; ++comp) {
    const double* y = ys.data() + 15 * comp;
    double k = kWgk[7] * y[7], g = kWg[3] * y[7];
    for (int j = 0; j < 7; ++j) {
      const double pair = y[j] + y[14 - j];
      k += kWgk[j] * pair;
      if (j % 2 == 1) g += kWg[j / 2] * pair;
    }
    s.value[comp] = k * h;
    s.error[comp] = std::abs((k - g) * h);
    if (!std::isfinite(s.value[comp])) s.error[comp] = INFINITY;
  }
  s.worst = *std::max_element(s.error.begin(), s.error.end());
  return s;
}

}  // namespace

QuadResult integrate(const BatchIntegrand& f, int nc, double a, double b, const QuadOptions& opt,
                     std::span<const double> breakpoints) {
  std::vector<double> edges{a};
  for (double p : breakpoints)
    if (p > a && p < b) edges.push_back(p);
  std::sort(edges.begin() + 1, edges.end());
  edges.push_back(b);

  std::vector<double> xs, ys;
  std::priority_queue<Segment> heap;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k)
    if (edges[k + 1] > edges[k]) heap.push(rule(f, nc, edges[k], edges[k + 1], xs, ys));

  QuadResult r;
  r.evaluations = 15 * static_cast<int>(heap.size());
  auto totals = [&](std::vector<double>& val, std::vector<double>& err) {
    val.assign(nc, 0.0);
    err.assign(nc, 0.0);
    auto copy = heap;
    // Sum in a fixed (heap) order; the heap layout is deterministic.
    while (!copy.empty()) {
      for (int c = 0; c < nc; ++c) {
        val[c] += copy.top().value[c];
        err[c] += copy.top().error[c];
      }
      copy.pop();
    }
  };

  auto done = [&](const std::vector<double>& val, const std::vector<double>& err) {
    for (int c = 0; c < nc; ++c)
      if (!(err[c] <= std::max(opt.abs_tol, opt.rel_tol * std::abs(val[c])))) return false;
    return true;
  };

  // Running sums avoid re-walking the heap on every refinement.
  std::vector<double> val, err;
  totals(val, err);
  int intervals = static_cast<int>(heap.size());
  while (!done(val, err) && intervals < opt.max_intervals && !heap.empty()) {
    Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {  // interval exhausted at double precision
      heap.push(worst);
      break;
    }
    Segment l = rule(f, nc, worst.a, mid, xs, ys);
    Segment rt = rule(f, nc, mid, worst.b, xs, ys);
    for (int c = 0; c < nc; ++c) {
      val[c] += l.value[c] + rt.value[c] - worst.value[c];
      err[c] += l.error[c] + rt.error[c] - worst.error[c];
    }
    heap.push(std::move(l));
    heap.push(std::move(rt));
    r.evaluations += 30;
    ++intervals;
  }
  // Resum exactly to shed the drift of the running updates.
  totals(r.value, r.error);
  r.converged = done(r.value, r.error);
  return r;
}

QuadResult integrate_real_line(const BatchIntegrand& f, int nc, double L, const QuadOptions& opt,
                               std::span<const double> breakpoints) {
  QuadResult core = integrate(f, nc, -L, L, opt, breakpoints);

  // Tails: E = s L / u, dE = L / u² du, u in (0, 1]. Nodes never touch u = 0.
  auto tail = [&](double sign) {
    BatchIntegrand g = [&, sign](std::span<const double> u, std::span<double> out) {
      std::vector<double> e(u.size());
      for (std::size_t k = 0; k < u.size(); ++k) e[k] = sign * L / u[k];
      f(e, out);
      for (int c = 0; c < nc; ++c)
        for (std::size_t k = 0; k < u.size(); ++k) {
          double& y = out[c * u.size() + k];
          y = y * L / (u[k] * u[k]);
          if (!std::isfinite(y)) y = 0.0;  // integrand decays faster than u^-2 blows up
        }
    };
    return integrate(g, nc, 0.0, 1.0, opt);
  };
  QuadResult lo = tail(-1.0), hi = tail(1.0);
  QuadResult r;
  r.value.resize(nc);
  r.error.resize(nc);
  for (int c = 0; c < nc; ++c) {
    r.value[c] = lo.value[c] + core.value[c] + hi.value[c];
    r.error[c] = lo.error[c] + core.error[c] + hi.error[c];
  }
  r.evaluations = core.evaluations + lo.evaluations + hi.evaluations;
  r.converged = core.converged && lo.converged && hi.converged;
  return r;
}

double integrate_scalar(const std::function<double(double)>& f, double a, double b,
                        const QuadOptions& opt, double* error) {
  BatchIntegrand g = [&](std::span<const double> x, std::span<double> out) {
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = f(x[k]);
  };
  QuadResult r = integrate(g, 1, a, b, opt);
  if (error) *error = r.error[0];
  return r.value[0];
}

}  // namespace qclock
