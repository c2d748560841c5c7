#include "qclock/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "qclock/kernels.hpp"
#include "qclock/parallel.hpp"
#include "qclock/rng.hpp"

namespace qclock {

const char* jump_name(JumpKind k) noexcept {
  switch (k) {
    case JumpKind::LeftIn: return "left_in";
    case JumpKind::LeftOut: return "left_out";
    case JumpKind::RightIn: return "right_in";
    case JumpKind::RightOut: return "right_out";
  }
  return "?";
}

CovarianceState CovarianceState::vacuum(int n_sites) {
  if (n_sites < 1) throw DomainError("n_sites must be positive");
  return {Matrix::Zero(n_sites, n_sites), 0};
}

double CovarianceState::purity_error() const { return (matrix * matrix - matrix).cwiseAbs().maxCoeff(); }

void CovarianceState::check(double hermitian_tol, double purity_tol) const {
  const double herm = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
  if (herm > hermitian_tol) throw InvariantViolation("conditional covariance lost Hermiticity: " + std::to_string(herm));
  Eigen::SelfAdjointEigenSolver<Matrix> es(matrix, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-8 || es.eigenvalues().maxCoeff() > 1.0 + 1e-8)
    throw InvariantViolation("conditional covariance spectrum left [0, 1]");
  const double pur = purity_error();
  if (pur > purity_tol) throw InvariantViolation("conditional covariance is no longer a projector: " + std::to_string(pur));
  if (std::abs(matrix.trace().real() - n_excitations) > purity_tol)
    throw InvariantViolation("conditional covariance trace drifted from the excitation number");
}

std::array<double, 4> jump_rates(const CovarianceState& c, double f_left, double f_right, double gamma_left,
                                 double gamma_right) {
  const int n = c.size();
  const double c11 = c.matrix(0, 0).real(), cnn = c.matrix(n - 1, n - 1).real();
  std::array<double, 4> r{gamma_left * f_left * (1.0 - c11), gamma_left * (1.0 - f_left) * c11,
                          gamma_right * f_right * (1.0 - cnn), gamma_right * (1.0 - f_right) * cnn};
  for (double& v : r) {
    if (v < -1e-12) throw InvariantViolation("negative jump rate: c11=" + std::to_string(c11) + " cnn=" + std::to_string(cnn));
    v = std::max(v, 0.0);
  }
  return r;
}

namespace {

// RK4 integrator for the no-jump flow with reusable buffers.
class RiccatiStepper {
 public:
  RiccatiStepper(const EffectiveHamiltonian& h, double f_left, double f_right)
      : n_(h.size()), d_(static_cast<std::size_t>(n_)), o_(h.offdiag) {
    for (int i = 0; i < n_; ++i) d_[i] = h.diagonal[i].real();
    p_ = {d_.data(), o_.data(), n_, 0.5 * h.gamma_left * (1.0 - 2.0 * f_left),
          0.5 * h.gamma_right * (1.0 - 2.0 * f_right)};
    k1_.resize(n_, n_);
    k2_.resize(n_, n_);
    k3_.resize(n_, n_);
    k4_.resize(n_, n_);
    tmp_.resize(n_, n_);
  }

  void step(Matrix& c, double dt) {
    kernels::riccati_rhs(p_, c.data(), k1_.data());
    tmp_ = c + (0.5 * dt) * k1_;
    kernels::riccati_rhs(p_, tmp_.data(), k2_.data());
    tmp_ = c + (0.5 * dt) * k2_;
    kernels::riccati_rhs(p_, tmp_.data(), k3_.data());
    tmp_ = c + dt * k3_;
    kernels::riccati_rhs(p_, tmp_.data(), k4_.data());
    c += (dt / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    tmp_ = 0.5 * (c + c.adjoint());
    c.swap(tmp_);
  }

 private:
  int n_;
  std::vector<double> d_, o_;
  kernels::RiccatiParams p_{};
  Matrix k1_, k2_, k3_, k4_, tmp_;
};

void flip_last(Matrix& m) {
  const int n = static_cast<int>(m.rows());
  if (n < 2) return;
  m.row(n - 1) *= -1.0;
  m.col(n - 1) *= -1.0;
}

}  // namespace

CovarianceState no_jump_step(const CovarianceState& c, const EffectiveHamiltonian& h, double f_left,
                             double f_right, double dt) {
  if (c.size() != h.size()) throw DomainError("state and Hamiltonian sizes differ");
  if (!(dt > 0.0)) throw DomainError("time step must be positive");
  RiccatiStepper s(h, f_left, f_right);
  CovarianceState out = c;
  s.step(out.matrix, dt);
  return out;
}

CovarianceState apply_jump(const CovarianceState& c, JumpKind kind) {
  const int n = c.size();
  const Matrix& C = c.matrix;
  const int site = (kind == JumpKind::LeftIn || kind == JumpKind::LeftOut) ? 0 : n - 1;
  const bool create = kind == JumpKind::LeftIn || kind == JumpKind::RightIn;
  const double occ = C(site, site).real();
  const double weight = create ? 1.0 - occ : occ;
  if (weight < 1e-12) throw ImpossibleJump(std::string("jump ") + jump_name(kind) + " has vanishing probability");

  CovarianceState out;
  if (create) {
    const Matrix hole = Matrix::Identity(n, n) - C;
    out.matrix = (hole.col(site) * hole.row(site) + weight * C) / weight;
    out.n_excitations = c.n_excitations + 1;
  } else {
    out.matrix = (occ * C - C.col(site) * C.row(site)) / occ;
    out.n_excitations = c.n_excitations - 1;
  }
  // Jordan–Wigner string of the right-lead spin operators.
  if (site == n - 1 && (kind == JumpKind::RightIn || kind == JumpKind::RightOut)) flip_last(out.matrix);
  return out;
}

CovarianceState reproject(const CovarianceState& c, ReprojectInfo* info) {
  const int n = c.size(), m = c.n_excitations;
  if (m < 0 || m > n) throw InvariantViolation("excitation number outside [0, N]");
  // C is Hermitian, so its singular value decomposition is its eigendecomposition.
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (c.matrix + c.matrix.adjoint()));
  const auto& ev = es.eigenvalues();  // ascending
  CovarianceState out;
  out.n_excitations = m;
  const Matrix v = es.eigenvectors().rightCols(m);
  out.matrix = v * v.adjoint();
  if (info) {
    double gap = 0.5;
    if (m > 0) gap = std::min(gap, ev[n - m] - 0.5);
    if (m < n) gap = std::min(gap, 0.5 - ev[n - m - 1]);
    info->gap = gap;
    info->warned = gap < 1e-3;
  }
  return out;
}

double default_time_step(const ChainSpec& spec) {
  double gmax = 0.0;
  for (double g : spec.couplings) gmax = std::max(gmax, g);
  return 0.01 / std::max({spec.gamma_left(), spec.gamma_right(), 2.0 * gmax});
}

namespace {

void validate_stop(const TrajectoryOptions& opt) {
  if (!(opt.t_max > 0.0)) throw ConfigError("t_max must be positive");
  if (opt.n_ticks < 0) throw ConfigError("n_ticks must be non-negative");
  if (std::isinf(opt.t_max) && opt.n_ticks == 0) throw ConfigError("trajectory needs t_max or n_ticks");
  if (!std::is_sorted(opt.snapshot_times.begin(), opt.snapshot_times.end()))
    throw ConfigError("snapshot times must be ascending");
}

void record_jump(TickRecord& rec, JumpKind k, double t) {
  rec.jumps[static_cast<int>(k)] += 1;
  if (k == JumpKind::RightOut) rec.tick_times.push_back(t);
  if (k == JumpKind::RightIn) rec.right_in_times.push_back(t);
}

TickRecord simulate_rk4(const ChainSpec& spec, const TrajectoryOptions& opt, std::span<const double> shifts) {
  const EffectiveHamiltonian h = build_effective_hamiltonian(spec, shifts);
  const double dt = opt.dt > 0.0 ? opt.dt : default_time_step(spec);
  if (opt.reproject_every < 1) throw ConfigError("reproject_every must be at least 1");
  const double fl = spec.occ_left, fr = spec.occ_right, gl = spec.gamma_left(), gr = spec.gamma_right();
  RiccatiStepper stepper(h, fl, fr);
  RngStream rng(opt.seed);

  TickRecord rec;
  rec.seed = opt.seed;
  rec.dt = dt;
  CovarianceState c = CovarianceState::vacuum(spec.n_sites);
  std::size_t snap = 0;
  double t = 0.0;
  long step = 0;
  for (;;) {
    while (snap < opt.snapshot_times.size() && opt.snapshot_times[snap] <= t) {
      rec.snapshots.push_back(c.matrix);
      ++snap;
    }
    if (t >= opt.t_max || (opt.n_ticks > 0 && static_cast<long>(rec.tick_times.size()) >= opt.n_ticks)) break;

    const auto r = jump_rates(c, fl, fr, gl, gr);
    const double total = r[0] + r[1] + r[2] + r[3];
    if (total * dt > 0.1) throw ConfigError("time step too large: total jump probability per step exceeds 0.1");
    const double u = rng.uniform();
    t = static_cast<double>(++step) * dt;
    if (u < total * dt) {
      // Reuse the same variate to pick the channel.
      double x = u / dt;
      int k = 0;
      while (k < 3 && x >= r[k]) x -= r[k++];
      while (r[k] == 0.0) --k;
      const auto kind = static_cast<JumpKind>(k);
      // Jumps with small probability amplify rounding errors, so restore purity at once.
      ReprojectInfo info;
      c = reproject(apply_jump(c, kind), &info);
      rec.reprojection_warnings += info.warned ? 1 : 0;
      record_jump(rec, kind, t);
    } else {
      stepper.step(c.matrix, dt);
    }
    if (step % opt.reproject_every == 0) {
      rec.max_purity_error = std::max(rec.max_purity_error, c.purity_error());
      c.check(1e-10, 1e-6);
      ReprojectInfo info;
      c = reproject(c, &info);
      rec.reprojection_warnings += info.warned ? 1 : 0;
    }
  }
  rec.t_end = t;
  return rec;
}

// Slater-determinant engine. The no-jump evolution of the orbitals is linear,
// Φ(τ) = exp(-i h' τ) Φ(0) with h' = h - i(a1 Π1 + aN ΠN), and the survival
// probability is exp(-c0 τ) det(Φ(τ)† Φ(τ)). Waiting times invert it exactly.
class OrbitalEngine {
 public:
  OrbitalEngine(const ChainSpec& spec, std::span<const double> shifts)
      : n_(spec.n_sites),
        fl_(spec.occ_left),
        fr_(spec.occ_right),
        gl_(spec.gamma_left()),
        gr_(spec.gamma_right()) {
    const EffectiveHamiltonian h = build_effective_hamiltonian(spec, shifts);
    A_ = cplx(0.0, -1.0) * h.hermitian_part().cast<cplx>();
    A_(0, 0) -= 0.5 * gl_ * (1.0 - 2.0 * fl_);
    A_(n_ - 1, n_ - 1) -= 0.5 * gr_ * (1.0 - 2.0 * fr_);
    c0_ = gl_ * fl_ + gr_ * fr_;
    Eigen::ComplexEigenSolver<Matrix> es(A_, true);
    if (es.info() == Eigen::Success) {
      V_ = es.eigenvectors();
      mu_ = es.eigenvalues();
      Vinv_ = V_.partialPivLu().inverse();
      const double cond = V_.cwiseAbs().colwise().sum().maxCoeff() * Vinv_.cwiseAbs().colwise().sum().maxCoeff();
      eigen_ = std::isfinite(cond) && cond < 1e8;
    }
    segment_ = 4.0 / std::max(gl_, gr_);
    phi_.resize(n_, 0);
  }

  TickRecord run(const TrajectoryOptions& opt) {
    RngStream rng(opt.seed);
    TickRecord rec;
    rec.seed = opt.seed;
    double t = 0.0;
    std::size_t snap = 0;
    phi_.resize(n_, 0);
    auto done = [&] { return opt.n_ticks > 0 && static_cast<long>(rec.tick_times.size()) >= opt.n_ticks; };
    while (!done()) {
      const double target = std::log1p(-rng.uniform());  // log of a uniform on (0, 1]
      double acc = 0.0;
      bool jumped = false;
      while (!jumped) {
        prepare_segment();
        const double len = std::min(segment_, opt.t_max - t);
        Eval end = eval(len);
        double tau = len;
        if (acc + end.log_s <= target) {
          tau = solve(target - acc, len);
          jumped = true;
        }
        while (snap < opt.snapshot_times.size() && opt.snapshot_times[snap] < t + tau) {
          rec.snapshots.push_back(covariance_at(opt.snapshot_times[snap] - t));
          ++snap;
        }
        if (!jumped) {
          const bool dark = end.rate < 1e-13 * c0_scale() && end.log_s > -1e-13;
          acc += end.log_s;
          advance(len);
          t += len;
          if (t >= opt.t_max || (dark && std::isinf(opt.t_max))) {
            rec.t_end = std::min(t, opt.t_max);
            for (; snap < opt.snapshot_times.size() && opt.snapshot_times[snap] <= rec.t_end; ++snap)
              rec.snapshots.push_back(covariance_at(0.0));
            return rec;
          }
          continue;
        }
        advance(tau);
        t += tau;
      }
      // Pick the channel from the rates at the jump time.
      const double c11 = occupation(0), cnn = occupation(n_ - 1);
      const std::array<double, 4> r{gl_ * fl_ * (1.0 - c11), gl_ * (1.0 - fl_) * c11, gr_ * fr_ * (1.0 - cnn),
                                    gr_ * (1.0 - fr_) * cnn};
      const double total = r[0] + r[1] + r[2] + r[3];
      double x = rng.uniform() * total;
      int k = 0;
      while (k < 3 && x >= r[k]) x -= r[k++];
      while (k > 0 && r[k] <= 0.0) --k;
      const auto kind = static_cast<JumpKind>(k);
      jump(kind);
      record_jump(rec, kind, t);
    }
    rec.t_end = t;
    for (; snap < opt.snapshot_times.size() && opt.snapshot_times[snap] <= t; ++snap)
      rec.snapshots.push_back(covariance_at(0.0));
    return rec;
  }

 private:
  struct Eval {
    double log_s = 0.0;  // log survival over the segment so far
    double rate = 0.0;   // total jump rate of the conditional state
  };

  double c0_scale() const { return std::max(gl_, gr_); }

  void prepare_segment() {
    if (eigen_) B_ = Vinv_ * phi_;
  }

  Matrix propagate(double tau) const {
    if (eigen_) {
      Matrix db = B_;
      for (int i = 0; i < n_; ++i) db.row(i) *= std::exp(mu_[i] * tau);
      return V_ * db;
    }
    const Matrix at = A_ * tau;
    return at.exp() * phi_;
  }

  Eval eval(double tau) const {
    Eval e;
    const int m = static_cast<int>(phi_.cols());
    double c11 = 0.0, cnn = 0.0;
    e.log_s = -c0_ * tau;
    if (m > 0) {
      const Matrix p = propagate(tau);
      const Eigen::LLT<Matrix> llt(p.adjoint() * p);
      for (int i = 0; i < m; ++i) e.log_s += 2.0 * std::log(llt.matrixLLT()(i, i).real());
      const Vector y1 = llt.matrixL().solve(p.row(0).adjoint());
      const Vector yn = llt.matrixL().solve(p.row(n_ - 1).adjoint());
      c11 = y1.squaredNorm();
      cnn = yn.squaredNorm();
    }
    e.rate = c0_ + gl_ * (1.0 - 2.0 * fl_) * c11 + gr_ * (1.0 - 2.0 * fr_) * cnn;
    return e;
  }

  // Safeguarded Newton for log S(τ) = y on [0, hi]; log S is decreasing with slope -rate.
  double solve(double y, double hi) const {
    double lo = 0.0;
    Eval e0 = eval(0.0);
    double tau = e0.rate > 0.0 ? std::min(-y / e0.rate, hi) : 0.5 * hi;
    for (int it = 0; it < 200; ++it) {
      const Eval e = eval(tau);
      const double f = e.log_s - y;
      if (f > 0.0)
        lo = tau;
      else
        hi = tau;
      double next = e.rate > 0.0 ? tau + f / e.rate : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - tau) <= 1e-14 * (1.0 + tau) || hi - lo <= 1e-14 * (1.0 + hi)) return next;
      tau = next;
    }
    return tau;
  }

  void advance(double tau) {
    if (phi_.cols() == 0) return;
    const Matrix p = propagate(tau);
    phi_ = orthonormal(p);
  }

  static Matrix orthonormal(const Matrix& p) {
    Eigen::HouseholderQR<Matrix> qr(p);
    return qr.householderQ() * Matrix::Identity(p.rows(), p.cols());
  }

  double occupation(int site) const {
    return phi_.cols() == 0 ? 0.0 : phi_.row(site).squaredNorm();
  }

  Matrix covariance_at(double tau) const {
    if (phi_.cols() == 0) return Matrix::Zero(n_, n_);
    const Matrix q = orthonormal(propagate_from_phi(tau));
    return (q * q.adjoint()).conjugate();
  }

  Matrix propagate_from_phi(double tau) const {
    const Matrix at = A_ * tau;
    return eigen_ ? Matrix(V_ * (mu_ * tau).array().exp().matrix().asDiagonal() * (Vinv_ * phi_))
                  : Matrix(at.exp() * phi_);
  }

  void jump(JumpKind kind) {
    const int site = (kind == JumpKind::LeftIn || kind == JumpKind::LeftOut) ? 0 : n_ - 1;
    const int m = static_cast<int>(phi_.cols());
    if (kind == JumpKind::LeftIn || kind == JumpKind::RightIn) {
      Vector v = -phi_ * phi_.row(site).adjoint();
      v[site] += 1.0;
      const double norm = v.norm();
      if (norm * norm < 1e-12) throw ImpossibleJump("creation on an occupied site");
      Matrix next(n_, m + 1);
      next.leftCols(m) = phi_;
      next.col(m) = v / norm;
      phi_ = orthonormal(next);
    } else {
      const Vector r = phi_.row(site).adjoint();
      if (r.squaredNorm() < 1e-12) throw ImpossibleJump("annihilation on an empty site");
      Eigen::HouseholderQR<Matrix> qr{Matrix(r)};
      const Matrix q = qr.householderQ();
      phi_ = phi_ * q.rightCols(m - 1);
    }
  }

  int n_;
  double fl_, fr_, gl_, gr_, c0_ = 0.0, segment_ = 1.0;
  Matrix A_, V_, Vinv_, B_, phi_;
  Vector mu_;
  bool eigen_ = false;
};

}  // namespace

TickRecord simulate_trajectory(const ChainSpec& spec, const TrajectoryOptions& opt, std::span<const double> shifts) {
  spec.validate();
  validate_stop(opt);
  if (opt.method == TrajectoryMethod::Rk4) return simulate_rk4(spec, opt, shifts);
  OrbitalEngine engine(spec, shifts);
  return engine.run(opt);
}

std::vector<TickRecord> simulate_ensemble(const ChainSpec& spec, int trajectories, std::uint64_t master_seed,
                                          TrajectoryOptions opt, std::span<const double> shifts) {
  if (trajectories < 1) throw ConfigError("need at least one trajectory");
  std::vector<TickRecord> out(static_cast<std::size_t>(trajectories));
  parallel_for(out.size(), [&](std::size_t i) {
    TrajectoryOptions o = opt;
    o.seed = stream_seed(master_seed, i);
    out[i] = simulate_trajectory(spec, o, shifts);
  });
  return out;
}

namespace {

// Power sums of one group (a trajectory, or a block of a single trajectory).
struct Sums {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  void add(double x) {
    s0 += 1.0;
    s1 += x;
    s2 += x * x;
  }
  Sums& operator+=(const Sums& o) {
    s0 += o.s0;
    s1 += o.s1;
    s2 += o.s2;
    return *this;
  }
  Sums operator-(const Sums& o) const { return {s0 - o.s0, s1 - o.s1, s2 - o.s2}; }
  double mean() const { return s1 / s0; }
  double var() const {
    const double m = mean();
    return (s2 / s0 - m * m) * s0 / (s0 - 1.0);
  }
};

MomentEstimate jackknife(double x, const std::vector<Sums>& groups) {
  Sums total;
  for (const Sums& g : groups) total += g;
  MomentEstimate e;
  e.x = x;
  e.samples = static_cast<long>(total.s0);
  if (total.s0 < 2.0) throw DomainError("insufficient samples for a variance estimate");
  e.mean = total.mean();
  e.var = total.var();
  std::vector<double> means, vars;
  for (const Sums& g : groups) {
    const Sums rest = total - g;
    if (g.s0 == 0.0 || rest.s0 < 2.0) continue;
    means.push_back(rest.mean());
    vars.push_back(rest.var());
  }
  const double k = static_cast<double>(means.size());
  if (k >= 2.0) {
    auto spread = [&](const std::vector<double>& v) {
      const double m = std::accumulate(v.begin(), v.end(), 0.0) / k;
      double s = 0.0;
      for (double a : v) s += (a - m) * (a - m);
      return std::sqrt((k - 1.0) / k * s);
    };
    e.mean_err = spread(means);
    e.var_err = spread(vars);
  }
  return e;
}

// With a single trajectory the samples are split into contiguous blocks.
std::vector<Sums> group_samples(const std::vector<std::vector<double>>& per_record) {
  std::vector<Sums> groups;
  if (per_record.size() == 1) {
    const auto& v = per_record[0];
    const std::size_t blocks = std::min<std::size_t>(10, v.size());
    groups.resize(blocks);
    for (std::size_t i = 0; i < v.size(); ++i) groups[i * blocks / v.size()].add(v[i]);
    return groups;
  }
  for (const auto& v : per_record) {
    Sums s;
    for (double x : v) s.add(x);
    groups.push_back(s);
  }
  return groups;
}

}  // namespace

std::vector<double> net_tick_times(const TickRecord& r) {
  if (r.right_in_times.empty()) return r.tick_times;
  std::vector<double> out;
  long level = 0, best = 0;
  std::size_t i = 0, j = 0;
  while (i < r.tick_times.size()) {
    if (j < r.right_in_times.size() && r.right_in_times[j] < r.tick_times[i]) {
      --level;
      ++j;
      continue;
    }
    if (++level > best) {
      best = level;
      out.push_back(r.tick_times[i]);
    }
    ++i;
  }
  return out;
}

std::vector<MomentEstimate> waiting_time_stats(std::span<const TickRecord> records, std::span<const int> n_values,
                                               int discard_first) {
  if (records.empty()) throw DomainError("no trajectories");
  if (discard_first < 0) throw DomainError("discard_first must be non-negative");
  std::vector<MomentEstimate> out;
  for (int n : n_values) {
    if (n < 1) throw DomainError("tick counts must be positive");
    std::vector<std::vector<double>> samples;
    for (const TickRecord& r : records) {
      const std::vector<double> t = net_tick_times(r);
      if (static_cast<long>(t.size()) < discard_first + n + 1)
        throw DomainError("trajectory too short for T_" + std::to_string(n));
      std::vector<double> v;
      for (std::size_t k = static_cast<std::size_t>(discard_first); k + n < t.size(); k += n)
        v.push_back(t[k + n] - t[k]);
      samples.push_back(std::move(v));
    }
    out.push_back(jackknife(n, group_samples(samples)));
  }
  return out;
}

std::vector<MomentEstimate> count_stats(std::span<const TickRecord> records, std::span<const double> times,
                                        int discard_first) {
  if (records.empty()) throw DomainError("no trajectories");
  constexpr double kMaxWindows = 20000.0;
  std::vector<MomentEstimate> out;
  for (double w : times) {
    if (!(w > 0.0)) throw DomainError("count windows must be positive");
    std::vector<std::vector<double>> samples;
    for (const TickRecord& r : records) {
      const auto& ticks = r.tick_times;
      if (static_cast<long>(ticks.size()) <= discard_first) throw DomainError("trajectory shorter than burn-in");
      const double s0 = discard_first > 0 ? ticks[static_cast<std::size_t>(discard_first - 1)] : 0.0;
      // Window starts run from one tick to a later one, a whole number of
      // cycles, so neither end of the record biases the counts.
      const auto last = std::upper_bound(ticks.begin(), ticks.end(), r.t_end - w);
      if (last == ticks.begin() || *(last - 1) <= s0) throw DomainError("trajectory shorter than the counting window");
      const double span = *(last - 1) - s0;
      const double stride = std::max(0.5 * w, span / kMaxWindows);
      auto count = [](const std::vector<double>& v, double a, double b) {
        return static_cast<double>(std::upper_bound(v.begin(), v.end(), b) - std::upper_bound(v.begin(), v.end(), a));
      };
      std::vector<double> v;
      for (double s = s0; s < s0 + span; s += stride) v.push_back(count(ticks, s, s + w) - count(r.right_in_times, s, s + w));
      samples.push_back(std::move(v));
    }
    out.push_back(jackknife(w, group_samples(samples)));
  }
  return out;
}

Histogram make_histogram(std::span<const double> samples, double lo, double hi, int bins) {
  if (bins < 1 || !(hi > lo)) throw DomainError("bad histogram range");
  if (samples.empty()) throw DomainError("empty sample");
  Histogram h;
  h.lo = lo;
  h.hi = hi;
  h.prob.assign(static_cast<std::size_t>(bins), 0.0);
  h.samples = static_cast<long>(samples.size());
  double sum = 0.0;
  for (double x : samples) {
    sum += x;
    if (x < lo || x >= hi) continue;
    const int b = std::min(bins - 1, static_cast<int>((x - lo) / (hi - lo) * bins));
    h.prob[static_cast<std::size_t>(b)] += 1.0;
  }
  for (double& p : h.prob) p /= static_cast<double>(samples.size());
  h.mean = sum / static_cast<double>(samples.size());
  return h;
}

ConditionalWaiting conditional_waiting_histogram(std::span<const TickRecord> records, int discard_first, int bins) {
  std::vector<double> all;
  std::vector<std::vector<double>> fast_by, slow_by;
  std::vector<std::vector<double>> waits_by;
  for (const TickRecord& r : records) {
    std::vector<double> w;
    for (std::size_t k = static_cast<std::size_t>(std::max(discard_first, 0)) + 1; k < r.tick_times.size(); ++k)
      w.push_back(r.tick_times[k] - r.tick_times[k - 1]);
    all.insert(all.end(), w.begin(), w.end());
    waits_by.push_back(std::move(w));
  }
  if (all.size() < 2) throw DomainError("not enough waiting times");
  const double mean = std::accumulate(all.begin(), all.end(), 0.0) / static_cast<double>(all.size());
  std::vector<double> fast, slow;
  for (const auto& w : waits_by) {
    std::vector<double> f, s;
    for (std::size_t k = 1; k < w.size(); ++k) (w[k - 1] < mean ? f : s).push_back(w[k]);
    fast.insert(fast.end(), f.begin(), f.end());
    slow.insert(slow.end(), s.begin(), s.end());
    fast_by.push_back(std::move(f));
    slow_by.push_back(std::move(s));
  }
  if (fast.empty() || slow.empty()) throw DomainError("not enough waiting-time pairs");
  ConditionalWaiting out;
  out.current = 1.0 / mean;
  const double hi = 5.0 * mean;
  out.all = make_histogram(all, 0.0, hi, bins);
  out.fast = make_histogram(fast, 0.0, hi, bins);
  out.slow = make_histogram(slow, 0.0, hi, bins);
  const MomentEstimate ef = jackknife(0.0, group_samples(fast_by));
  const MomentEstimate es = jackknife(0.0, group_samples(slow_by));
  out.mean_fast = ef.mean;
  out.mean_fast_err = ef.mean_err;
  out.mean_slow = es.mean;
  out.mean_slow_err = es.mean_err;
  return out;
}

namespace {

template <class Cdf>
DistributionFit fit_scale(const Histogram& h, Cdf cdf) {
  if (h.prob.empty() || !(h.mean > 0.0)) throw DomainError("histogram must be normalized with a positive mean");
  const double w = h.width() / h.mean, s0 = h.lo / h.mean;
  auto ssr = [&](double a) {
    double s = 0.0;
    for (std::size_t i = 0; i < h.prob.size(); ++i) {
      const double x0 = s0 + w * static_cast<double>(i), x1 = x0 + w;
      const double model = cdf(a * x1) - cdf(a * x0);
      s += (h.prob[i] - model) * (h.prob[i] - model);
    }
    return s;
  };
  // Coarse log-spaced scan, then golden-section refinement around the best point.
  double best = 1.0, fbest = ssr(1.0);
  for (double a = 0.2; a <= 5.0; a *= 1.05) {
    const double f = ssr(a);
    if (f < fbest) {
      fbest = f;
      best = a;
    }
  }
  double lo = best / 1.05, hi = best * 1.05;
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - r * (hi - lo), d = lo + r * (hi - lo), fc = ssr(c), fd = ssr(d);
  while (hi - lo > 1e-10 * best) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - r * (hi - lo);
      fc = ssr(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + r * (hi - lo);
      fd = ssr(d);
    }
  }
  const double a = 0.5 * (lo + hi);
  return {a, ssr(a)};
}

}  // namespace

DistributionFit wigner_dyson_fit(const Histogram& h) {
  // Cumulative distribution of the surmise.
  return fit_scale(h, [](double x) {
    return std::erf(2.0 * x / std::sqrt(kPi)) - 4.0 * x / kPi * std::exp(-4.0 * x * x / kPi);
  });
}

DistributionFit exponential_fit(const Histogram& h) {
  return fit_scale(h, [](double x) { return 1.0 - std::exp(-x); });
}

}  // namespace qclock
