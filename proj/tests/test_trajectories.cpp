#include <doctest.h>

#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "qclock/moments.hpp"
#include "qclock/rng.hpp"
#include "qclock/trajectories.hpp"

using namespace qclock;

namespace {

// Random Slater state with m orbitals on n sites, C = conj(Φ Φ†).
Matrix random_orbitals(int n, int m, RngStream& r) {
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(r.uniform(-1, 1), r.uniform(-1, 1));
  Eigen::HouseholderQR<Matrix> qr(a);
  return Matrix(qr.householderQ()).leftCols(m);
}

CovarianceState from_orbitals(const Matrix& phi) {
  return {(phi * phi.adjoint()).conjugate(), static_cast<int>(phi.cols())};
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

TickRecord synthetic(const std::vector<double>& waits) {
  TickRecord r;
  double t = 0.0;
  for (double w : waits) r.tick_times.push_back(t += w);
  r.t_end = t;
  return r;
}

}  // namespace

TEST_CASE("vacuum and the filled chain are fixed points of the no-jump flow") {
  const ChainSpec spec = ChainSpec::uniform(4, 0.7);
  const auto h = build_effective_hamiltonian(spec);
  const CovarianceState vac = CovarianceState::vacuum(4);
  CHECK(max_abs(no_jump_step(vac, h, 1.0, 0.0, 0.01).matrix) == 0.0);
  const CovarianceState full{Matrix::Identity(4, 4), 4};
  CHECK(max_abs(no_jump_step(full, h, 1.0, 0.0, 0.01).matrix - full.matrix) < 1e-15);
}

TEST_CASE("no-jump flow preserves purity and trace") {
  const ChainSpec spec = ChainSpec::uniform(2, 1.0);
  const auto h = build_effective_hamiltonian(spec);
  CovarianceState c = apply_jump(CovarianceState::vacuum(2), JumpKind::LeftIn);
  for (int i = 0; i < 1000; ++i) c = no_jump_step(c, h, 1.0, 0.0, 0.005);
  CHECK(c.purity_error() < 1e-8);
  CHECK(c.matrix.trace().real() == doctest::Approx(1.0).epsilon(1e-8));
  CHECK_NOTHROW(c.check());
}

TEST_CASE("no-jump flow matches the orbital evolution") {
  RngStream rng(11);
  const ChainSpec spec = ChainSpec::uniform(5, 0.8).with_occupations(0.7, 0.2);
  const auto h = build_effective_hamiltonian(spec);
  const Matrix phi = random_orbitals(5, 2, rng);
  CovarianceState c = from_orbitals(phi);
  const double dt = 0.002, t = 0.5;
  for (int i = 0; i < 250; ++i) c = no_jump_step(c, h, 0.7, 0.2, dt);
  Matrix a = cplx(0.0, -1.0) * h.hermitian_part().cast<cplx>();
  a(0, 0) -= 0.5 * (1.0 - 2.0 * 0.7);
  a(4, 4) -= 0.5 * (1.0 - 2.0 * 0.2);
  const Matrix at = a * t;
  const Matrix p = at.exp() * phi;
  Eigen::HouseholderQR<Matrix> qr(p);
  const Matrix q = Matrix(qr.householderQ()).leftCols(2);
  CHECK(max_abs(c.matrix - (q * q.adjoint()).conjugate()) < 1e-10);
}

TEST_CASE("jump rates") {
  const auto vac = CovarianceState::vacuum(3);
  const auto r = jump_rates(vac, 1.0, 0.0, 1.0);
  CHECK(r[0] == 1.0);
  CHECK(r[1] == 0.0);
  CHECK(r[2] == 0.0);
  CHECK(r[3] == 0.0);
  const auto one = apply_jump(vac, JumpKind::LeftIn);
  const auto r2 = jump_rates(one, 0.8, 0.1, 2.0, 0.5);
  CHECK(r2[0] == 0.0);
  CHECK(r2[1] == doctest::Approx(2.0 * 0.2));
  CHECK(r2[2] == doctest::Approx(0.5 * 0.1));
  CHECK(r2[3] == 0.0);
  CovarianceState bad{Matrix::Zero(3, 3), 0};
  bad.matrix(0, 0) = 1.5;
  CHECK_THROWS_AS(jump_rates(bad, 1.0, 0.0, 1.0), InvariantViolation);
}

TEST_CASE("jumps on the vacuum and impossible jumps") {
  const auto vac = CovarianceState::vacuum(3);
  const auto c = apply_jump(vac, JumpKind::LeftIn);
  Matrix pi1 = Matrix::Zero(3, 3);
  pi1(0, 0) = 1.0;
  CHECK(max_abs(c.matrix - pi1) == 0.0);
  CHECK(c.n_excitations == 1);
  CHECK_THROWS_AS(apply_jump(c, JumpKind::LeftIn), ImpossibleJump);
  CHECK_THROWS_AS(apply_jump(vac, JumpKind::RightOut), ImpossibleJump);
  CHECK_THROWS_AS(apply_jump(vac, JumpKind::LeftOut), ImpossibleJump);
  const auto back = apply_jump(c, JumpKind::LeftOut);
  CHECK(max_abs(back.matrix) < 1e-15);
  CHECK(back.n_excitations == 0);
}

TEST_CASE("jump updates agree with adding and removing orbitals") {
  RngStream rng(5);
  const int n = 5, m = 2;
  const Matrix phi = random_orbitals(n, m, rng);
  const CovarianceState c = from_orbitals(phi);
  for (int site : {0, n - 1}) {
    // Creation: append the component of e_site orthogonal to the occupied space.
    Vector v = -phi * phi.row(site).adjoint();
    v[site] += 1.0;
    Matrix added(n, m + 1);
    added << phi, v / v.norm();
    const auto kind_in = site == 0 ? JumpKind::LeftIn : JumpKind::RightIn;
    const auto c_in = apply_jump(c, kind_in);
    CHECK(max_abs(c_in.matrix - from_orbitals(added).matrix) < 1e-12);
    CHECK(c_in.n_excitations == m + 1);
    CHECK(c_in.purity_error() < 1e-12);

    // Annihilation: keep the orbitals with no amplitude on the site.
    const Matrix proj = Matrix::Identity(m, m) - phi.row(site).adjoint() * phi.row(site) / phi.row(site).squaredNorm();
    Eigen::SelfAdjointEigenSolver<Matrix> es(proj);
    const Matrix removed = phi * es.eigenvectors().rightCols(m - 1);
    const auto kind_out = site == 0 ? JumpKind::LeftOut : JumpKind::RightOut;
    const auto c_out = apply_jump(c, kind_out);
    CHECK(max_abs(c_out.matrix - from_orbitals(removed).matrix) < 1e-12);
    CHECK(c_out.n_excitations == m - 1);
    CHECK(std::abs(c_out.matrix(site, site)) < 1e-12);
  }
}

TEST_CASE("reprojection") {
  RngStream rng(3);
  const auto c = from_orbitals(random_orbitals(4, 2, rng));
  CovarianceState noisy = c;
  Matrix e = Matrix::Zero(4, 4);
  e(0, 1) = cplx(1e-6, 2e-6);
  e(1, 0) = std::conj(e(0, 1));
  e(2, 2) = 3e-6;
  noisy.matrix += e;
  ReprojectInfo info;
  const auto p = reproject(noisy, &info);
  CHECK(p.purity_error() < 1e-13);
  CHECK(max_abs(p.matrix - c.matrix) < 1e-5);
  CHECK(info.gap > 0.49);
  CHECK_FALSE(info.warned);

  CovarianceState half{0.5 * Matrix::Identity(2, 2), 1};
  half.matrix(0, 0) = 0.5005;
  reproject(half, &info);
  CHECK(info.warned);
  CovarianceState wrong{Matrix::Zero(2, 2), 3};
  CHECK_THROWS_AS(reproject(wrong), InvariantViolation);
}

TEST_CASE("options validation") {
  const ChainSpec spec = ChainSpec::uniform(3, 1.0);
  TrajectoryOptions opt;
  CHECK_THROWS_AS(simulate_trajectory(spec, opt), ConfigError);
  opt.t_max = 10.0;
  opt.dt = 0.2;
  CHECK_THROWS_AS(simulate_trajectory(spec, opt), ConfigError);
  CHECK(default_time_step(spec) == doctest::Approx(0.005));
}

TEST_CASE("single site ticks at rate one half") {
  const ChainSpec spec = ChainSpec::uniform(1, 0.0);
  for (auto method : {TrajectoryMethod::Rk4, TrajectoryMethod::Exact}) {
    TrajectoryOptions opt;
    opt.t_max = 4000.0;
    opt.seed = 17;
    opt.method = method;
    const auto rec = simulate_trajectory(spec, opt);
    const double rate = static_cast<double>(rec.tick_times.size()) / rec.t_end;
    // The count is sub-Poissonian, so the Poisson error bounds the spread.
    CHECK(std::abs(rate - 0.5) < 5.0 * std::sqrt(0.5 / 4000.0));
    CHECK(rec.jumps[0] == doctest::Approx(rec.jumps[3]).epsilon(0.01));
  }
}

TEST_CASE("a disconnected right end never ticks") {
  ChainSpec spec = ChainSpec::from_couplings({1.0, 0.0});
  for (auto method : {TrajectoryMethod::Rk4, TrajectoryMethod::Exact}) {
    TrajectoryOptions opt;
    opt.t_max = 50.0;
    opt.method = method;
    opt.seed = 2;
    const auto rec = simulate_trajectory(spec, opt);
    CHECK(rec.tick_times.empty());
    CHECK(rec.jumps[3] == 0);
    CHECK(rec.t_end == doctest::Approx(50.0));
  }
}

TEST_CASE("trajectories are reproducible from the seed") {
  const ChainSpec spec = ChainSpec::uniform(4, 0.6);
  for (auto method : {TrajectoryMethod::Rk4, TrajectoryMethod::Exact}) {
    TrajectoryOptions opt;
    opt.n_ticks = 50;
    opt.seed = 99;
    opt.method = method;
    const auto a = simulate_trajectory(spec, opt);
    const auto b = simulate_trajectory(spec, opt);
    CHECK(a.tick_times == b.tick_times);
    CHECK(a.tick_times.size() == 50);
    opt.seed = 100;
    CHECK(simulate_trajectory(spec, opt).tick_times != a.tick_times);
  }
  const auto e1 = simulate_ensemble(spec, 4, 7, {.t_max = 20.0, .method = TrajectoryMethod::Exact});
  const auto e2 = simulate_ensemble(spec, 4, 7, {.t_max = 20.0, .method = TrajectoryMethod::Exact});
  for (int i = 0; i < 4; ++i) {
    CHECK(e1[i].seed == stream_seed(7, i));
    CHECK(e1[i].tick_times == e2[i].tick_times);
  }
}

TEST_CASE("ensemble average of the conditional covariance follows the master equation") {
  const ChainSpec spec = ChainSpec::uniform(3, 0.9).with_occupations(0.9, 0.2);
  const MomentEngine me(spec);
  const std::vector<double> times{0.5, 1.5, 3.0};
  for (auto method : {TrajectoryMethod::Exact, TrajectoryMethod::Rk4}) {
    const int count = method == TrajectoryMethod::Exact ? 2000 : 600;
    TrajectoryOptions opt;
    opt.t_max = 3.0;
    opt.method = method;
    opt.snapshot_times = times;
    const auto ens = simulate_ensemble(spec, count, 31, opt);
    for (std::size_t k = 0; k < times.size(); ++k) {
      Matrix avg = Matrix::Zero(3, 3);
      for (const auto& r : ens) avg += r.snapshots.at(k);
      avg /= static_cast<double>(count);
      const Matrix e = me.propagator().exp(times[k]);
      const Matrix expected = me.steady_state() - e * me.steady_state() * e.adjoint();
      CHECK(max_abs(avg - expected) < 2.5 / std::sqrt(static_cast<double>(count)));
    }
  }
}

TEST_CASE("both engines reproduce the current and the diffusion coefficient") {
  const ChainSpec spec = ChainSpec::uniform(3, 1.0);
  const MomentEngine me(spec);
  const double j = me.current(), d = me.diffusion();
  const std::vector<int> n{1, 20};
  for (auto method : {TrajectoryMethod::Exact, TrajectoryMethod::Rk4}) {
    TrajectoryOptions opt;
    opt.n_ticks = 2200;
    opt.method = method;
    const auto ens = simulate_ensemble(spec, 8, 4, opt);
    const auto st = waiting_time_stats(ens, n);
    CHECK(std::abs(st[0].mean - 1.0 / j) < 4.0 * st[0].mean_err);
    // Var T_n ≈ n D / J³ for large n.
    const double target = 20.0 * d / (j * j * j);
    CHECK(std::abs(st[1].var - target) < 4.0 * st[1].var_err + 0.03 * target);
    for (const auto& r : ens) CHECK(r.reprojection_warnings == 0);
  }
}

TEST_CASE("waiting-time and counting statistics of synthetic processes") {
  std::mt19937_64 eng(1);
  std::exponential_distribution<double> expo(2.0);
  std::vector<TickRecord> poisson;
  for (int r = 0; r < 20; ++r) {
    std::vector<double> w(5000);
    for (double& x : w) x = expo(eng);
    poisson.push_back(synthetic(w));
  }
  const std::vector<int> n{1, 4};
  const auto st = waiting_time_stats(poisson, n);
  CHECK(std::abs(st[0].mean - 0.5) < 4.0 * st[0].mean_err);
  CHECK(std::abs(st[0].var - 0.25) < 4.0 * st[0].var_err);
  CHECK(std::abs(st[1].var - 1.0) < 4.0 * st[1].var_err);
  CHECK(st[0].samples == 20 * 4799);
  const std::vector<double> t{0.3, 5.0};
  const auto cs = count_stats(poisson, t);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(std::abs(cs[i].mean - 2.0 * t[i]) < 4.0 * cs[i].mean_err);
    CHECK(std::abs(cs[i].var - 2.0 * t[i]) < 4.0 * cs[i].var_err);
  }

  const TickRecord clock = synthetic(std::vector<double>(1000, 0.25));
  const auto cst = waiting_time_stats(std::span(&clock, 1), n);
  CHECK(cst[0].mean == doctest::Approx(0.25));
  CHECK(cst[0].var < 1e-20);
  CHECK_THROWS_AS(waiting_time_stats(std::span(&clock, 1), std::vector<int>{900}), DomainError);
}

TEST_CASE("histogram fits distinguish level repulsion from Poisson waits") {
  std::mt19937_64 eng(8);
  std::normal_distribution<double> gauss(0.0, std::sqrt(kPi / 8.0));
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> wd(200000), ex(200000);
  for (double& s : wd) {
    const double a = gauss(eng), b = gauss(eng), c = gauss(eng);
    s = std::sqrt(a * a + b * b + c * c);  // Maxwell with unit mean is the β = 2 surmise
  }
  for (double& s : ex) s = expo(eng);
  const auto hw = make_histogram(wd, 0.0, 5.0, 60);
  const auto he = make_histogram(ex, 0.0, 5.0, 60);
  CHECK(hw.mean == doctest::Approx(1.0).epsilon(0.01));
  const auto fw = wigner_dyson_fit(hw), fe = exponential_fit(he);
  CHECK(fw.scale == doctest::Approx(1.0).epsilon(0.01));
  CHECK(fe.scale == doctest::Approx(1.0).epsilon(0.01));
  CHECK(fw.goodness < 0.1 * exponential_fit(hw).goodness);
  CHECK(fe.goodness < 0.1 * wigner_dyson_fit(he).goodness);

  CHECK_THROWS_AS(make_histogram(std::vector<double>{}, 0.0, 1.0, 10), DomainError);
}

TEST_CASE("conditional waiting times of a renewal process do not depend on the previous wait") {
  std::mt19937_64 eng(4);
  std::exponential_distribution<double> expo(1.0);
  std::vector<TickRecord> recs;
  for (int r = 0; r < 10; ++r) {
    std::vector<double> w(4000);
    for (double& x : w) x = expo(eng);
    recs.push_back(synthetic(w));
  }
  const auto cw = conditional_waiting_histogram(recs);
  const double err = std::hypot(cw.mean_fast_err, cw.mean_slow_err);
  CHECK(std::abs(cw.mean_fast - cw.mean_slow) < 4.0 * err);
  CHECK(cw.current == doctest::Approx(1.0).epsilon(0.03));
  CHECK(cw.all.prob.size() == 60);
}

TEST_CASE("net tick times skip levels lost to backflow") {
  TickRecord r;
  r.tick_times = {1.0, 2.0, 4.0, 5.0, 6.0};
  r.right_in_times = {3.0};
  // Net count: 1, 2, 1 (t=3), 2 (t=4, not new), 3 (t=5), 4 (t=6).
  CHECK(net_tick_times(r) == std::vector<double>{1.0, 2.0, 5.0, 6.0});
  r.right_in_times.clear();
  CHECK(net_tick_times(r) == r.tick_times);
}
