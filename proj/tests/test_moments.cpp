#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "fixtures.hpp"
#include "qclock/dense_oracle.hpp"
#include "qclock/landauer.hpp"
#include "qclock/moments.hpp"
#include "qclock/rng.hpp"

using namespace qclock;

namespace {

Matrix random_matrix(int n, RngStream& r) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = cplx(r.uniform(-1, 1), r.uniform(-1, 1));
  return m;
}

// Hermitian with spectrum in [0, 1].
Matrix random_covariance(int n, RngStream& r) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(n, r));
  Matrix q = qr.householderQ();
  RealVector ev(n);
  for (int i = 0; i < n; ++i) ev[i] = r.uniform();
  return q * ev.cast<cplx>().asDiagonal() * q.adjoint();
}

Matrix random_hermitian(int n, RngStream& r) {
  Matrix m = random_matrix(n, r);
  return 0.5 * (m + m.adjoint());
}

}  // namespace

TEST_CASE("lyapunov solver") {
  const Matrix I = Matrix::Identity(3, 3);
  CHECK((lyapunov_solve(-I, -2.0 * I) - I).norm() < 1e-15);
  CHECK(lyapunov_solve(-I, Matrix::Zero(3, 3)).norm() == 0.0);

  RngStream r(4);
  for (int n : {1, 2, 8, 13}) {
    Matrix K = random_matrix(n, r);
    Eigen::ComplexEigenSolver<Matrix> es(K);
    const double shift = es.eigenvalues().real().maxCoeff() + 0.3;
    K -= shift * Matrix::Identity(n, n);
    const Matrix Y = random_matrix(n, r);
    const Matrix X = lyapunov_solve(K, Y);
    const Matrix Xk = lyapunov_solve_kron(K, Y);
    CHECK(lyapunov_residual(K, X, Y) < 1e-10 * Y.cwiseAbs().maxCoeff());
    CHECK((X - Xk).cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK_THROWS_AS(LyapunovSolver(Matrix::Identity(2, 2)), DomainError);
  // A site decoupled from both leads never relaxes.
  CHECK_THROWS_AS(drift_matrix(ChainSpec::uniform(3, 0.0)), DomainError);
}

TEST_CASE("propagator paths agree") {
  MomentEngine e(fixtures::optimized20());
  const Propagator& p = e.propagator();
  CHECK(p.uses_eigenbasis());
  const Matrix K = e.drift().K;
  for (double t : {0.5, 7.0, 60.0}) {
    const Matrix ref = (K * t).exp();
    CHECK((p.exp(t) - ref).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((p.exp_row(t, 19) - ref.row(19)).cwiseAbs().maxCoeff() < 1e-10);
  }
  Propagator forced(K, 0.0);  // threshold 0 forces scaling and squaring
  CHECK_FALSE(forced.uses_eigenbasis());
  CHECK((forced.exp(3.0) - p.exp(3.0)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("steady state") {
  CHECK(std::abs(steady_state_covariance(ChainSpec::uniform(1, 0.0))(0, 0) - 0.5) < 1e-15);
  ChainSpec eq = fixtures::optimized20().with_occupations(0.3, 0.3);
  const Matrix C = steady_state_covariance(eq);
  CHECK((C - 0.3 * Matrix::Identity(20, 20)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(me_current(eq)) < 1e-12);

  for (const ChainSpec& s : {fixtures::optimized40(), fixtures::optimized20().with_entropy(2.0)}) {
    const Matrix c = steady_state_covariance(s);
    CHECK((c - c.adjoint()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(c);
    CHECK(es.eigenvalues().minCoeff() > -1e-10);
    CHECK(es.eigenvalues().maxCoeff() < 1.0 + 1e-10);
  }
}

TEST_CASE("current and activity") {
  CHECK(me_current(ChainSpec::uniform(1, 0.0)) == doctest::Approx(0.5).epsilon(1e-14));
  const ChainSpec s = fixtures::optimized20();
  MomentEngine e(s);
  const TransportSummary r = zero_t_transport(s).summary;
  CHECK(std::abs(e.current() - r.current) < 1e-8 * r.current);
  CHECK(e.activity() == doctest::Approx(e.current()).epsilon(1e-14));
  CHECK(dynamical_activity(s.with_occupations(0.8, 0.5)) == doctest::Approx(0.5).epsilon(1e-14));
  MomentEngine warm(s.with_entropy(5.5));
  CHECK(warm.activity() > warm.current());
  // Current conservation through every bond.
  for (int k = 1; k < 20; ++k)
    CHECK((e.bond_current_matrix(k) * e.steady_state()).trace().real() ==
          doctest::Approx(e.current()).epsilon(1e-10));
  CHECK_THROWS_AS(e.bond_current_matrix(0), DomainError);
  CHECK_THROWS_AS(e.bond_current_matrix(20), DomainError);
}

TEST_CASE("jump-dressed covariance") {
  MomentEngine e(fixtures::optimized20());
  const Matrix& C = e.steady_state();
  const Matrix expect = C - C.col(19) * C.row(19) / e.current();
  CHECK((e.jump_dressed() - expect).cwiseAbs().maxCoeff() < 1e-12);
  // One excitation leaves, but the remaining number is conditioned on site N
  // having been occupied: tr C^σ = ⟨N n_N⟩/⟨n_N⟩ - 1 = tr C - (C²)_NN / C_NN.
  const double cnn = C(19, 19).real();
  CHECK(e.jump_dressed().trace().real() ==
        doctest::Approx(C.trace().real() - (C * C)(19, 19).real() / cnn).epsilon(1e-12));
  MomentEngine eq(fixtures::optimized20().with_occupations(0.4, 0.4));
  CHECK_THROWS_AS(eq.jump_dressed(), DomainError);
}

TEST_CASE("diffusion constant") {
  CHECK(diffusion_constant(ChainSpec::uniform(1, 0.0)) == doctest::Approx(0.25).epsilon(1e-13));
  const ChainSpec s = fixtures::optimized20();
  const TransportSummary r = zero_t_transport(s).summary;
  CHECK(std::abs(diffusion_constant(s) - r.diffusion) < 1e-6 * r.diffusion);

  const ChainSpec s40 = fixtures::optimized40();
  const TransportSummary r40 = zero_t_transport(s40).summary;
  const TransportSummary w = wbl_finite_bias(r40.current, r40.diffusion, 5.5);
  MomentEngine e(s40.with_entropy(5.5));
  CHECK(std::abs(e.current() - w.current) < 1e-8 * w.current);
  CHECK(std::abs(e.diffusion() - w.diffusion) < 1e-6 * w.diffusion);
}

TEST_CASE("boundary number variance") {
  MomentEngine e(fixtures::optimized20());
  const double J = e.current();
  std::vector<double> t{0.0};
  for (double v : log_spaced(0.01, 5000.0 / J, 60)) t.push_back(v);
  VarianceCurve c = e.number_variance(t);
  CHECK(c.variance[0] == 0.0);
  for (std::size_t i = 1; i < t.size(); ++i) CHECK(c.variance[i] >= c.variance[i - 1]);
  CHECK(c.slope.back() == doctest::Approx(c.diffusion).epsilon(1e-6));
  CHECK(c.imag_ratio < 1e-8);
  // Shot-noise regime below the relaxation time 1/Γ.
  for (std::size_t i = 1; i < t.size() && t[i] < 1.0; ++i) CHECK(c.variance[i] == doctest::Approx(c.activity * t[i]).epsilon(0.05));
  // Slope is the derivative of the variance.
  for (std::size_t i = 5; i + 1 < t.size(); i += 9) {
    const double h = 1e-4 * t[i];
    const VarianceCurve d = e.number_variance(std::vector<double>{t[i] - h, t[i] + h});
    CHECK((d.variance[1] - d.variance[0]) / (2 * h) == doctest::Approx(c.slope[i]).epsilon(1e-5));
  }
  CHECK_THROWS_AS(e.number_variance(std::vector<double>{-1.0}), DomainError);
}

TEST_CASE("bulk number variance") {
  MomentEngine e(fixtures::optimized40());
  const double J = e.current();
  const std::vector<double> t = log_spaced(1.5 / J, 1000.0 / J, 30);
  const VarianceCurve b = e.number_variance(t);
  const VarianceCurve k1 = e.bulk_number_variance(1, t);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(k1.variance[i] == doctest::Approx(b.variance[i]).epsilon(0.05));
  const std::vector<double> ts = log_spaced(0.6 / J, 10.0 / J, 12);
  const VarianceCurve bs = e.number_variance(ts);
  const VarianceCurve mid = e.bulk_number_variance(20, ts);
  for (std::size_t i = 0; i < ts.size(); ++i) CHECK(mid.variance[i] / bs.variance[i] == doctest::Approx(0.5).epsilon(0.1));
  // Long-time slope: every bond carries the same diffusion constant.
  CHECK(mid.diffusion == doctest::Approx(b.diffusion).epsilon(1e-6));
  CHECK(k1.diffusion == doctest::Approx(b.diffusion).epsilon(1e-6));
}

TEST_CASE("levitov-lesovik determinant") {
  RngStream r(12);
  for (int n = 1; n <= 6; ++n)
    for (int rep = 0; rep < 3; ++rep) {
      const Matrix C = random_covariance(n, r), A = random_hermitian(n, r);
      CHECK(levitov_lesovik_log_mgf(C, A, 0.0) == 0.0);
      const double mean = (C * A).trace().real();
      const double var = (C * A * A).trace().real() - (C * A * C * A).trace().real();
      CHECK(std::abs(levitov_lesovik_mean(C, A) - mean) < 1e-8);
      CHECK(std::abs(levitov_lesovik_variance(C, A) - var) < 1e-8);
    }
}

TEST_CASE("levitov-lesovik against many-body counting") {
  // Gaussian steady state of a driven chain; count N = Σ A_ji c_i† c_j in Fock space.
  ChainSpec s = ChainSpec::from_couplings({0.6, 0.9, 0.4}).with_entropy(1.2);
  DenseOracle d(s);
  RngStream r(2);
  const Matrix A = random_hermitian(4, r);
  Matrix Nop = Matrix::Zero(16, 16);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) Nop += A(j, i) * d.annihilator(i).adjoint() * d.annihilator(j);
  const Matrix& rho = d.steady_state();
  const double m1 = (rho * Nop).trace().real();
  const double m2 = (rho * Nop * Nop).trace().real();
  const Matrix C = d.one_body_steady();
  CHECK(levitov_lesovik_mean(C, A) == doctest::Approx(m1).epsilon(1e-8));
  CHECK(levitov_lesovik_variance(C, A) == doctest::Approx(m2 - m1 * m1).epsilon(1e-8));
  // Full generating function at finite λ.
  for (double lam : {-0.7, 0.4, 1.3}) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(Nop);
    const Matrix e = es.eigenvectors() * (lam * es.eigenvalues()).array().exp().matrix().asDiagonal() *
                     es.eigenvectors().adjoint();
    CHECK(levitov_lesovik_log_mgf(C, A, lam) == doctest::Approx(std::log((rho * e).trace().real())).epsilon(1e-10));
  }
}

TEST_CASE("sine-kernel window variance") {
  const double x = 10.0;
  const double asym = (std::log(2.0 * kPi * x) + kEulerGamma + 1.0) / (kPi * kPi);
  double prev_err = 1.0;
  for (double nu : {0.5, 0.25, 0.125}) {
    const int L = static_cast<int>(std::lround(x / nu));
    const Matrix C = fermi_sea_window(L, nu);
    const Matrix I = Matrix::Identity(L, L);
    const double v = levitov_lesovik_variance(C, I);
    CHECK(v == doctest::Approx((C - C * C).trace().real()).epsilon(1e-8));
    const double err = std::abs(v - asym) / asym;
    CHECK(err <= prev_err + 1e-3);
    prev_err = err;
  }
  CHECK(prev_err < 0.02);
}

TEST_CASE("log grid") {
  auto t = log_spaced(0.1, 1000.0, 5);
  CHECK(t.front() == 0.1);
  CHECK(t.back() == doctest::Approx(1000.0));
  CHECK(t[2] == doctest::Approx(10.0));
  CHECK_THROWS_AS(log_spaced(0.0, 1.0, 3), DomainError);
}
