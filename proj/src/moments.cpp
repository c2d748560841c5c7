#include "qclock/moments.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

namespace qclock {

DriftMatrix drift_matrix(const ChainSpec& spec, std::span<const double> shifts) {
  const EffectiveHamiltonian h = build_effective_hamiltonian(spec, shifts);
  const int n = h.size();
  DriftMatrix d;
  d.gamma_left = spec.gamma_left();
  d.gamma_right = spec.gamma_right();
  d.f_left = spec.occ_left;
  d.f_right = spec.occ_right;
  d.K = cplx(0.0, 1.0) * h.hermitian_part().cast<cplx>();
  d.K(0, 0) -= 0.5 * d.gamma_left;
  d.K(n - 1, n - 1) -= 0.5 * d.gamma_right;
  d.P = Matrix::Zero(n, n);
  d.P(0, 0) += d.gamma_left * d.f_left;
  d.P(n - 1, n - 1) += d.gamma_right * d.f_right;
  const double scale = 1.0 + d.K.cwiseAbs().maxCoeff();
  const Vector ev = Eigen::ComplexEigenSolver<Matrix>(d.K, false).eigenvalues();
  if (!(ev.real().maxCoeff() < -1e-12 * scale))
    throw DomainError("drift matrix is not Hurwitz (a mode never relaxes)");
  return d;
}

LyapunovSolver::LyapunovSolver(const Matrix& K) : K_(K) {
  Eigen::ComplexSchur<Matrix> schur(K, true);
  if (schur.info() != Eigen::Success) throw DomainError("Schur decomposition failed");
  U_ = schur.matrixU();
  T_ = schur.matrixT();
  const double scale = 1.0 + K.cwiseAbs().maxCoeff();
  for (int i = 0; i < T_.rows(); ++i)
    if (!(T_(i, i).real() < -1e-12 * scale))
      throw DomainError("drift matrix is not Hurwitz (a mode never relaxes)");
}

Matrix LyapunovSolver::solve(const Matrix& Y) const {
  const int n = static_cast<int>(T_.rows());
  if (Y.rows() != n || Y.cols() != n) throw DomainError("lyapunov: size mismatch");
  const Matrix Yt = U_.adjoint() * Y * U_;
  Matrix X = Matrix::Zero(n, n);
  Vector rhs(n);
  // Column j couples only to columns k > j through conj(T_jk).
  for (int j = n - 1; j >= 0; --j) {
    rhs = Yt.col(j);
    for (int k = j + 1; k < n; ++k) rhs -= X.col(k) * std::conj(T_(j, k));
    const cplx shift = std::conj(T_(j, j));
    for (int i = n - 1; i >= 0; --i) {
      cplx s = rhs[i];
      for (int l = i + 1; l < n; ++l) s -= T_(i, l) * X(l, j);
      X(i, j) = s / (T_(i, i) + shift);
    }
  }
  return U_ * X * U_.adjoint();
}

Matrix lyapunov_solve(const Matrix& K, const Matrix& Y) { return LyapunovSolver(K).solve(Y); }

Matrix lyapunov_solve_kron(const Matrix& K, const Matrix& Y) {
  const int n = static_cast<int>(K.rows());
  if (n > 64) throw DomainError("Kronecker Lyapunov solve limited to N <= 64");
  const Matrix I = Matrix::Identity(n, n);
  Matrix big(n * n, n * n);
  const Matrix Kc = K.conjugate();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) big.block(a * n, b * n, n, n) = (a == b ? K : Matrix::Zero(n, n)) + Kc(a, b) * I;
  Eigen::Map<const Vector> y(Y.data(), n * n);
  Vector x = big.fullPivLu().solve(y);
  return Eigen::Map<Matrix>(x.data(), n, n);
}

double lyapunov_residual(const Matrix& K, const Matrix& X, const Matrix& Y) {
  return (K * X + X * K.adjoint() - Y).cwiseAbs().maxCoeff();
}

Propagator::Propagator(const Matrix& K, double max_condition) : K_(K) {
  Eigen::ComplexEigenSolver<Matrix> es(K, true);
  if (es.info() == Eigen::Success) {
    V_ = es.eigenvectors();
    lambda_ = es.eigenvalues();
    Eigen::PartialPivLU<Matrix> lu(V_);
    Vinv_ = lu.inverse();
    const double nv = V_.cwiseAbs().colwise().sum().maxCoeff();
    const double ni = Vinv_.cwiseAbs().colwise().sum().maxCoeff();
    cond_ = nv * ni;
    eigen_ = std::isfinite(cond_) && cond_ < max_condition;
  }
}

Matrix Propagator::exp(double t) const {
  if (eigen_) {
    Vector e = (lambda_ * t).array().exp();
    return V_ * e.asDiagonal() * Vinv_;
  }
  Matrix kt = K_ * t;
  return kt.exp();
}

Eigen::RowVectorXcd Propagator::exp_row(double t, int r) const {
  if (eigen_) {
    Eigen::RowVectorXcd v = V_.row(r);
    for (int k = 0; k < v.size(); ++k) v[k] *= std::exp(lambda_[k] * t);
    return v * Vinv_;
  }
  return exp(t).row(r);
}

MomentEngine::MomentEngine(const ChainSpec& spec, std::span<const double> shifts)
    : spec_(spec),
      shifts_(shifts.begin(), shifts.end()),
      drift_(drift_matrix(spec, shifts)),
      lyap_(drift_.K) {
  css_ = lyap_.solve(-drift_.P);
  css_ = 0.5 * (css_ + css_.adjoint()).eval();
  const int n = spec.n_sites;
  const double cnn = css_(n - 1, n - 1).real();
  const double gr = drift_.gamma_right, fr = drift_.f_right;
  current_ = gr * (cnn - fr);
  activity_ = gr * (1.0 - 2.0 * fr) * cnn + gr * fr;
}

const Propagator& MomentEngine::propagator() const {
  if (!prop_) prop_.emplace(drift_.K);
  return *prop_;
}

const Matrix& MomentEngine::jump_dressed() const {
  if (!csigma_) {
    if (std::abs(current_) < 1e-14 * drift_.gamma_right)
      throw DomainError("jump-dressed covariance undefined at zero current");
    const int n = spec_.n_sites;
    const Matrix& C = css_;
    const double cnn = C(n - 1, n - 1).real();
    const double gr = drift_.gamma_right, fr = drift_.f_right;
    const Matrix I = Matrix::Identity(n, n);
    // Right-out (count +1) minus right-in (count -1) post-jump one-body matrices.
    const Matrix out = cnn * C - C.col(n - 1) * C.row(n - 1);
    const Matrix hole = (I - C).col(n - 1) * (I - C).row(n - 1);
    const Matrix in = (1.0 - cnn) * C + hole;
    csigma_ = (gr * (1.0 - fr) * out - gr * fr * in) / current_;
  }
  return *csigma_;
}

double MomentEngine::diffusion() const {
  if (!diffusion_) {
    const int n = spec_.n_sites;
    const Matrix y1 = lyap_.solve(jump_dressed() - css_);
    const cplx v = y1(n - 1, n - 1);
    imag_ratio_ = std::max(imag_ratio_, std::abs(v.imag()) / std::max(std::abs(v.real()), 1e-300));
    diffusion_ = activity_ - 2.0 * current_ * drift_.gamma_right * v.real();
  }
  return *diffusion_;
}

double MomentEngine::boundary_correlator(double tau) const {
  const int n = spec_.n_sites;
  const Eigen::RowVectorXcd u = propagator().exp_row(tau, n - 1);
  const Matrix x = jump_dressed() - css_;
  const cplx v = (u * x * u.adjoint())(0, 0);
  return current_ * drift_.gamma_right * v.real();
}

VarianceCurve MomentEngine::number_variance(std::span<const double> times) const {
  const int n = spec_.n_sites;
  const Matrix x = jump_dressed() - css_;
  const Matrix y1 = lyap_.solve(x);
  const Matrix z = lyap_.solve(y1);
  VarianceCurve c;
  c.current = current_;
  c.activity = activity_;
  c.diffusion = diffusion();
  const double jg = current_ * drift_.gamma_right;
  for (double t : times) {
    if (!(t >= 0.0)) throw DomainError("variance times must be non-negative");
    c.times.push_back(t);
    if (t == 0.0) {
      c.variance.push_back(0.0);
      c.slope.push_back(activity_);
      continue;
    }
    const Eigen::RowVectorXcd u = propagator().exp_row(t, n - 1);
    const cplx vz = (u * z * u.adjoint())(0, 0) - z(n - 1, n - 1);
    const cplx vy = (u * y1 * u.adjoint())(0, 0) - y1(n - 1, n - 1);
    c.variance.push_back(c.diffusion * t + 2.0 * jg * vz.real());
    c.slope.push_back(activity_ + 2.0 * jg * vy.real());
    for (const cplx& v : {vz, vy})
      if (std::abs(v.real()) > 1e-12)
        imag_ratio_ = std::max(imag_ratio_, std::abs(v.imag()) / std::abs(v.real()));
  }
  c.imag_ratio = imag_ratio_;
  return c;
}

Matrix MomentEngine::bond_current_matrix(int k) const {
  const int n = spec_.n_sites;
  if (k < 1 || k > n - 1) throw DomainError("bond index must lie in [1, N-1]");
  const int a = n - 1 - k;
  const double g = spec_.couplings[static_cast<std::size_t>(a)];
  Matrix J = Matrix::Zero(n, n);
  J(a + 1, a) = cplx(0.0, g);
  J(a, a + 1) = cplx(0.0, -g);
  return J;
}

VarianceCurve MomentEngine::bulk_number_variance(int k, std::span<const double> times) const {
  const int n = spec_.n_sites;
  const Matrix Jk = bond_current_matrix(k);
  const int a = n - 1 - k;
  const Matrix& C = css_;
  const double jcur = (Jk * C).trace().real();
  if (std::abs(jcur) < 1e-14 * drift_.gamma_right) throw DomainError("bulk variance undefined at zero current");
  // One-body matrix of j_k ρ / J minus C_ss.
  const Matrix x = (C * Jk - C * Jk * C) / jcur;
  const Matrix y1 = lyap_.solve(x);
  const Matrix z = lyap_.solve(y1);
  auto tr_jk = [&](const Eigen::RowVectorXcd& ua, const Eigen::RowVectorXcd& ub, const Matrix& m) {
    // tr[J_k E M E†] with E rows a and a+1 given.
    const cplx mab = (ua * m * ub.adjoint())(0, 0);
    const cplx mba = (ub * m * ua.adjoint())(0, 0);
    return Jk(a + 1, a) * mab + Jk(a, a + 1) * mba;
  };
  const Eigen::RowVectorXcd ea = Eigen::RowVectorXcd::Unit(n, a), eb = Eigen::RowVectorXcd::Unit(n, a + 1);
  const cplx y0 = tr_jk(ea, eb, y1), z0 = tr_jk(ea, eb, z);

  VarianceCurve c;
  c.current = jcur;
  c.activity = 0.0;
  c.diffusion = -2.0 * (jcur * y0).real();
  for (double t : times) {
    if (!(t >= 0.0)) throw DomainError("variance times must be non-negative");
    c.times.push_back(t);
    if (t == 0.0) {
      c.variance.push_back(0.0);
      c.slope.push_back(0.0);
      continue;
    }
    const Eigen::RowVectorXcd ua = propagator().exp_row(t, a), ub = propagator().exp_row(t, a + 1);
    const cplx vz = tr_jk(ua, ub, z) - z0 - t * y0;
    const cplx vy = tr_jk(ua, ub, y1) - y0;
    c.variance.push_back(2.0 * (jcur * vz).real());
    c.slope.push_back(2.0 * (jcur * vy).real());
  }
  return c;
}

Matrix steady_state_covariance(const ChainSpec& spec, std::span<const double> shifts) {
  return MomentEngine(spec, shifts).steady_state();
}

double me_current(const ChainSpec& spec, std::span<const double> shifts) {
  return MomentEngine(spec, shifts).current();
}

double dynamical_activity(const ChainSpec& spec, std::span<const double> shifts) {
  return MomentEngine(spec, shifts).activity();
}

Matrix jump_dressed_covariance(const ChainSpec& spec, std::span<const double> shifts) {
  return MomentEngine(spec, shifts).jump_dressed();
}

double diffusion_constant(const ChainSpec& spec, std::span<const double> shifts) {
  return MomentEngine(spec, shifts).diffusion();
}

VarianceCurve number_variance_exact(const ChainSpec& spec, std::span<const double> times) {
  return MomentEngine(spec).number_variance(times);
}

VarianceCurve bulk_number_variance(const ChainSpec& spec, int k, std::span<const double> times) {
  return MomentEngine(spec).bulk_number_variance(k, times);
}

double levitov_lesovik_log_mgf(const Matrix& C, const Matrix& A, double lambda) {
  const int n = static_cast<int>(C.rows());
  if (C.cols() != n || A.rows() != n || A.cols() != n) throw DomainError("levitov_lesovik: size mismatch");
  if (lambda == 0.0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(A);
  const Matrix eA = es.eigenvectors() * (es.eigenvalues() * lambda).array().exp().matrix().asDiagonal() *
                    es.eigenvectors().adjoint();
  const Matrix M = Matrix::Identity(n, n) + C * (eA - Matrix::Identity(n, n));
  Eigen::PartialPivLU<Matrix> lu(M);
  const Matrix& LU = lu.matrixLU();
  cplx logdet = 0.0;
  for (int i = 0; i < n; ++i) {
    if (std::abs(LU(i, i)) == 0.0) throw DomainError("levitov_lesovik: singular determinant");
    logdet += std::log(LU(i, i));
  }
  // det of the row permutation is ±1; the moment generating function is positive.
  return logdet.real();
}

double levitov_lesovik_mean(const Matrix& C, const Matrix& A, double h) {
  auto d1 = [&](double s) {
    return (levitov_lesovik_log_mgf(C, A, s) - levitov_lesovik_log_mgf(C, A, -s)) / (2.0 * s);
  };
  return (4.0 * d1(h) - d1(2.0 * h)) / 3.0;
}

double levitov_lesovik_variance(const Matrix& C, const Matrix& A, double h) {
  const double f0 = levitov_lesovik_log_mgf(C, A, 0.0);
  auto d2 = [&](double s) {
    return (levitov_lesovik_log_mgf(C, A, s) - 2.0 * f0 + levitov_lesovik_log_mgf(C, A, -s)) / (s * s);
  };
  return (4.0 * d2(h) - d2(2.0 * h)) / 3.0;
}

Matrix fermi_sea_window(int sites, double filling) {
  if (sites < 1 || !(filling > 0.0 && filling < 1.0)) throw DomainError("fermi_sea_window: bad arguments");
  Matrix C(sites, sites);
  for (int i = 0; i < sites; ++i)
    for (int j = 0; j < sites; ++j) {
      const int d = i - j;
      C(i, j) = d == 0 ? filling : std::sin(kPi * filling * d) / (kPi * d);
    }
  return C;
}

std::vector<double> log_spaced(double t0, double t1, int steps) {
  if (!(t0 > 0.0) || !(t1 >= t0) || steps < 1) throw DomainError("log grid needs 0 < t0 <= t1 and steps >= 1");
  std::vector<double> t(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k)
    t[k] = steps == 1 ? t0 : t0 * std::pow(t1 / t0, static_cast<double>(k) / (steps - 1));
  return t;
}

}  // namespace qclock
