#include "qclock/dense_oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "qclock/moments.hpp"

namespace qclock {

namespace {

// Vectorized trace functional: tr X = <ones_diag, vec X>.
Eigen::RowVectorXcd trace_row(int dim) {
  Eigen::RowVectorXcd r = Eigen::RowVectorXcd::Zero(dim * dim);
  for (int i = 0; i < dim; ++i) r[i * dim + i] = 1.0;
  return r;
}

Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Matrix unvec(const Vector& v, int dim) { return Eigen::Map<const Matrix>(v.data(), dim, dim); }

}  // namespace

Matrix DenseOracle::superop_left(const Matrix& a) const {
  return Eigen::kroneckerProduct(Matrix::Identity(dim_, dim_), a).eval();
}

Matrix DenseOracle::superop_right(const Matrix& b) const {
  return Eigen::kroneckerProduct(b.transpose(), Matrix::Identity(dim_, dim_)).eval();
}

Matrix DenseOracle::sandwich(const Matrix& a) const {
  return Eigen::kroneckerProduct(a.conjugate(), a).eval();
}

DenseOracle::DenseOracle(const ChainSpec& spec, std::span<const double> shifts) {
  spec.validate();
  n_ = spec.n_sites;
  if (n_ > 5) throw DomainError("dense oracle limited to N <= 5");
  dim_ = 1 << n_;
  const EffectiveHamiltonian heff = build_effective_hamiltonian(spec, shifts);
  h_ = heff.hermitian_part();
  const RealMatrix& h = h_;

  // Bit j of a basis index is the occupation of site j.
  auto sigma_minus = [&](int j) {
    Matrix m = Matrix::Zero(dim_, dim_);
    for (int s = 0; s < dim_; ++s)
      if (s >> j & 1) m(s & ~(1 << j), s) = 1.0;
    return m;
  };
  auto parity_below = [&](int j) {
    Matrix m = Matrix::Zero(dim_, dim_);
    for (int s = 0; s < dim_; ++s) {
      int ones = std::popcount(static_cast<unsigned>(s & ((1 << j) - 1)));
      m(s, s) = ones % 2 ? -1.0 : 1.0;
    }
    return m;
  };
  for (int j = 0; j < n_; ++j) c_.push_back(parity_below(j) * sigma_minus(j));

  H_ = Matrix::Zero(dim_, dim_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      if (h(i, j) != 0.0) H_ += h(i, j) * c_[i].adjoint() * c_[j];

  const double gl = spec.gamma_left(), gr = spec.gamma_right();
  const double fl = spec.occ_left, fr = spec.occ_right;
  // Leads couple through local spin operators.
  const Matrix s1 = sigma_minus(0), sN = sigma_minus(n_ - 1);
  const Matrix jumps[4] = {std::sqrt(gl * fl) * s1.adjoint(), std::sqrt(gl * (1.0 - fl)) * s1,
                           std::sqrt(gr * (1.0 - fr)) * sN, std::sqrt(gr * fr) * sN.adjoint()};
  const cplx I(0.0, 1.0);
  L_ = -I * (superop_left(H_) - superop_right(H_));
  for (const Matrix& l : jumps) {
    const Matrix ll = l.adjoint() * l;
    L_ += sandwich(l) - 0.5 * (superop_left(ll) + superop_right(ll));
  }
  const Matrix out = sandwich(jumps[2]), in = sandwich(jumps[3]);
  Jnet_ = out - in;
  Jsum_ = out + in;

  Matrix M = L_;
  const Eigen::RowVectorXcd tr = trace_row(dim_);
  M.row(0) = tr;
  Vector rhs = Vector::Zero(dim_ * dim_);
  rhs[0] = 1.0;
  rho_ = unvec(M.fullPivLu().solve(rhs), dim_);
  rho_ = 0.5 * (rho_ + rho_.adjoint()).eval();
  current_ = (tr * (Jnet_ * vec(rho_)))(0).real();
  activity_ = (tr * (Jsum_ * vec(rho_)))(0).real();
}

Matrix DenseOracle::one_body(const Matrix& rho) const {
  Matrix C(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) C(i, j) = (rho * c_[i].adjoint() * c_[j]).trace();
  return C;
}

double DenseOracle::diffusion() const {
  const Eigen::RowVectorXcd tr = trace_row(dim_);
  const Vector r = vec(rho_);
  const Vector x = Jnet_ * r - current_ * r;
  // (L + |ρ><1|) y = -x has the traceless solution of L y = -x.
  const Matrix M = L_ + r * tr;
  const Vector y = M.fullPivLu().solve(-x);
  return activity_ + 2.0 * (tr * (Jnet_ * y))(0).real();
}

Matrix DenseOracle::post_jump_one_body() const {
  if (current_ == 0.0) throw DomainError("post-jump state undefined at zero current");
  return one_body(unvec(Jnet_ * vec(rho_), dim_)) / current_;
}

double DenseOracle::double_integral(const Eigen::RowVectorXcd& f, const Matrix& X, double t) const {
  const int d2 = dim_ * dim_;
  // Top-right block of exp([[L, I, 0], [0, 0, I], [0, 0, 0]] t) is ∫_0^t (t-τ) e^{Lτ} dτ.
  Matrix big = Matrix::Zero(3 * d2, 3 * d2);
  big.block(0, 0, d2, d2) = L_ * t;
  big.block(0, d2, d2, d2) = Matrix::Identity(d2, d2) * t;
  big.block(d2, 2 * d2, d2, d2) = Matrix::Identity(d2, d2) * t;
  const Matrix e = big.exp();
  const cplx v = (f * (e.block(0, 2 * d2, d2, d2) * vec(X)))(0);
  return 2.0 * v.real();
}

std::vector<double> DenseOracle::number_variance(std::span<const double> times) const {
  const Vector r = vec(rho_);
  const Matrix X = unvec(Jnet_ * r - current_ * r, dim_);
  const Eigen::RowVectorXcd f = trace_row(dim_) * Jnet_;
  std::vector<double> out;
  for (double t : times) out.push_back(t == 0.0 ? 0.0 : activity_ * t + double_integral(f, X, t));
  return out;
}

std::vector<double> DenseOracle::bond_variance(int k, std::span<const double> times) const {
  if (k < 1 || k > n_ - 1) throw DomainError("bond index must lie in [1, N-1]");
  const int a = n_ - 1 - k;
  // Particle current from site a to a+1 for H containing g (c_a† c_{a+1} + h.c.).
  const Matrix hop = c_[a].adjoint() * c_[a + 1];
  const Matrix j = cplx(0.0, -h_(a, a + 1)) * (hop - hop.adjoint());
  const double jmean = (rho_ * j).trace().real();
  const Matrix X = j * rho_ - jmean * rho_;
  // tr[j Y] = <vec(jᵀ), vec Y>
  const Matrix jt = j.transpose();
  const Eigen::RowVectorXcd f = vec(jt).transpose();
  std::vector<double> out;
  for (double t : times) out.push_back(t == 0.0 ? 0.0 : double_integral(f, X, t));
  return out;
}

double OracleReport::max_err() const {
  return std::max({covariance_err, current_err, activity_err, diffusion_err, jump_dressed_err});
}

OracleReport validate_against_dense_oracle(const ChainSpec& spec, std::span<const double> shifts) {
  DenseOracle dense(spec, shifts);
  MomentEngine eng(spec, shifts);
  OracleReport r;
  r.n_sites = spec.n_sites;
  r.occ_left = spec.occ_left;
  r.occ_right = spec.occ_right;
  r.covariance_err = (dense.one_body_steady() - eng.steady_state()).cwiseAbs().maxCoeff();
  r.current_err = std::abs(dense.current() - eng.current());
  r.activity_err = std::abs(dense.activity() - eng.activity());
  if (std::abs(eng.current()) > 1e-12) {
    r.diffusion_err = std::abs(dense.diffusion() - eng.diffusion());
    r.jump_dressed_err = (dense.post_jump_one_body() - eng.jump_dressed()).cwiseAbs().maxCoeff();
  }
  return r;
}

}  // namespace qclock
