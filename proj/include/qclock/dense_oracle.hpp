#pragma once

#include <span>
#include <string>
#include <vector>

#include "qclock/chain.hpp"
#include "qclock/types.hpp"

namespace qclock {

// Brute-force many-body reference: the spin chain Lindbladian on the full 4^N
// Liouville space. Exponential cost, so N is capped at 5. Used only to check
// the covariance-matrix machinery.
class DenseOracle {
 public:
  explicit DenseOracle(const ChainSpec& spec, std::span<const double> shifts = {});

  int n_sites() const noexcept { return n_; }
  const Matrix& liouvillian() const noexcept { return L_; }
  const Matrix& steady_state() const noexcept { return rho_; }
  // Jordan–Wigner annihilator c_i on the 2^N-dimensional Fock space.
  const Matrix& annihilator(int i) const { return c_.at(static_cast<std::size_t>(i)); }

  // C_ij = tr[ρ c_i† c_j] with Jordan–Wigner fermions.
  Matrix one_body(const Matrix& rho) const;
  Matrix one_body_steady() const { return one_body(rho_); }

  double current() const noexcept { return current_; }
  double activity() const noexcept { return activity_; }
  double diffusion() const;
  // One-body matrix of the net right-lead jump superoperator applied to ρ, over J.
  Matrix post_jump_one_body() const;

  // Var of the net right-lead count at the given times.
  std::vector<double> number_variance(std::span<const double> times) const;
  // Var of the time-integrated coherent current through bond k (k = 1 is the last bond).
  std::vector<double> bond_variance(int k, std::span<const double> times) const;

 private:
  Matrix superop_left(const Matrix& a) const;   // ρ -> a ρ
  Matrix superop_right(const Matrix& b) const;  // ρ -> ρ b
  Matrix sandwich(const Matrix& a) const;       // ρ -> a ρ a†
  // 2 Re ∫_0^t (t-τ) f·e^{Lτ} vec X dτ for a row functional f.
  double double_integral(const Eigen::RowVectorXcd& f, const Matrix& X, double t) const;

  int n_ = 0, dim_ = 0;
  std::vector<Matrix> c_;  // annihilators
  RealMatrix h_;
  Matrix H_, L_, Jnet_, Jsum_, rho_;
  double current_ = 0.0, activity_ = 0.0;
};

struct OracleReport {
  int n_sites = 0;
  double occ_left = 1.0, occ_right = 0.0;
  double covariance_err = 0.0;
  double current_err = 0.0;
  double activity_err = 0.0;
  double diffusion_err = 0.0;
  double jump_dressed_err = 0.0;
  double max_err() const;
};

OracleReport validate_against_dense_oracle(const ChainSpec& spec, std::span<const double> shifts = {});

}  // namespace qclock
