#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qclock {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kEulerGamma = 0.5772156649015328606;

// Invalid input or a result outside the model's domain. Maps to exit code 1.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Eigenvalues of h_eff closer than the residue formulas tolerate.
class DegenerateSpectrum : public DomainError {
 public:
  using DomainError::DomainError;
};

class QuadratureError : public DomainError {
 public:
  QuadratureError(const std::string& what, double achieved)
      : DomainError(what), achieved_tolerance(achieved) {}
  double achieved_tolerance;
};

// A jump whose conditional probability vanishes (e.g. Pauli blocking).
class ImpossibleJump : public DomainError {
 public:
  using DomainError::DomainError;
};

// Conditional covariance drifted out of the physical set.
class InvariantViolation : public DomainError {
 public:
  using DomainError::DomainError;
};

// Malformed configuration document or flag combination. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qclock
