// Common scalar/matrix aliases, error types and matrix predicates.
#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qlfiber {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kI{0.0, 1.0};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input, malformed files, violated preconditions on structure.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class CutoffExceededError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Numerically unusable request: step-size violations, unphysical index.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class StepSizeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class RealizabilityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

template <typename A, typename B>
typename A::PlainObject commutator(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b)
{
  return a * b - b * a;
}

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& m, double tol)
{
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

template <typename Derived>
double unitarity_defect(const Eigen::MatrixBase<Derived>& m)
{
  using Plain = typename Derived::PlainObject;
  return (m.adjoint() * m - Plain::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff();
}

template <typename Derived>
bool is_unitary(const Eigen::MatrixBase<Derived>& m, double tol)
{
  return m.rows() == m.cols() && unitarity_defect(m) <= tol;
}

// Kronecker product of two dense matrices.
template <typename A, typename B>
Eigen::Matrix<typename A::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron(const Eigen::MatrixBase<A>& a,
                                                                       const Eigen::MatrixBase<B>& b)
{
  Eigen::Matrix<typename A::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace qlfiber
