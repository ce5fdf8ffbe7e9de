// Independent reference computations for the tests. Nothing here calls into
// the library's numerical kernels.
#pragma once

#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Dense>

namespace oracle {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

// exp(-i t H) for Hermitian H by eigendecomposition.
inline CMatrix hermitian_evolution(const CMatrix& h, double t)
{
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  Eigen::VectorXcd phases(h.rows());
  for (Eigen::Index k = 0; k < h.rows(); ++k) phases(k) = std::polar(1.0, -t * es.eigenvalues()(k));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// exp(A) for a general matrix by a long Taylor sum after scaling by 2^s.
inline CMatrix taylor_expm(const CMatrix& a)
{
  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  const int s = norm > 0.5 ? static_cast<int>(std::ceil(std::log2(norm / 0.5))) : 0;
  const CMatrix b = a / std::ldexp(1.0, s);
  CMatrix term = CMatrix::Identity(a.rows(), a.cols());
  CMatrix sum = term;
  for (int k = 1; k < 40; ++k) {
    term = (term * b / static_cast<double>(k)).eval();
    sum += term;
  }
  for (int i = 0; i < s; ++i) sum = (sum * sum).eval();
  return sum;
}

inline CMatrix random_hermitian(int n, std::mt19937_64& rng, double scale = 1.0)
{
  std::normal_distribution<double> g;
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = Complex(g(rng), g(rng));
  return scale * 0.5 * (m + m.adjoint());
}

// Haar-ish SU(2) sample from a normalized quaternion.
inline CMatrix random_su2(std::mt19937_64& rng)
{
  std::normal_distribution<double> g;
  Eigen::Vector4d q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  CMatrix u(2, 2);
  u << Complex(q(0), q(1)), Complex(q(2), q(3)), Complex(-q(2), q(3)), Complex(q(0), -q(1));
  return u;
}

inline double factorial(int n)
{
  return std::tgamma(n + 1.0);
}

// Poisson tail beyond n_max by direct summation.
inline double poisson_tail(double mean, int n_max)
{
  double tail = 0.0;
  for (int n = n_max + 1; n < n_max + 200; ++n) tail += std::exp(-mean + n * std::log(mean) - std::lgamma(n + 1.0));
  return tail;
}

// Free Gaussian under i lambda dz psi = -lambda^2/(4 pi n0) psi'': intensity RMS
// width grows as sigma(z) = sigma0 sqrt(1 + (lambda z / (4 pi n0 sigma0^2))^2),
// with sigma0 the intensity RMS width (amplitude exp(-x^2/(4 sigma0^2))).
inline double free_rms_width(double sigma0, double z, double lambda, double n0)
{
  const double s = lambda * z / (4.0 * M_PI * n0 * sigma0 * sigma0);
  return sigma0 * std::sqrt(1.0 + s * s);
}

}  // namespace oracle
