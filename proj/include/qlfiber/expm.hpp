// Dense matrix exponential by scaling and squaring with diagonal Pade
// approximants of degree 3, 5, 7, 9 or 13 (Higham 2005 selection thresholds).
#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace qlfiber {

namespace detail {

template <typename Plain>
void pade3(const Plain& a, Plain& u, Plain& v)
{
  constexpr double b[] = {120.0, 60.0, 12.0, 1.0};
  const Plain id = Plain::Identity(a.rows(), a.cols());
  const Plain a2 = a * a;
  u.noalias() = a * (b[3] * a2 + b[1] * id);
  v = b[2] * a2 + b[0] * id;
}

template <typename Plain>
void pade5(const Plain& a, Plain& u, Plain& v)
{
  constexpr double b[] = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
  const Plain id = Plain::Identity(a.rows(), a.cols());
  const Plain a2 = a * a;
  const Plain a4 = a2 * a2;
  u.noalias() = a * (b[5] * a4 + b[3] * a2 + b[1] * id);
  v = b[4] * a4 + b[2] * a2 + b[0] * id;
}

template <typename Plain>
void pade7(const Plain& a, Plain& u, Plain& v)
{
  constexpr double b[] = {17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0};
  const Plain id = Plain::Identity(a.rows(), a.cols());
  const Plain a2 = a * a;
  const Plain a4 = a2 * a2;
  const Plain a6 = a4 * a2;
  u.noalias() = a * (b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  v = b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
}

template <typename Plain>
void pade9(const Plain& a, Plain& u, Plain& v)
{
  constexpr double b[] = {17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
                          2162160.0,     110880.0,     3960.0,       90.0,        1.0};
  const Plain id = Plain::Identity(a.rows(), a.cols());
  const Plain a2 = a * a;
  const Plain a4 = a2 * a2;
  const Plain a6 = a4 * a2;
  const Plain a8 = a6 * a2;
  u.noalias() = a * (b[9] * a8 + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  v = b[8] * a8 + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
}

template <typename Plain>
void pade13(const Plain& a, Plain& u, Plain& v)
{
  constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
                          129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
                          1323241920.0,        40840800.0,          960960.0,           16380.0,
                          182.0,               1.0};
  const Plain id = Plain::Identity(a.rows(), a.cols());
  const Plain a2 = a * a;
  const Plain a4 = a2 * a2;
  const Plain a6 = a4 * a2;
  Plain tmp = b[13] * a6 + b[11] * a4 + b[9] * a2;
  u.noalias() = a6 * tmp;
  u += b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id;
  tmp = u;
  u.noalias() = a * tmp;
  tmp = b[12] * a6 + b[10] * a4 + b[8] * a2;
  v.noalias() = a6 * tmp;
  v += b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
}

}  // namespace detail

template <typename Derived>
typename Derived::PlainObject expm(const Eigen::MatrixBase<Derived>& arg)
{
  using Plain = typename Derived::PlainObject;
  eigen_assert(arg.rows() == arg.cols());
  Plain a = arg;
  if (a.rows() == 0) return a;

  const double l1 = a.cwiseAbs().colwise().sum().maxCoeff();
  Plain u, v;
  int squarings = 0;
  if (l1 < 1.495585217958292e-2) {
    detail::pade3(a, u, v);
  } else if (l1 < 2.539398330063230e-1) {
    detail::pade5(a, u, v);
  } else if (l1 < 9.504178996162932e-1) {
    detail::pade7(a, u, v);
  } else if (l1 < 2.097847961257068e0) {
    detail::pade9(a, u, v);
  } else {
    constexpr double theta13 = 5.371920351148152;
    squarings = std::max(0, static_cast<int>(std::ceil(std::log2(l1 / theta13))));
    a /= std::ldexp(1.0, squarings);
    detail::pade13(a, u, v);
  }
  Plain result = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < squarings; ++k) {
    Plain sq = result * result;
    result.swap(sq);
  }
  return result;
}

}  // namespace qlfiber
