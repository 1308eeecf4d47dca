#pragma once

#include <array>
#include <complex>
#include <utility>

#include <Eigen/Dense>

namespace capshock {

using cdouble = std::complex<double>;
using Matrix4c = Eigen::Matrix<cdouble, 4, 4>;
using Vector4c = Eigen::Matrix<cdouble, 4, 1>;
using Matrix6c = Eigen::Matrix<cdouble, 6, 6>;
using Vector6c = Eigen::Matrix<cdouble, 6, 1>;

/// Index pairs of the 2-form basis e1^e2, e1^e3, e1^e4, e2^e3, e2^e4, e3^e4 (zero based).
inline constexpr std::array<std::pair<int, int>, 6> kWedgeBasis{
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

/// Induced action of A on 2-forms: (A e_i)^e_j + e_i^(A e_j).
template <class Scalar>
Eigen::Matrix<Scalar, 6, 6> lift_exterior(const Eigen::Matrix<Scalar, 4, 4>& A) {
  Eigen::Matrix<Scalar, 6, 6> out;
  for (int r = 0; r < 6; ++r) {
    const auto [i, j] = kWedgeBasis[r];
    for (int c = 0; c < 6; ++c) {
      const auto [k, l] = kWedgeBasis[c];
      Scalar v(0);
      if (j == l) v += A(i, k);
      if (i == l) v -= A(j, k);
      if (i == k) v += A(j, l);
      if (j == k) v -= A(i, l);
      out(r, c) = v;
    }
  }
  return out;
}

/// Coordinates of u ^ v in the 2-form basis.
template <class Scalar>
Eigen::Matrix<Scalar, 6, 1> wedge(const Eigen::Matrix<Scalar, 4, 1>& u,
                                  const Eigen::Matrix<Scalar, 4, 1>& v) {
  Eigen::Matrix<Scalar, 6, 1> out;
  for (int r = 0; r < 6; ++r) {
    const auto [i, j] = kWedgeBasis[r];
    out[r] = u[i] * v[j] - u[j] * v[i];
  }
  return out;
}

/// Q with U^V = U^T Q V * e1^e2^e3^e4 for 2-forms U, V.
inline Eigen::Matrix<double, 6, 6> wedge_pairing() {
  Eigen::Matrix<double, 6, 6> Q = Eigen::Matrix<double, 6, 6>::Zero();
  Q(0, 5) = Q(5, 0) = 1.0;
  Q(1, 4) = Q(4, 1) = -1.0;
  Q(2, 3) = Q(3, 2) = 1.0;
  return Q;
}

}  // namespace capshock
