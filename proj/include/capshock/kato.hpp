#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace capshock {

/// M(lambda) = base + lambda * slope.
struct AffineFamily {
  Eigen::MatrixXcd base;
  Eigen::MatrixXcd slope;

  Eigen::MatrixXcd at(std::complex<double> lambda) const { return base + lambda * slope; }
};

/// Eigenvalue of M nearest `target` with its right and left eigenvectors
/// (left normalised so that left^T right = 1) and the distance to the rest
/// of the spectrum. The overload taking a vector picks instead the
/// eigenvalue whose spectral component of that vector is largest.
struct SpectralData {
  std::complex<double> eigenvalue;
  Eigen::VectorXcd right;
  Eigen::VectorXcd left;
  double gap = 0.0;
};

SpectralData spectral_data(const Eigen::MatrixXcd& M, std::complex<double> target);
SpectralData spectral_data(const Eigen::MatrixXcd& M, const Eigen::VectorXcd& near);

enum class KatoScheme {
  Ode,              // adaptive RK on r' = [P', P] r along straight chords
  ProjectorUpdate,  // r+ = P+ [I + P (I - P+)] r, second order in the step
};

struct KatoOptions {
  KatoScheme scheme = KatoScheme::Ode;
  double abs_tol = 1e-13;
  double rel_tol = 1e-12;
  double gap_tol = 1e-8;
  int substeps = 1;  // ProjectorUpdate: uniform sub-chords per path segment
};

/// Transports r0, an eigenvector of M(path[0]) for a simple eigenvalue, along
/// the polyline through `path`. Element j of the result is r(path[j]).
///
/// The tracked eigenvalue is followed by continuity; a spectral gap below
/// gap_tol throws DegeneracyError carrying the offending lambda.
std::vector<Eigen::VectorXcd> kato_transport(const AffineFamily& family,
                                             std::span<const std::complex<double>> path,
                                             const Eigen::VectorXcd& r0,
                                             const KatoOptions& options = {});

}  // namespace capshock
