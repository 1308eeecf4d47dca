#pragma once

#include <array>
#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "capshock/detail/integrate.hpp"
#include "capshock/exterior.hpp"
#include "capshock/kato.hpp"
#include "capshock/profile.hpp"

namespace capshock {

/// Coefficient matrix of the integrated eigenvalue problem as a first-order
/// system in W = (u, v, v', v''):
///
///   [ 0     lambda  1     0        ]
///   [ 0     0       1     0        ]
///   [ 0     0       0     1        ]
///   [ -l/d  -l/d    -h/d  1/(d v)  ]
///
/// with h = 1 + a p'(v) + v_x / v^2 - lambda / v.
Matrix4c evans_matrix(double v, double v_x, cdouble lambda, const GasParams& params);

/// h(v, v_x, lambda) from the matrix above.
cdouble evans_h(double v, double v_x, cdouble lambda, const GasParams& params);

struct EndSpectrum {
  std::array<cdouble, 4> eigenvalues;   // decreasing real part
  std::array<Vector4c, 4> eigenvectors;
};

/// Leading and trailing exponents of the two end states, with the consistent
/// splitting check: A_minus has exactly two eigenvalues with positive real
/// part and A_plus exactly two with negative real part.
struct Splitting {
  EndSpectrum minus;
  EndSpectrum plus;
  double gap_minus = 0.0;  // Re(mu2 - mu3) at x = -inf
  double gap_plus = 0.0;   // Re(mu2 - mu3) at x = +inf
};

/// Dominant modes of the lifted end-state systems at one lambda.
///
/// mu_minus / r_minus: largest-real-part eigenpair of the lifted A_minus
/// (the unstable 2-form). mu_tilde_plus / r_tilde_plus: the adjoint mode
/// Z(x) = exp(mu_tilde_plus x) r_tilde_plus of Z' = -A2^T Z that grows
/// fastest toward decreasing x; r_tilde_plus annihilates the stable 2-form
/// of A_plus. r_plus / mu_plus: the stable 2-form itself, used by the forward
/// compound variant. Eigenvectors are unnormalised here.
struct DominantModes {
  cdouble mu_minus;
  Vector6c r_minus;
  cdouble mu_tilde_plus;
  Vector6c r_tilde_plus;
  cdouble mu_plus;
  Vector6c r_plus;
  double gap_minus = 0.0;
  double gap_plus = 0.0;
};

/// Analytic choice of the three initial vectors at one lambda.
struct ModeVectors {
  Vector6c r_minus;
  Vector6c r_tilde_plus;
  Vector6c r_plus;
};

struct EvansOptions {
  double abs_tol = 1e-6;
  double rel_tol = 1e-8;
  double max_step = 0.0;      // <= 0: unbounded
  double norm_floor = 1e-4;   // |V(x)| / |V(start)| must stay inside [floor, ceiling]
  double norm_ceiling = 1e4;
  double gap_tol = 1e-8;
  /// Adds tr A(x) - tr A(end) = 1/(d v) - 1/(d v_end) to the rescaling
  /// exponent of the unstable and adjoint 2-forms. The term is independent of
  /// lambda, so D only changes by a positive constant factor, but the rescaled
  /// solutions stay O(1) through strong or weakly dispersive layers.
  bool trace_rescaling = true;
  /// Real frequency where the analytic eigenvector fields are normalised
  /// (real and unit length); every other lambda is reached by transport.
  double kato_base = 12.0;
  KatoOptions kato;
};

struct EvansEvaluation {
  cdouble lambda;
  cdouble value;  // W_tilde_plus_at_0 . W_minus_at_0, unconjugated
  Vector6c W_minus_at_0;
  Vector6c W_tilde_plus_at_0;
  IntegrationStats minus_stats;
  IntegrationStats plus_stats;
};

struct RealAxisScan {
  std::vector<double> lambdas;  // ascending Chebyshev points in (0, R]
  std::vector<cdouble> values;
  double min_abs = 0.0;
  double min_abs_lambda = 0.0;
  int sign_changes = 0;
  double max_imag_ratio = 0.0;  // max |Im D| / |D|; D is real on the real axis
  bool zero_crossing() const { return sign_changes > 0; }
};

/// Evans function of one shock profile.
///
/// Immutable after construction; evaluate() and evaluate_batch() may be called
/// concurrently from several threads.
class EvansSystem {
 public:
  explicit EvansSystem(std::shared_ptr<const ProfileSolution> profile, EvansOptions options = {});
  explicit EvansSystem(const ProfileSolution& profile, EvansOptions options = {});

  const ProfileSolution& profile() const { return *profile_; }
  const GasParams& params() const { return profile_->params; }
  const EvansOptions& options() const { return options_; }

  Matrix4c A(double x, cdouble lambda) const;
  Matrix4c A_minus(cdouble lambda) const;
  Matrix4c A_plus(cdouble lambda) const;
  Matrix6c lifted(double x, cdouble lambda) const { return lift_exterior(A(x, lambda)); }

  /// Throws DegeneracyError when splitting fails or the dominant sums are not simple.
  Splitting splitting(cdouble lambda) const;
  DominantModes dominant_modes(cdouble lambda) const;

  /// Analytic initial vectors along `path`, transported from kato_base.
  /// Samples with Im < 0 use the conjugates of their mirror images, so the
  /// result is conjugate symmetric.
  std::vector<ModeVectors> analytic_modes(std::span<const cdouble> path) const;
  ModeVectors analytic_modes(cdouble lambda) const;

  /// Transports vectors known at `from` along the straight chord to `to`.
  ModeVectors transport_modes(cdouble from, const ModeVectors& at_from, cdouble to) const;

  /// V(0) for V' = (A2 - mu_minus) V from L_minus, V(L_minus) = r.
  Vector6c evolve_unstable(cdouble lambda, cdouble mu_minus, const Vector6c& r,
                           IntegrationStats* stats = nullptr) const;
  /// Rescaled adjoint at 0, integrated from L_plus down to 0 starting at r.
  Vector6c evolve_adjoint(cdouble lambda, cdouble mu_tilde_plus, const Vector6c& r,
                          IntegrationStats* stats = nullptr) const;
  /// Rescaled stable 2-form at 0, integrated from L_plus down to 0.
  Vector6c evolve_stable(cdouble lambda, cdouble mu_plus, const Vector6c& r,
                         IntegrationStats* stats = nullptr) const;

  EvansEvaluation evaluate(cdouble lambda, const ModeVectors& modes) const;
  EvansEvaluation evaluate(cdouble lambda) const;

  /// Forward-only compound variant W_minus ^ W_plus at x = 0. Differs from
  /// evaluate() by a nonvanishing analytic factor.
  cdouble evaluate_forward(cdouble lambda, const ModeVectors& modes) const;

  /// Parallel map of evaluate(); results are in input order.
  std::vector<EvansEvaluation> evaluate_batch(std::span<const cdouble> lambdas,
                                              std::span<const ModeVectors> modes,
                                              int jobs = 1) const;

  /// D on n Chebyshev points of (0, R], ascending.
  RealAxisScan real_axis_scan(double R, int n, int jobs = 1) const;

 private:
  std::vector<ModeVectors> transport(const ModeVectors& start, std::span<const cdouble> path) const;

  std::shared_ptr<const ProfileSolution> profile_;
  EvansOptions options_;
};

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first exception
/// is rethrown after all workers stop.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace capshock
