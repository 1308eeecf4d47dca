#pragma once

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "capshock/gas_model.hpp"
#include "capshock/hermite.hpp"

namespace capshock {

enum class ProfileShape { Monotone, Oscillatory };

const char* to_string(ProfileShape shape);

/// Shock layer v(x) on a truncated line, oriented v(-inf) = v_minus = 1,
/// v(+inf) = v_plus, with the midpoint value pinned at x = 0.
///
/// Built once by solve_profile() or shoot_profile_oracle() and then only
/// read; sharing one instance across threads is safe.
struct ProfileSolution {
  GasParams params;
  std::vector<double> grid;
  std::vector<double> v_hat;
  std::vector<double> w_hat;     // v_x
  std::vector<double> v_hat_xx;  // from the profile ODE, not differenced
  ProfileShape classification = ProfileShape::Monotone;
  double residual_norm = 0.0;
  double left_endpoint_error = 0.0;   // |v(L-) - v_minus|
  double right_endpoint_error = 0.0;  // |v(L+) - v_plus|
  int newton_iterations = 0;
  int refinements = 0;

  double L_minus() const { return grid.front(); }
  double L_plus() const { return grid.back(); }

  struct Point {
    double v;
    double w;
  };
  /// Interpolated (v, v_x); hint caches the last interval for sequential sweeps.
  Point at(double x, std::size_t* hint = nullptr) const;

  /// Rebuilds the interpolants, v_xx, endpoint errors and shape from grid/v/w.
  void finalize();

 private:
  CubicHermite v_interp_;
  CubicHermite w_interp_;
};

/// Right-hand side of the first-order profile system v' = w, w' = (w - phi(v)) / (d v).
std::array<double, 2> profile_rhs(double v, double w, const GasParams& params);

/// Jacobian of profile_rhs.
Eigen::Matrix2d profile_jacobian(double v, double w, const GasParams& params);

struct EndpointLinearization {
  Eigen::Matrix2d J;
  /// Ordered by decreasing real part.
  std::array<std::complex<double>, 2> eigenvalues;
  /// Unit length, first nonzero component real and positive.
  std::array<Eigen::Vector2cd, 2> eigenvectors;
  double discriminant = 0.0;  // trace^2 - 4 det
};

/// Linearization of the profile system at an end state (v_e, 0).
EndpointLinearization endpoint_linearization(double v_e, const GasParams& params);

struct MeshOptions {
  double L_minus = -25.0;
  double L_plus = 25.0;
  int initial_points = 400;
  int stages = 4;                 // Lobatto IIIA stages per interval (3..5)
  double residual_tol = 1e-8;
  double endpoint_tol = 1e-6;
  bool auto_enlarge = true;       // double each side until endpoint_tol is met
  double max_L = 400.0;
  int max_intervals = 400000;
  int max_newton_iterations = 80;
};

/// Collocation solution of the heteroclinic boundary value problem.
///
/// Boundary data: nothing at L- (v_minus is an unstable node/spiral, so the
/// whole plane is its unstable eigenspace), the stable eigenline of the
/// v_plus saddle at L+, and v(0) = (v_plus + v_minus)/2.
/// Throws NumericError on Newton failure and TruncationError when the
/// endpoint errors stay above tolerance at max_L.
ProfileSolution solve_profile(const GasParams& params, const MeshOptions& options = {});

struct ShootOptions {
  double start_distance = 1e-8;
  double arrival_distance = 1e-6;
  double abs_tol = 1e-13;
  double rel_tol = 1e-12;
  double max_step = 0.05;
  double max_length = 1e6;
};

/// Independent profile: integrate backward from the saddle's stable
/// eigendirection until (v, w) reaches v_minus, then re-centre at the
/// midpoint crossing closest to v_plus. The grid ends at L_plus, filled
/// by the linear stable decay if the orbit was started closer in.
ProfileSolution shoot_profile_oracle(const GasParams& params, double L_plus = 25.0,
                                     const ShootOptions& options = {});

struct ShapeReport {
  ProfileShape shape = ProfileShape::Monotone;
  double max_slope = 0.0;             // max v_x on the grid
  bool oscillation_on_grid = false;   // some v_x > 1e-10
  bool oscillation_in_tail = false;   // linearized continuation to the left turns around
};

/// Shape of the full-line profile: the computed grid plus its linearized
/// continuation to the left, started where the deviation from v_minus is
/// still well above rounding. Does not compare against d_star.
ShapeReport detect_shape(const ProfileSolution& profile);

/// detect_shape() checked against the d <= d_star predicate; a mismatch
/// throws ConsistencyError.
ProfileShape classify(const ProfileSolution& profile);

struct ValidationReport {
  double sup_slope = 0.0;       // sup |v_x| on a 10x refined resampling
  double slope_bound = 0.0;     // epsilon^2 / 4
  bool slope_bound_ok = false;  // sup_slope <= slope_bound + slack
  /// sup of |phi| over [v_plus, v_minus]. The extremum of v_x sits on w = phi(v),
  /// so this is the sharp bound; epsilon^2/4 undercuts it for most shocks.
  double phi_bound = 0.0;
  bool phi_bound_ok = false;    // sup_slope <= phi_bound + slack

  double argmax_x = 0.0;        // location of sup |v_x| on the grid
  double crossing_x = 0.0;      // nearest zero of w - phi(v)
  double local_spacing = 0.0;   // grid spacing around argmax_x
  bool argmax_on_phi_curve = false;

  double lyapunov_worst_drop = 0.0;  // largest decrease of E between neighbours
  bool lyapunov_monotone = false;    // E non-decreasing in x up to tolerance

  double residual_norm = 0.0;
  bool residual_ok = false;
  double left_endpoint_error = 0.0;
  double right_endpoint_error = 0.0;
  bool endpoints_ok = false;

  bool passed() const {
    return phi_bound_ok && argmax_on_phi_curve && lyapunov_monotone && residual_ok &&
           endpoints_ok;
  }
};

struct ValidationOptions {
  double residual_tol = 1e-8;
  double endpoint_tol = 1e-6;
  double slope_slack = 1e-8;
  double lyapunov_tol = 1e-9;
};

ValidationReport validate(const ProfileSolution& profile, const ValidationOptions& options = {});

/// sup |phi(v)| for v in [v_plus, v_minus], by golden-section search on the single extremum.
double phi_sup(const GasParams& params);

/// Constant state v = value on [L_minus, L_plus]; used for frozen-coefficient checks.
ProfileSolution constant_profile(const GasParams& params, double value, double L_minus,
                                 double L_plus, int points = 64);

/// 2x2 real matrix exponential exp(J t).
Eigen::Matrix2d expm2(const Eigen::Matrix2d& J, double t);

}  // namespace capshock
