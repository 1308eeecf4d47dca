#pragma once

#include <span>

namespace capshock {

/// Adiabatic gas p(v) = v^-gamma in the scaling v_minus = 1.
///
/// Only the primary parameters (gamma, v_plus, d) are free; the rest are
/// derived on construction and kept consistent. Construct through make().
struct GasParams {
  double gamma = 1.4;
  double v_plus = 0.5;
  double v_minus = 1.0;
  double d = 0.45;
  double a = 0.0;        // Rankine-Hugoniot speed parameter
  double epsilon = 0.0;  // amplitude v_minus - v_plus
  double d_star = 0.0;   // monotone/oscillatory transition
  double mach = 0.0;

  /// Validates and fills the derived fields. Throws DomainError for
  /// v_plus outside (0,1), gamma < 1, d <= 0 or v_minus != 1.
  static GasParams make(double gamma, double v_plus, double d, double v_minus = 1.0);

  bool monotone_predicted() const { return d <= d_star; }
};

struct Pressure {
  double p;
  double dp;
  double d2p;
};

Pressure pressure(double v, double gamma);

double rankine_hugoniot(double v_plus, double gamma);

double critical_capillarity(double a, double gamma);

double mach_number(double a, double gamma);

/// phi(v) = v (v - v_minus + a (p(v) - p(v_minus))), the zero-capillarity slope.
double phi(double v, const GasParams& params);

/// d(phi)/dv.
double phi_prime(double v, const GasParams& params);

/// E(v,w) = w^2/2 - (1/d) * integral_v^{v_minus} phi(s)/s ds.
///
/// The integral is evaluated with adaptive Gauss-Kronrod quadrature at
/// relative tolerance 1e-10; non-convergence throws NumericError.
double lyapunov_E(double v, double w, const GasParams& params);

/// f(v) = -a p'(v) - v_x / v^2, the flux coefficient of the integrated
/// eigenvalue problem.
double f_coeff(double v_hat, double v_hat_x, const GasParams& params);

struct HighFrequencyBound {
  double C = 0.0;             // sup |f(v) v| over the profile
  double radius = 12.0;       // max(12, 3 + 12 C / 5)
  double raw_bound = 0.0;     // 3 + 12 C / 5
  bool exceeds_gamma = false; // C > gamma flags a profile defect
};

/// Bound from sampled profile values; the two spans must have equal length.
HighFrequencyBound hf_bound(std::span<const double> v_hat, std::span<const double> v_hat_x,
                            const GasParams& params);

}  // namespace capshock
