#include "capshock/gas_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "capshock/errors.hpp"

namespace capshock {

namespace {

std::string describe(const char* what, double value) {
  std::ostringstream os;
  os << what << " (got " << value << ")";
  return os.str();
}

}  // namespace

GasParams GasParams::make(double gamma, double v_plus, double d, double v_minus) {
  if (v_minus != 1.0) {
    throw DomainError(describe("v_minus is fixed to 1 by the adiabatic scaling", v_minus));
  }
  if (!(gamma >= 1.0) || !std::isfinite(gamma)) {
    throw DomainError(describe("gamma must be >= 1", gamma));
  }
  if (!(d > 0.0) || !std::isfinite(d)) {
    throw DomainError(describe("capillarity d must be > 0", d));
  }
  GasParams g;
  g.gamma = gamma;
  g.v_plus = v_plus;
  g.v_minus = v_minus;
  g.d = d;
  g.a = rankine_hugoniot(v_plus, gamma);
  g.epsilon = v_minus - v_plus;
  g.d_star = critical_capillarity(g.a, gamma);
  g.mach = mach_number(g.a, gamma);
  return g;
}

Pressure pressure(double v, double gamma) {
  if (!(v > 0.0)) throw DomainError(describe("pressure needs v > 0", v));
  if (!(gamma >= 1.0)) throw DomainError(describe("gamma must be >= 1", gamma));
  const double p = std::pow(v, -gamma);
  return {p, -gamma * p / v, gamma * (gamma + 1.0) * p / (v * v)};
}

double rankine_hugoniot(double v_plus, double gamma) {
  if (!(v_plus > 0.0 && v_plus < 1.0)) {
    throw DomainError(describe("rankine_hugoniot needs 0 < v_plus < 1", v_plus));
  }
  if (!(gamma >= 1.0)) throw DomainError(describe("gamma must be >= 1", gamma));
  // (1 - v)/(v^-g - 1) loses digits as v -> 1; expm1/log1p keep them.
  const double denom = std::expm1(-gamma * std::log1p(v_plus - 1.0));
  return (1.0 - v_plus) / denom;
}

double critical_capillarity(double a, double gamma) {
  const double margin = 1.0 - a * gamma;
  if (!(margin > 0.0) || a < 0.0) {
    throw DomainError(describe("critical_capillarity needs 0 <= a*gamma < 1", a * gamma));
  }
  return 1.0 / (4.0 * margin);
}

double mach_number(double a, double gamma) {
  if (!(a > 0.0)) throw DomainError(describe("mach number needs a > 0", a));
  return 1.0 / std::sqrt(gamma * a);
}

double phi(double v, const GasParams& params) {
  const double p = pressure(v, params.gamma).p;
  return v * (v - params.v_minus + params.a * (p - 1.0));
}

double phi_prime(double v, const GasParams& params) {
  const Pressure pr = pressure(v, params.gamma);
  const double bracket = v - params.v_minus + params.a * (pr.p - 1.0);
  return bracket + v * (1.0 + params.a * pr.dp);
}

double lyapunov_E(double v, double w, const GasParams& params) {
  if (!(v > 0.0)) throw DomainError(describe("lyapunov_E needs v > 0", v));
  const double kinetic = 0.5 * w * w;
  if (v == params.v_minus) return kinetic;

  // phi(s)/s = s - 1 + a (s^-gamma - 1)
  auto integrand = [&](double s) {
    const double ds = s - params.v_minus;
    return ds + params.a * std::expm1(-params.gamma * std::log1p(ds));
  };
  double error = 0.0;
  double l1 = 0.0;
  constexpr double kRelTol = 1e-10;
  using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
  // Absolute floor: near v_minus the estimate is pure rounding noise, and the
  // adaptive pass would bisect to full depth chasing it.
  constexpr double kAbsFloor = 1e-14;
  double integral = GK::integrate(integrand, v, params.v_minus, 0, kRelTol, &error, &l1);
  if (!(error <= kRelTol * l1 || error <= kAbsFloor)) {
    integral = GK::integrate(integrand, v, params.v_minus, 15, kRelTol, &error, &l1);
  }
  if (!std::isfinite(integral) || error > 10.0 * kRelTol * l1 + kAbsFloor) {
    std::ostringstream os;
    os << "lyapunov quadrature did not converge at v=" << v << ": estimate " << integral
       << ", error " << error;
    throw NumericError(os.str());
  }
  return kinetic - integral / params.d;
}

double f_coeff(double v_hat, double v_hat_x, const GasParams& params) {
  const Pressure pr = pressure(v_hat, params.gamma);
  return -params.a * pr.dp - v_hat_x / (v_hat * v_hat);
}

HighFrequencyBound hf_bound(std::span<const double> v_hat, std::span<const double> v_hat_x,
                            const GasParams& params) {
  if (v_hat.size() != v_hat_x.size()) {
    throw DomainError("hf_bound: v_hat and v_hat_x differ in length");
  }
  HighFrequencyBound out;
  for (std::size_t i = 0; i < v_hat.size(); ++i) {
    out.C = std::max(out.C, std::abs(f_coeff(v_hat[i], v_hat_x[i], params) * v_hat[i]));
  }
  out.raw_bound = 3.0 + 12.0 * out.C / 5.0;
  out.radius = std::max(12.0, out.raw_bound);
  out.exceeds_gamma = out.C > params.gamma;
  return out;
}

}  // namespace capshock
