#include "capshock/profile.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "capshock/errors.hpp"

namespace capshock {

const char* to_string(ProfileShape shape) {
  return shape == ProfileShape::Monotone ? "monotone" : "oscillatory";
}

std::array<double, 2> profile_rhs(double v, double w, const GasParams& params) {
  if (!(v > 0.0)) {
    std::ostringstream os;
    os << "profile orbit left v > 0 (v=" << v << ")";
    throw DomainError(os.str());
  }
  return {w, (w - phi(v, params)) / (params.d * v)};
}

Eigen::Matrix2d profile_jacobian(double v, double w, const GasParams& params) {
  const double g = w - phi(v, params);
  Eigen::Matrix2d J;
  J << 0.0, 1.0, (-phi_prime(v, params) * v - g) / (params.d * v * v), 1.0 / (params.d * v);
  return J;
}

EndpointLinearization endpoint_linearization(double v_e, const GasParams& params) {
  EndpointLinearization out;
  const double dp = pressure(v_e, params.gamma).dp;
  out.J << 0.0, 1.0, -(1.0 + params.a * dp) / params.d, 1.0 / (params.d * v_e);
  const double tr = out.J.trace();
  const double det = out.J.determinant();
  out.discriminant = tr * tr - 4.0 * det;
  const std::complex<double> root = std::sqrt(std::complex<double>(out.discriminant, 0.0));
  out.eigenvalues = {0.5 * (tr + root), 0.5 * (tr - root)};
  if (out.eigenvalues[1].real() > out.eigenvalues[0].real()) {
    std::swap(out.eigenvalues[0], out.eigenvalues[1]);
  }
  // first row of J is (0, 1), so (1, mu) is always an eigenvector
  for (int k = 0; k < 2; ++k) {
    Eigen::Vector2cd r(1.0, out.eigenvalues[k]);
    out.eigenvectors[k] = r / r.norm();
  }
  return out;
}

ProfileSolution::Point ProfileSolution::at(double x, std::size_t* hint) const {
  std::size_t local = hint != nullptr ? *hint : 0;
  const auto v = v_interp_.eval(x, &local);
  const auto w = w_interp_.eval(x, &local);
  if (hint != nullptr) *hint = local;
  return {v.value, w.value};
}

void ProfileSolution::finalize() {
  const std::size_t n = grid.size();
  if (n < 2 || v_hat.size() != n || w_hat.size() != n) {
    throw DomainError("ProfileSolution: grid, v_hat and w_hat must have equal length >= 2");
  }
  v_hat_xx.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    v_hat_xx[i] = profile_rhs(v_hat[i], w_hat[i], params)[1];
  }
  v_interp_ = CubicHermite(grid, v_hat, w_hat);
  w_interp_ = CubicHermite(grid, w_hat, v_hat_xx);
  left_endpoint_error = std::abs(v_hat.front() - params.v_minus);
  right_endpoint_error = std::abs(v_hat.back() - params.v_plus);
  classification = detect_shape(*this).shape;
}

Eigen::Matrix2d expm2(const Eigen::Matrix2d& J, double t) {
  const double half_trace = 0.5 * J.trace();
  const Eigen::Matrix2d shifted = J - half_trace * Eigen::Matrix2d::Identity();
  const double q = half_trace * half_trace - J.determinant();
  double c = 1.0;
  double s_over = t;  // sinh(s t)/s or sin(s t)/s
  if (q > 0.0) {
    const double s = std::sqrt(q);
    c = std::cosh(s * t);
    s_over = std::sinh(s * t) / s;
  } else if (q < 0.0) {
    const double s = std::sqrt(-q);
    c = std::cos(s * t);
    s_over = std::sin(s * t) / s;
  }
  return std::exp(half_trace * t) * (c * Eigen::Matrix2d::Identity() + s_over * shifted);
}

ShapeReport detect_shape(const ProfileSolution& profile) {
  constexpr double kSlopeTol = 1e-10;
  ShapeReport report;
  report.max_slope = *std::max_element(profile.w_hat.begin(), profile.w_hat.end());
  report.oscillation_on_grid = report.max_slope > kSlopeTol;

  // Close to v_minus the orbit obeys the linearization to second order in
  // the deviation, so its continuation to the left is exp(J t) applied to the
  // deviation. Start from the leftmost grid point where the deviation is still
  // resolved; further left it is rounding noise. Only the direction matters,
  // so renormalise each step.
  constexpr double kTailStart = 1e-6;
  std::size_t start = 0;
  while (start + 1 < profile.grid.size() &&
         std::hypot(profile.v_hat[start] - profile.params.v_minus, profile.w_hat[start]) < kTailStart) {
    ++start;
  }
  Eigen::Vector2d dev(profile.v_hat[start] - profile.params.v_minus, profile.w_hat[start]);
  if (dev.norm() > 0.0) {
    const auto lin = endpoint_linearization(profile.params.v_minus, profile.params);
    double step = 0.0;
    long steps = 0;
    if (lin.discriminant < 0.0) {
      const double omega = std::abs(lin.eigenvalues[0].imag());
      const double period = 2.0 * std::numbers::pi / omega;
      step = period / 64.0;
      steps = 80;  // 1.25 periods: the w component must turn around within one
    } else {
      const double fast = lin.eigenvalues[0].real();
      const double gap = fast - lin.eigenvalues[1].real();
      const double horizon = 60.0 / std::max(gap, 1e-6 * fast);
      step = std::max(0.25 / fast, horizon / 2e6);
      steps = static_cast<long>(std::ceil(horizon / step));
    }
    const Eigen::Matrix2d back = expm2(lin.J, -step);
    dev /= dev.norm();
    for (long k = 0; k < steps; ++k) {
      dev = back * dev;
      dev /= dev.norm();
      if (dev[1] > 0.0) {
        report.oscillation_in_tail = true;
        break;
      }
    }
  }
  report.shape = (report.oscillation_on_grid || report.oscillation_in_tail)
                     ? ProfileShape::Oscillatory
                     : ProfileShape::Monotone;
  return report;
}

ProfileShape classify(const ProfileSolution& profile) {
  const ShapeReport report = detect_shape(profile);
  const bool predicted_monotone = profile.params.monotone_predicted();
  if ((report.shape == ProfileShape::Monotone) != predicted_monotone) {
    std::ostringstream os;
    os.precision(10);
    os << "profile shape " << to_string(report.shape) << " contradicts d=" << profile.params.d
       << (predicted_monotone ? " <= " : " > ") << "d_star=" << profile.params.d_star
       << " (max v_x on grid " << report.max_slope << ", tail turn "
       << (report.oscillation_in_tail ? "yes" : "no") << ")";
    throw ConsistencyError(os.str());
  }
  return report.shape;
}

ValidationReport validate(const ProfileSolution& profile, const ValidationOptions& options) {
  ValidationReport r;
  const auto& x = profile.grid;
  const auto& params = profile.params;
  const std::size_t n = x.size();

  r.slope_bound = params.epsilon * params.epsilon / 4.0;
  std::size_t hint = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (int k = 0; k < 10; ++k) {
      const double xi = x[i] + (x[i + 1] - x[i]) * k / 10.0;
      r.sup_slope = std::max(r.sup_slope, std::abs(profile.at(xi, &hint).w));
    }
  }
  r.sup_slope = std::max(r.sup_slope, std::abs(profile.w_hat.back()));
  r.slope_bound_ok = r.sup_slope <= r.slope_bound + options.slope_slack;
  r.phi_bound = phi_sup(params);
  r.phi_bound_ok = r.sup_slope <= r.phi_bound + options.slope_slack;

  std::size_t k = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(profile.w_hat[i]) > std::abs(profile.w_hat[k])) k = i;
  }
  r.argmax_x = x[k];
  r.local_spacing = std::max(k > 0 ? x[k] - x[k - 1] : 0.0, k + 1 < n ? x[k + 1] - x[k] : 0.0);
  if (profile.w_hat[k] == 0.0) {
    r.crossing_x = r.argmax_x;
    r.argmax_on_phi_curve = true;
  } else {
    auto g = [&](double xi) {
      const auto p = profile.at(xi);
      return p.w - phi(p.v, params);
    };
    // Scan outward from the argmax for the nearest sign change of w - phi(v).
    bool found = false;
    for (std::size_t off = 0; off < n && !found; ++off) {
      for (int side : {-1, 1}) {
        const long lo = static_cast<long>(k) + (side < 0 ? -static_cast<long>(off) - 1
                                                         : static_cast<long>(off));
        const long hi = lo + 1;
        if (lo < 0 || hi >= static_cast<long>(n)) continue;
        double a = x[lo], b = x[hi];
        double ga = g(a), gb = g(b);
        if (ga == 0.0 || gb == 0.0 || (ga < 0.0) != (gb < 0.0)) {
          for (int it = 0; it < 80 && ga != 0.0 && gb != 0.0; ++it) {
            const double m = 0.5 * (a + b);
            const double gm = g(m);
            if ((gm < 0.0) == (ga < 0.0)) {
              a = m;
              ga = gm;
            } else {
              b = m;
              gb = gm;
            }
          }
          r.crossing_x = ga == 0.0 ? a : (gb == 0.0 ? b : 0.5 * (a + b));
          found = true;
          break;
        }
      }
    }
    r.argmax_on_phi_curve = found && std::abs(r.crossing_x - r.argmax_x) <= r.local_spacing;
  }

  double e_prev = lyapunov_E(profile.v_hat[0], profile.w_hat[0], params);
  double e_max = std::abs(e_prev);
  for (std::size_t i = 1; i < n; ++i) {
    const double e = lyapunov_E(profile.v_hat[i], profile.w_hat[i], params);
    r.lyapunov_worst_drop = std::max(r.lyapunov_worst_drop, e_prev - e);
    e_max = std::max(e_max, std::abs(e));
    e_prev = e;
  }
  r.lyapunov_monotone = r.lyapunov_worst_drop <= options.lyapunov_tol * std::max(1.0, e_max);

  r.residual_norm = profile.residual_norm;
  r.residual_ok = r.residual_norm <= options.residual_tol;
  r.left_endpoint_error = profile.left_endpoint_error;
  r.right_endpoint_error = profile.right_endpoint_error;
  r.endpoints_ok = r.left_endpoint_error <= options.endpoint_tol &&
                   r.right_endpoint_error <= options.endpoint_tol;
  return r;
}

double phi_sup(const GasParams& params) {
  // phi < 0 strictly inside (v_plus, v_minus) and is convex there: one minimum.
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = params.v_plus, b = params.v_minus;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = phi(c, params), fd = phi(d, params);
  while (b - a > 1e-12) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = phi(c, params);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = phi(d, params);
    }
  }
  return std::abs(phi(0.5 * (a + b), params));
}

ProfileSolution constant_profile(const GasParams& params, double value, double L_minus,
                                 double L_plus, int points) {
  if (!(L_minus < L_plus) || points < 2) throw DomainError("constant_profile: bad domain");
  ProfileSolution p;
  p.params = params;
  p.grid.resize(points);
  for (int i = 0; i < points; ++i) {
    p.grid[i] = L_minus + (L_plus - L_minus) * i / (points - 1);
  }
  p.v_hat.assign(points, value);
  p.w_hat.assign(points, 0.0);
  p.finalize();
  return p;
}

}  // namespace capshock
