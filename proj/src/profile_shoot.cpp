#include <array>
#include <cmath>
#include <sstream>
#include <vector>

#include "capshock/detail/integrate.hpp"
#include "capshock/errors.hpp"
#include "capshock/hermite.hpp"
#include "capshock/profile.hpp"

namespace capshock {

ProfileSolution shoot_profile_oracle(const GasParams& params, double L_plus,
                                     const ShootOptions& opt) {
  if (!(L_plus > 0.0)) throw DomainError("shoot_profile_oracle needs L_plus > 0");
  using State = std::array<double, 2>;

  const auto lin = endpoint_linearization(params.v_plus, params);
  const double mu = lin.eigenvalues[1].real();  // stable
  const double r_norm = std::hypot(1.0, mu);
  State y{params.v_plus + opt.start_distance / r_norm, opt.start_distance * mu / r_norm};

  // s = -x; the orbit runs from the saddle toward v_minus as s grows.
  std::vector<double> s_pts{0.0}, v_pts{y[0]}, w_pts{y[1]};
  bool arrived = false;
  auto system = [&](const State& u, State& du, double) {
    const auto f = profile_rhs(u[0], u[1], params);
    du[0] = -f[0];
    du[1] = -f[1];
  };
  auto observe = [&](const State& u, double s) {
    if (!(u[0] > 0.5 * params.v_plus && u[0] < 2.0 * params.v_minus) || !std::isfinite(u[1])) {
      std::ostringstream os;
      os << "shooting orbit left the box at x=" << -s << " (v=" << u[0] << ", v_x=" << u[1] << ")";
      throw NumericError(os.str());
    }
    s_pts.push_back(s);
    v_pts.push_back(u[0]);
    w_pts.push_back(u[1]);
    arrived = std::hypot(u[0] - params.v_minus, u[1]) < opt.arrival_distance;
    return !arrived;
  };
  detail::integrate_dopri(system, y, 0.0, opt.max_length, opt.abs_tol, opt.rel_tol, opt.max_step,
                          observe, 50'000'000);
  if (!arrived) throw NumericError("shooting orbit did not reach v_minus within max_length");

  // Rightmost midpoint crossing in x = first in s. dv/ds = -w.
  const double mid = 0.5 * (params.v_plus + params.v_minus);
  std::size_t k = 1;
  while (k < v_pts.size() && v_pts[k] < mid) ++k;
  if (k == v_pts.size()) throw NumericError("shooting orbit never crossed the midpoint");
  std::vector<double> neg_w(w_pts.size());
  for (std::size_t i = 0; i < w_pts.size(); ++i) neg_w[i] = -w_pts[i];
  const CubicHermite v_of_s(s_pts, v_pts, neg_w);
  double a = s_pts[k - 1], b = s_pts[k];
  for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, b); ++it) {
    const double m = 0.5 * (a + b);
    (v_of_s(m).value < mid ? a : b) = m;
  }
  const double s_cross = 0.5 * (a + b);

  ProfileSolution out;
  out.params = params;
  for (std::size_t i = s_pts.size(); i-- > 0;) {
    const double x = s_cross - s_pts[i];
    if (x >= L_plus) break;
    out.grid.push_back(x);
    out.v_hat.push_back(v_pts[i]);
    out.w_hat.push_back(w_pts[i]);
  }
  const double x_start = s_cross;  // location of the seed point
  if (x_start >= L_plus) {
    const std::vector<double> neg_s = [&] {
      std::vector<double> t(s_pts.size());
      for (std::size_t i = 0; i < t.size(); ++i) t[i] = s_cross - s_pts[s_pts.size() - 1 - i];
      return t;
    }();
    std::vector<double> v_rev(v_pts.rbegin(), v_pts.rend());
    std::vector<double> w_rev(w_pts.rbegin(), w_pts.rend());
    std::vector<double> wx_rev(w_rev.size());
    for (std::size_t i = 0; i < w_rev.size(); ++i) {
      wx_rev[i] = profile_rhs(v_rev[i], w_rev[i], params)[1];
    }
    const CubicHermite v_of_x(neg_s, v_rev, w_rev);
    const CubicHermite w_of_x(neg_s, w_rev, wx_rev);
    if (out.grid.empty() || out.grid.back() < L_plus) {
      out.grid.push_back(L_plus);
      out.v_hat.push_back(v_of_x(L_plus).value);
      out.w_hat.push_back(w_of_x(L_plus).value);
    }
  } else {
    // Stable linear decay from the seed out to L_plus.
    const double dv0 = v_pts.front() - params.v_plus;
    const int n = std::max(1, static_cast<int>(std::ceil((L_plus - x_start) / opt.max_step)));
    for (int j = 1; j <= n; ++j) {
      const double x = x_start + (L_plus - x_start) * j / n;
      const double e = std::exp(mu * (x - x_start));
      out.grid.push_back(x);
      out.v_hat.push_back(params.v_plus + dv0 * e);
      out.w_hat.push_back(mu * dv0 * e);
    }
  }
  out.finalize();
  return out;
}

}  // namespace capshock
