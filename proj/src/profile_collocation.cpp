// Lobatto IIIA collocation for the heteroclinic profile.
//
// Unknowns are stored interval by interval: node i, then the s-2 interior
// stages of interval i, then node i+1, ... so the Jacobian is banded.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "capshock/errors.hpp"
#include "capshock/profile.hpp"

namespace capshock {

namespace {

struct Lobatto {
  int s = 0;
  std::vector<double> c;
  Eigen::MatrixXd A;     // A(j,k) = int_0^{c_j} l_k
  Eigen::MatrixXd coef;  // l_k(t) = sum_j coef(j,k) t^j

  double basis(int k, double t) const {
    double acc = 0.0;
    for (int j = s - 1; j >= 0; --j) acc = acc * t + coef(j, k);
    return acc;
  }
  double basis_integral(int k, double t) const {
    double acc = 0.0;
    for (int j = s - 1; j >= 0; --j) acc = acc * t + coef(j, k) / (j + 1);
    return acc * t;
  }
};

Lobatto make_lobatto(int s) {
  Lobatto lob;
  lob.s = s;
  switch (s) {
    case 3:
      lob.c = {0.0, 0.5, 1.0};
      break;
    case 4:
      lob.c = {0.0, 0.5 - 0.5 / std::sqrt(5.0), 0.5 + 0.5 / std::sqrt(5.0), 1.0};
      break;
    case 5:
      lob.c = {0.0, 0.5 - 0.5 * std::sqrt(3.0 / 7.0), 0.5, 0.5 + 0.5 * std::sqrt(3.0 / 7.0), 1.0};
      break;
    default:
      throw DomainError("collocation supports 3, 4 or 5 Lobatto stages");
  }
  Eigen::MatrixXd V(s, s);
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < s; ++j) V(i, j) = std::pow(lob.c[i], j);
  }
  lob.coef = V.inverse();
  lob.A.resize(s, s);
  for (int j = 0; j < s; ++j) {
    for (int k = 0; k < s; ++k) lob.A(j, k) = lob.basis_integral(k, lob.c[j]);
  }
  return lob;
}

using Vec2 = Eigen::Vector2d;

class Collocation {
 public:
  Collocation(const GasParams& params, const Lobatto& lob, std::vector<double> nodes,
              std::size_t zero_index)
      : params_(params), lob_(lob), x_(std::move(nodes)), zero_(zero_index) {
    const auto lin = endpoint_linearization(params_.v_plus, params_);
    const double mu_stable = lin.eigenvalues[1].real();
    bc_row_ = Vec2(mu_stable, -1.0).normalized();
  }

  int stages() const { return lob_.s; }
  std::size_t nodes() const { return x_.size(); }
  const std::vector<double>& mesh() const { return x_; }
  std::size_t zero_index() const { return zero_; }
  const GasParams& params() const { return params_; }
  void set_params(const GasParams& p) { params_ = p; }

  Eigen::Index offset(std::size_t interval, int stage) const {
    return 2 * static_cast<Eigen::Index>(interval * (lob_.s - 1) + stage);
  }
  Eigen::Index size() const { return offset(x_.size() - 1, 0) + 2; }

  Vec2 state(const Eigen::VectorXd& z, std::size_t interval, int stage) const {
    return z.segment<2>(offset(interval, stage));
  }

  Vec2 rhs(const Vec2& y) const {
    const auto f = profile_rhs(y[0], y[1], params_);
    return {f[0], f[1]};
  }

  void residual(const Eigen::VectorXd& z, Eigen::VectorXd& F) const {
    const int s = lob_.s;
    F.resize(size());
    std::vector<Vec2> f(s);
    Eigen::Index row = 0;
    for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
      const double h = x_[i + 1] - x_[i];
      for (int k = 0; k < s; ++k) f[k] = rhs(state(z, i, k));
      const Vec2 y0 = state(z, i, 0);
      for (int j = 1; j < s; ++j) {
        Vec2 acc = state(z, i, j) - y0;
        for (int k = 0; k < s; ++k) acc -= h * lob_.A(j, k) * f[k];
        F.segment<2>(row) = acc;
        row += 2;
      }
    }
    const Vec2 y_zero = z.segment<2>(offset(zero_, 0));
    F[row++] = y_zero[0] - 0.5 * (params_.v_plus + params_.v_minus);
    const Vec2 y_end = z.segment<2>(offset(x_.size() - 1, 0));
    F[row++] = bc_row_.dot(y_end - Vec2(params_.v_plus, 0.0));
  }

  void jacobian(const Eigen::VectorXd& z, Eigen::SparseMatrix<double>& J) const {
    const int s = lob_.s;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(size()) * 2 * (s + 1));
    std::vector<Eigen::Matrix2d> jf(s);
    Eigen::Index row = 0;
    for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
      const double h = x_[i + 1] - x_[i];
      for (int k = 0; k < s; ++k) {
        const Vec2 y = state(z, i, k);
        jf[k] = profile_jacobian(y[0], y[1], params_);
      }
      for (int j = 1; j < s; ++j) {
        for (int k = 0; k < s; ++k) {
          Eigen::Matrix2d block = -h * lob_.A(j, k) * jf[k];
          if (k == j) block += Eigen::Matrix2d::Identity();
          if (k == 0) block -= Eigen::Matrix2d::Identity();
          const Eigen::Index col = offset(i, k);
          for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
              if (block(a, b) != 0.0) trip.emplace_back(row + a, col + b, block(a, b));
            }
          }
        }
        row += 2;
      }
    }
    trip.emplace_back(row++, offset(zero_, 0), 1.0);
    const Eigen::Index end = offset(x_.size() - 1, 0);
    trip.emplace_back(row, end, bc_row_[0]);
    trip.emplace_back(row, end + 1, bc_row_[1]);
    J.resize(size(), size());
    J.setFromTriplets(trip.begin(), trip.end());
  }

  /// Collocation polynomial and its derivative on interval i at local t.
  std::pair<Vec2, Vec2> dense(const Eigen::VectorXd& z, std::size_t i, double t) const {
    const int s = lob_.s;
    const double h = x_[i + 1] - x_[i];
    Vec2 u = state(z, i, 0);
    Vec2 du = Vec2::Zero();
    for (int k = 0; k < s; ++k) {
      const Vec2 fk = rhs(state(z, i, k));
      u += h * lob_.basis_integral(k, t) * fk;
      du += lob_.basis(k, t) * fk;
    }
    return {u, du};
  }

  /// max |u' - f(u)| between the collocation points of every interval.
  std::vector<double> interval_residuals(const Eigen::VectorXd& z) const {
    std::vector<double> out(x_.size() - 1, 0.0);
    for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
      for (int m = 0; m + 1 < lob_.s; ++m) {
        const double t = 0.5 * (lob_.c[m] + lob_.c[m + 1]);
        const auto [u, du] = dense(z, i, t);
        if (!(u[0] > 0.0)) {
          out[i] = std::numeric_limits<double>::infinity();
          continue;
        }
        out[i] = std::max(out[i], (du - rhs(u)).lpNorm<Eigen::Infinity>());
      }
    }
    return out;
  }

  bool positive(const Eigen::VectorXd& z) const {
    for (Eigen::Index k = 0; k < z.size(); k += 2) {
      if (!(z[k] > 0.0)) return false;
    }
    return true;
  }

 private:
  GasParams params_;
  const Lobatto& lob_;
  std::vector<double> x_;
  std::size_t zero_;
  Vec2 bc_row_;
};

struct NewtonResult {
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
};

NewtonResult newton(const Collocation& problem, Eigen::VectorXd& z, int max_iterations) {
  NewtonResult result;
  Eigen::VectorXd F, F_trial, dz, z_trial;
  Eigen::SparseMatrix<double> J;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;
  problem.residual(z, F);
  for (int it = 0; it < max_iterations; ++it) {
    result.iterations = it + 1;
    problem.jacobian(z, J);
    if (!analyzed) {
      lu.analyzePattern(J);
      analyzed = true;
    }
    lu.factorize(J);
    if (lu.info() != Eigen::Success) return result;
    dz = lu.solve(-F);
    if (!dz.allFinite()) return result;

    const double norm0 = F.norm();
    double step = 1.0;
    bool accepted = false;
    while (step > 1e-6) {
      z_trial = z + step * dz;
      if (problem.positive(z_trial)) {
        problem.residual(z_trial, F_trial);
        if (F_trial.allFinite() && F_trial.norm() <= (1.0 - 1e-4 * step) * norm0) {
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) {
      // At rounding level the merit function can stall while the iterate is converged.
      result.residual = F.lpNorm<Eigen::Infinity>();
      result.converged = result.residual < 1e-11 && (step * dz).lpNorm<Eigen::Infinity>() < 1e-10;
      return result;
    }
    z.swap(z_trial);
    F.swap(F_trial);
    const double update = (step * dz).lpNorm<Eigen::Infinity>();
    result.residual = F.lpNorm<Eigen::Infinity>();
    if (step == 1.0 && update < 1e-12 * (1.0 + z.lpNorm<Eigen::Infinity>()) &&
        result.residual < 1e-10) {
      result.converged = true;
      return result;
    }
    if (result.residual < 1e-14) {
      result.converged = true;
      return result;
    }
  }
  return result;
}

std::vector<double> uniform_mesh(double L_minus, double L_plus, int points, std::size_t* zero) {
  const double span = L_plus - L_minus;
  const int left = std::max(2, static_cast<int>(std::lround(points * (-L_minus) / span)));
  const int right = std::max(2, points - left);
  std::vector<double> x;
  x.reserve(left + right + 1);
  for (int i = 0; i < left; ++i) x.push_back(L_minus + (-L_minus) * i / left);
  *zero = x.size();
  for (int i = 0; i <= right; ++i) x.push_back(L_plus * i / right);
  return x;
}

/// Fills z from a guess function y(x) at every node and interior stage.
template <class Guess>
Eigen::VectorXd sample_guess(const Collocation& problem, const Lobatto& lob, Guess&& guess) {
  Eigen::VectorXd z(problem.size());
  const auto& x = problem.mesh();
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double h = x[i + 1] - x[i];
    for (int k = 0; k + 1 < lob.s; ++k) z.segment<2>(problem.offset(i, k)) = guess(x[i] + lob.c[k] * h);
  }
  z.segment<2>(problem.offset(x.size() - 1, 0)) = guess(x.back());
  return z;
}

/// Evaluates a converged solution at arbitrary x (inside its mesh).
class DenseSolution {
 public:
  DenseSolution(const Collocation& problem, const Eigen::VectorXd& z) : problem_(problem), z_(z) {}
  Vec2 operator()(double xi) const {
    const auto& x = problem_.mesh();
    auto it = std::upper_bound(x.begin(), x.end(), xi);
    std::size_t i = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
    i = std::min(i, x.size() - 2);
    const double t = (xi - x[i]) / (x[i + 1] - x[i]);
    return problem_.dense(z_, i, std::clamp(t, 0.0, 1.0)).first;
  }

 private:
  const Collocation& problem_;
  const Eigen::VectorXd& z_;
};

struct State {
  std::vector<double> mesh;
  std::size_t zero = 0;
  Eigen::VectorXd z;
  int newton_iterations = 0;
  int refinements = 0;
  double residual = 0.0;
};

std::string describe_failure(const char* what, const GasParams& p, double L_minus, double L_plus) {
  std::ostringstream os;
  os << what << " (gamma=" << p.gamma << ", v_plus=" << p.v_plus << ", d=" << p.d
     << ", L=[" << L_minus << ", " << L_plus << "])";
  return os.str();
}

bool try_newton(const GasParams& p, const Lobatto& lob, State& st, int max_iterations) {
  Collocation problem(p, lob, st.mesh, st.zero);
  Eigen::VectorXd z = st.z;
  const NewtonResult r = newton(problem, z, max_iterations);
  st.newton_iterations += r.iterations;
  if (!r.converged) return false;
  st.z = std::move(z);
  return true;
}

/// Newton from the current guess; on failure, geometric continuation in d.
void converge(const GasParams& target, const Lobatto& lob, State& st, int max_iterations) {
  if (try_newton(target, lob, st, max_iterations)) return;
  const Eigen::VectorXd initial = st.z;
  GasParams p = target;
  int halvings = 0;
  for (;;) {
    if (++halvings > 16) {
      throw NumericError(describe_failure("profile Newton iteration failed to converge", target,
                                          st.mesh.front(), st.mesh.back()));
    }
    p.d *= 0.5;
    st.z = initial;
    if (try_newton(p, lob, st, max_iterations)) break;
  }
  double factor = 2.0;
  while (p.d < target.d) {
    GasParams next = p;
    next.d = std::min(target.d, p.d * factor);
    State trial = st;
    if (try_newton(next, lob, trial, max_iterations)) {
      st = std::move(trial);
      p = next;
      factor = std::min(factor * 1.5, 4.0);
    } else {
      st.newton_iterations = trial.newton_iterations;
      factor = std::sqrt(factor);
      if (factor < 1.001) {
        throw NumericError(describe_failure("profile continuation in d stalled", target,
                                            st.mesh.front(), st.mesh.back()));
      }
    }
  }
}

/// Residual-driven refinement until every interval meets tol.
void refine(const GasParams& p, const Lobatto& lob, State& st, const MeshOptions& opt) {
  for (int pass = 0; pass < 40; ++pass) {
    Collocation problem(p, lob, st.mesh, st.zero);
    const auto res = problem.interval_residuals(st.z);
    st.residual = *std::max_element(res.begin(), res.end());
    if (st.residual <= opt.residual_tol) return;

    std::vector<double> mesh;
    mesh.reserve(st.mesh.size() * 2);
    std::size_t zero = 0;
    for (std::size_t i = 0; i + 1 < st.mesh.size(); ++i) {
      if (i == st.zero) zero = mesh.size();
      mesh.push_back(st.mesh[i]);
      if (res[i] > opt.residual_tol) {
        const double ratio = std::isfinite(res[i]) ? res[i] / opt.residual_tol : 1e12;
        const int pieces = std::clamp(
            static_cast<int>(std::ceil(std::pow(1.5 * ratio, 1.0 / lob.s))), 2, 8);
        const double h = st.mesh[i + 1] - st.mesh[i];
        for (int k = 1; k < pieces; ++k) mesh.push_back(st.mesh[i] + h * k / pieces);
      }
    }
    if (st.zero == st.mesh.size() - 1) zero = mesh.size();
    mesh.push_back(st.mesh.back());
    if (static_cast<int>(mesh.size()) - 1 > opt.max_intervals) {
      throw NumericError(describe_failure("profile mesh refinement exceeded max_intervals", p,
                                          mesh.front(), mesh.back()));
    }

    const DenseSolution old(problem, st.z);
    State next;
    next.mesh = std::move(mesh);
    next.zero = zero;
    Collocation refined(p, lob, next.mesh, next.zero);
    next.z = sample_guess(refined, lob, old);
    next.newton_iterations = st.newton_iterations;
    next.refinements = st.refinements + 1;
    converge(p, lob, next, opt.max_newton_iterations);
    st = std::move(next);
  }
  throw NumericError(describe_failure("profile mesh refinement did not reach residual tolerance",
                                      p, st.mesh.front(), st.mesh.back()));
}

/// Doubles the domain on the requested sides, continuing the solution with
/// the end-state linearizations.
void enlarge(const GasParams& p, const Lobatto& lob, State& st, bool left, bool right) {
  Collocation problem(p, lob, st.mesh, st.zero);
  const DenseSolution old(problem, st.z);
  const double L0 = st.mesh.front();
  const double L1 = st.mesh.back();
  const Vec2 y_left = old(L0);
  const Vec2 y_right = old(L1);
  const Vec2 eq_left(p.v_minus, 0.0);
  const Vec2 eq_right(p.v_plus, 0.0);
  const Eigen::Matrix2d J_left = endpoint_linearization(p.v_minus, p).J;
  // Only the stable mode may be continued to the right: exp(J t) would amplify
  // the rounding-level unstable component of the end state.
  const double mu_stable = endpoint_linearization(p.v_plus, p).eigenvalues[1].real();

  std::vector<double> mesh;
  std::size_t zero = st.zero;
  if (left) {
    const double new_L = 2.0 * L0;
    const double h = std::max(st.mesh[1] - st.mesh[0], (L0 - new_L) / 200.0);
    const int n = static_cast<int>(std::ceil((L0 - new_L) / h));
    for (int k = 0; k < n; ++k) mesh.push_back(new_L + (L0 - new_L) * k / n);
    zero += mesh.size();
  }
  mesh.insert(mesh.end(), st.mesh.begin(), st.mesh.end());
  if (right) {
    const double new_L = 2.0 * L1;
    const std::size_t m = st.mesh.size();
    const double h = std::max(st.mesh[m - 1] - st.mesh[m - 2], (new_L - L1) / 200.0);
    const int n = static_cast<int>(std::ceil((new_L - L1) / h));
    for (int k = 1; k <= n; ++k) mesh.push_back(L1 + (new_L - L1) * k / n);
  }

  auto guess = [&](double xi) -> Vec2 {
    if (xi < L0) return eq_left + expm2(J_left, xi - L0) * (y_left - eq_left);
    if (xi > L1) {
      const double dv = (y_right[0] - eq_right[0]) * std::exp(mu_stable * (xi - L1));
      return eq_right + Vec2(dv, mu_stable * dv);
    }
    return old(xi);
  };
  State next;
  next.mesh = std::move(mesh);
  next.zero = zero;
  Collocation grown(p, lob, next.mesh, next.zero);
  next.z = sample_guess(grown, lob, guess);
  next.newton_iterations = st.newton_iterations;
  next.refinements = st.refinements;
  st = std::move(next);
}

}  // namespace

ProfileSolution solve_profile(const GasParams& params, const MeshOptions& opt) {
  if (!(opt.L_minus < 0.0 && opt.L_plus > 0.0)) {
    throw DomainError("solve_profile needs L_minus < 0 < L_plus");
  }
  if (opt.initial_points < 8) throw DomainError("solve_profile needs at least 8 initial points");
  const Lobatto lob = make_lobatto(opt.stages);

  State st;
  st.mesh = uniform_mesh(opt.L_minus, opt.L_plus, opt.initial_points, &st.zero);
  {
    // tanh ramp between the end states with the zero-capillarity width 2/epsilon
    const double mid = 0.5 * (params.v_plus + params.v_minus);
    const double half = 0.5 * params.epsilon;
    const double width = 2.0 / params.epsilon;
    Collocation problem(params, lob, st.mesh, st.zero);
    st.z = sample_guess(problem, lob, [&](double x) {
      const double t = std::tanh(x / width);
      return Vec2(mid - half * t, -half * (1.0 - t * t) / width);
    });
  }
  converge(params, lob, st, opt.max_newton_iterations);

  for (;;) {
    refine(params, lob, st, opt);
    Collocation problem(params, lob, st.mesh, st.zero);
    const double left_err =
        std::abs(problem.state(st.z, 0, 0)[0] - params.v_minus);
    const double right_err =
        std::abs(st.z[problem.offset(st.mesh.size() - 1, 0)] - params.v_plus);
    const bool left_bad = left_err > opt.endpoint_tol;
    const bool right_bad = right_err > opt.endpoint_tol;
    if (!left_bad && !right_bad) break;

    const bool can_left = !left_bad || 2.0 * -st.mesh.front() <= opt.max_L;
    const bool can_right = !right_bad || 2.0 * st.mesh.back() <= opt.max_L;
    if (!opt.auto_enlarge || !can_left || !can_right) {
      std::ostringstream os;
      os << describe_failure("profile endpoint errors above tolerance; enlarge L", params,
                             st.mesh.front(), st.mesh.back())
         << ": |v(L-)-v_minus|=" << left_err << ", |v(L+)-v_plus|=" << right_err;
      throw TruncationError(os.str(), left_err, right_err);
    }
    enlarge(params, lob, st, left_bad, right_bad);
    converge(params, lob, st, opt.max_newton_iterations);
  }

  Collocation problem(params, lob, st.mesh, st.zero);
  ProfileSolution out;
  out.params = params;
  const std::size_t n = st.mesh.size();
  out.grid.reserve((n - 1) * (lob.s - 1) + 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = st.mesh[i + 1] - st.mesh[i];
    for (int k = 0; k + 1 < lob.s; ++k) {
      const Vec2 y = problem.state(st.z, i, k);
      out.grid.push_back(st.mesh[i] + lob.c[k] * h);
      out.v_hat.push_back(y[0]);
      out.w_hat.push_back(y[1]);
    }
  }
  const Vec2 y_end = problem.state(st.z, n - 1, 0);
  out.grid.push_back(st.mesh.back());
  out.v_hat.push_back(y_end[0]);
  out.w_hat.push_back(y_end[1]);
  out.residual_norm = st.residual;
  out.newton_iterations = st.newton_iterations;
  out.refinements = st.refinements;
  out.finalize();
  return out;
}

}  // namespace capshock
