#include "capshock/evans.hpp"

#include <algorithm>
#include <map>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include <Eigen/Eigenvalues>

#include "capshock/errors.hpp"

namespace capshock {

namespace {

using State = std::array<cdouble, 6>;

EndSpectrum end_spectrum(const Matrix4c& A) {
  Eigen::ComplexEigenSolver<Matrix4c> es(A);
  if (es.info() != Eigen::Success) throw NumericError("end-state eigensolver failed");
  std::array<int, 4> order{0, 1, 2, 3};
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    return es.eigenvalues()[i].real() > es.eigenvalues()[j].real();
  });
  EndSpectrum out;
  for (int k = 0; k < 4; ++k) {
    out.eigenvalues[k] = es.eigenvalues()[order[k]];
    out.eigenvectors[k] = es.eigenvectors().col(order[k]);
  }
  return out;
}

/// Gap of the sum mu1 + mu2 (or mu3 + mu4) from the other pair sums: the
/// real-part margin Re(mu2 - mu3) and the plain distance to every other sum.
double pair_gap(const EndSpectrum& s) {
  const auto& m = s.eigenvalues;
  double gap = m[1].real() - m[2].real();
  const cdouble top = m[0] + m[1];
  const cdouble bottom = m[2] + m[3];
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      const cdouble sum = m[i] + m[j];
      if (!(i == 0 && j == 1)) gap = std::min(gap, std::abs(sum - top));
      if (!(i == 2 && j == 3)) gap = std::min(gap, std::abs(sum - bottom));
    }
  }
  return gap;
}

Vector6c real_normalized(Vector6c v) {
  Eigen::Index k = 0;
  v.cwiseAbs().maxCoeff(&k);
  v *= std::conj(v[k]) / std::abs(v[k]);
  for (Eigen::Index i = 0; i < 6; ++i) v[i] = v[i].real();
  return v / v.norm();
}

AffineFamily affine(const std::function<Matrix6c(cdouble)>& f) {
  AffineFamily fam;
  const Matrix6c m0 = f(0.0);
  fam.base = m0;
  fam.slope = f(1.0) - m0;
  return fam;
}

double norm(const State& y) {
  double s = 0.0;
  for (const auto& c : y) s += std::norm(c);
  return std::sqrt(s);
}

void check_eigenvector(const Matrix6c& M, cdouble mu, const Vector6c& r, const char* which,
                       cdouble lambda) {
  const double res = (M * r - mu * r).norm();
  const double scale = (M.norm() + std::abs(mu)) * r.norm();
  if (!(res <= 1e-6 * scale)) {
    std::ostringstream os;
    os << which << " is not an eigenvector of its end-state matrix at lambda=" << lambda
       << " (relative residual " << res / scale << ")";
    throw ConsistencyError(os.str());
  }
}

}  // namespace

cdouble evans_h(double v, double v_x, cdouble lambda, const GasParams& params) {
  return 1.0 + params.a * pressure(v, params.gamma).dp + v_x / (v * v) - lambda / v;
}

Matrix4c evans_matrix(double v, double v_x, cdouble lambda, const GasParams& params) {
  const double d = params.d;
  const cdouble h = evans_h(v, v_x, lambda, params);
  Matrix4c A = Matrix4c::Zero();
  A(0, 1) = lambda;
  A(0, 2) = 1.0;
  A(1, 2) = 1.0;
  A(2, 3) = 1.0;
  A(3, 0) = -lambda / d;
  A(3, 1) = -lambda / d;
  A(3, 2) = -h / d;
  A(3, 3) = 1.0 / (d * v);
  return A;
}

EvansSystem::EvansSystem(std::shared_ptr<const ProfileSolution> profile, EvansOptions options)
    : profile_(std::move(profile)), options_(options) {
  if (!profile_) throw DomainError("EvansSystem needs a profile");
}

EvansSystem::EvansSystem(const ProfileSolution& profile, EvansOptions options)
    : EvansSystem(std::make_shared<const ProfileSolution>(profile), options) {}

Matrix4c EvansSystem::A(double x, cdouble lambda) const {
  const auto p = profile_->at(x);
  return evans_matrix(p.v, p.w, lambda, params());
}

Matrix4c EvansSystem::A_minus(cdouble lambda) const {
  return evans_matrix(params().v_minus, 0.0, lambda, params());
}

Matrix4c EvansSystem::A_plus(cdouble lambda) const {
  return evans_matrix(params().v_plus, 0.0, lambda, params());
}

Splitting EvansSystem::splitting(cdouble lambda) const {
  Splitting s;
  // The end-state matrices are real polynomials in lambda, so the spectrum in
  // the lower half-plane is taken as the conjugate of the upper one. This keeps
  // evaluate() exactly equivariant under conjugation.
  const bool lower = lambda.imag() < 0.0;
  const cdouble mirror = lower ? std::conj(lambda) : lambda;
  s.minus = end_spectrum(A_minus(mirror));
  s.plus = end_spectrum(A_plus(mirror));
  if (lower) {
    for (EndSpectrum* e : {&s.minus, &s.plus}) {
      for (int i = 0; i < 4; ++i) {
        e->eigenvalues[i] = std::conj(e->eigenvalues[i]);
        e->eigenvectors[i] = e->eigenvectors[i].conjugate();
      }
    }
  }
  auto count = [](const EndSpectrum& e, bool positive) {
    int n = 0;
    for (const auto& m : e.eigenvalues) n += positive ? (m.real() > 0.0) : (m.real() < 0.0);
    return n;
  };
  const int unstable_minus = count(s.minus, true);
  const int stable_plus = count(s.plus, false);
  if (unstable_minus != 2 || stable_plus != 2) {
    std::ostringstream os;
    os << "consistent splitting fails at lambda=" << lambda << ": " << unstable_minus
       << " unstable modes at x=-inf, " << stable_plus << " stable modes at x=+inf";
    throw DegeneracyError(os.str(), lambda);
  }
  s.gap_minus = pair_gap(s.minus);
  s.gap_plus = pair_gap(s.plus);
  if (!(s.gap_minus >= options_.gap_tol) || !(s.gap_plus >= options_.gap_tol)) {
    std::ostringstream os;
    os << "dominant end-state modes are not simple at lambda=" << lambda << " (gaps "
       << s.gap_minus << ", " << s.gap_plus << ")";
    throw DegeneracyError(os.str(), lambda);
  }
  return s;
}

DominantModes EvansSystem::dominant_modes(cdouble lambda) const {
  const Splitting s = splitting(lambda);
  const auto& m = s.minus;
  const auto& p = s.plus;
  DominantModes out;
  out.mu_minus = m.eigenvalues[0] + m.eigenvalues[1];
  out.r_minus = wedge(m.eigenvectors[0], m.eigenvectors[1]);
  out.mu_plus = p.eigenvalues[2] + p.eigenvalues[3];
  out.r_plus = wedge(p.eigenvectors[2], p.eigenvectors[3]);
  out.mu_tilde_plus = -(p.eigenvalues[0] + p.eigenvalues[1]);
  out.r_tilde_plus = wedge_pairing().cast<cdouble>() * out.r_plus;
  out.gap_minus = s.gap_minus;
  out.gap_plus = s.gap_plus;
  return out;
}

std::vector<ModeVectors> EvansSystem::transport(const ModeVectors& start,
                                                std::span<const cdouble> path) const {
  KatoOptions kopt = options_.kato;
  kopt.gap_tol = options_.gap_tol;
  auto family_minus = affine([&](cdouble l) { return lift_exterior(A_minus(l)); });
  auto family_plus = affine([&](cdouble l) { return lift_exterior(A_plus(l)); });
  AffineFamily family_adjoint{family_plus.base.transpose(), family_plus.slope.transpose()};

  const auto rm = kato_transport(family_minus, path, start.r_minus, kopt);
  const auto rt = kato_transport(family_adjoint, path, start.r_tilde_plus, kopt);
  const auto rp = kato_transport(family_plus, path, start.r_plus, kopt);
  std::vector<ModeVectors> out(path.size());
  for (std::size_t j = 0; j < path.size(); ++j) out[j] = {rm[j], rt[j], rp[j]};
  return out;
}

std::vector<ModeVectors> EvansSystem::analytic_modes(std::span<const cdouble> path) const {
  const cdouble base(options_.kato_base, 0.0);
  // Points whose mirror image was already visited reuse its vectors, so a
  // closed contour is not traversed twice.
  std::vector<cdouble> upper{base};
  std::vector<std::size_t> index(path.size());
  std::map<std::pair<double, double>, std::size_t> seen;
  for (std::size_t j = 0; j < path.size(); ++j) {
    const cdouble l = path[j].imag() < 0.0 ? std::conj(path[j]) : path[j];
    const auto [it, fresh] = seen.try_emplace({l.real(), l.imag()}, upper.size());
    if (fresh) upper.push_back(l);
    index[j] = it->second;
  }

  const DominantModes start = dominant_modes(base);
  const auto modes = transport({real_normalized(start.r_minus), real_normalized(start.r_tilde_plus),
                                real_normalized(start.r_plus)},
                               upper);

  std::vector<ModeVectors> out(path.size());
  for (std::size_t j = 0; j < path.size(); ++j) {
    const ModeVectors& m = modes[index[j]];
    if (path[j].imag() < 0.0) {
      out[j] = {m.r_minus.conjugate(), m.r_tilde_plus.conjugate(), m.r_plus.conjugate()};
    } else {
      out[j] = m;
    }
  }
  return out;
}

ModeVectors EvansSystem::transport_modes(cdouble from, const ModeVectors& at_from,
                                         cdouble to) const {
  const std::array<cdouble, 2> path{from, to};
  return transport(at_from, path).back();
}

ModeVectors EvansSystem::analytic_modes(cdouble lambda) const {
  return analytic_modes(std::span<const cdouble>(&lambda, 1)).front();
}

namespace {

template <class Rhs>
State integrate_guarded(Rhs&& rhs, const Vector6c& r, double t0, double t1,
                        const EvansOptions& opt, IntegrationStats* stats, const char* what) {
  State y;
  for (int i = 0; i < 6; ++i) y[i] = r[i];
  const double n0 = norm(y);
  if (!(n0 > 0.0)) throw DomainError(std::string(what) + ": zero initial vector");
  double lo = 1.0, hi = 1.0;
  auto guard = [&](const State& u, double t) {
    const double ratio = norm(u) / n0;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    if (!(ratio >= opt.norm_floor && ratio <= opt.norm_ceiling)) {
      std::ostringstream os;
      os << what << ": rescaled solution norm ratio " << ratio << " left ["
         << opt.norm_floor << ", " << opt.norm_ceiling << "] at t=" << t;
      throw RescalingError(os.str());
    }
    return true;
  };
  IntegrationStats s =
      detail::integrate_dopri(rhs, y, t0, t1, opt.abs_tol, opt.rel_tol, opt.max_step, guard);
  s.min_norm_ratio = lo;
  s.max_norm_ratio = hi;
  if (stats != nullptr) *stats = s;
  return y;
}

Vector6c to_vector(const State& y) {
  Vector6c v;
  for (int i = 0; i < 6; ++i) v[i] = y[i];
  return v;
}

}  // namespace

Vector6c EvansSystem::evolve_unstable(cdouble lambda, cdouble mu, const Vector6c& r,
                                      IntegrationStats* stats) const {
  std::size_t hint = 0;
  const double kappa = options_.trace_rescaling ? 1.0 : 0.0;
  const double tr_end = 1.0 / (params().d * params().v_minus);
  auto rhs = [&](const State& y, State& dy, double x) {
    const auto p = profile_->at(x, &hint);
    Matrix6c M = lift_exterior(evans_matrix(p.v, p.w, lambda, params()));
    M.diagonal().array() -= mu + kappa * (1.0 / (params().d * p.v) - tr_end);
    const Vector6c out = M * Eigen::Map<const Vector6c>(y.data());
    for (int i = 0; i < 6; ++i) dy[i] = out[i];
  };
  return to_vector(integrate_guarded(rhs, r, profile_->L_minus(), 0.0, options_, stats,
                                     "unstable 2-form"));
}

Vector6c EvansSystem::evolve_adjoint(cdouble lambda, cdouble mu_tilde, const Vector6c& r,
                                     IntegrationStats* stats) const {
  // s = -x; dZ/ds = (A2^T + mu_tilde) Z
  std::size_t hint = profile_->grid.size() - 2;
  const double kappa = options_.trace_rescaling ? 1.0 : 0.0;
  const double tr_end = 1.0 / (params().d * params().v_plus);
  auto rhs = [&](const State& y, State& dy, double s) {
    const auto p = profile_->at(-s, &hint);
    Matrix6c M = lift_exterior(evans_matrix(p.v, p.w, lambda, params())).transpose();
    M.diagonal().array() += mu_tilde - kappa * (1.0 / (params().d * p.v) - tr_end);
    const Vector6c out = M * Eigen::Map<const Vector6c>(y.data());
    for (int i = 0; i < 6; ++i) dy[i] = out[i];
  };
  return to_vector(integrate_guarded(rhs, r, -profile_->L_plus(), 0.0, options_, stats,
                                     "adjoint 2-form"));
}

Vector6c EvansSystem::evolve_stable(cdouble lambda, cdouble mu, const Vector6c& r,
                                    IntegrationStats* stats) const {
  std::size_t hint = profile_->grid.size() - 2;
  auto rhs = [&](const State& y, State& dy, double s) {
    const auto p = profile_->at(-s, &hint);
    Matrix6c M = lift_exterior(evans_matrix(p.v, p.w, lambda, params()));
    M.diagonal().array() -= mu;
    const Vector6c out = -(M * Eigen::Map<const Vector6c>(y.data()));
    for (int i = 0; i < 6; ++i) dy[i] = out[i];
  };
  return to_vector(integrate_guarded(rhs, r, -profile_->L_plus(), 0.0, options_, stats,
                                     "stable 2-form"));
}

EvansEvaluation EvansSystem::evaluate(cdouble lambda, const ModeVectors& modes) const {
  const DominantModes dm = dominant_modes(lambda);
  check_eigenvector(lift_exterior(A_minus(lambda)), dm.mu_minus, modes.r_minus, "r_minus",
                    lambda);
  check_eigenvector(lift_exterior(A_plus(lambda)).transpose(), -dm.mu_tilde_plus,
                    modes.r_tilde_plus, "r_tilde_plus", lambda);
  EvansEvaluation out;
  out.lambda = lambda;
  out.W_minus_at_0 = evolve_unstable(lambda, dm.mu_minus, modes.r_minus, &out.minus_stats);
  out.W_tilde_plus_at_0 =
      evolve_adjoint(lambda, dm.mu_tilde_plus, modes.r_tilde_plus, &out.plus_stats);
  out.value = out.W_tilde_plus_at_0.transpose() * out.W_minus_at_0;
  return out;
}

EvansEvaluation EvansSystem::evaluate(cdouble lambda) const {
  return evaluate(lambda, analytic_modes(lambda));
}

cdouble EvansSystem::evaluate_forward(cdouble lambda, const ModeVectors& modes) const {
  const DominantModes dm = dominant_modes(lambda);
  check_eigenvector(lift_exterior(A_plus(lambda)), dm.mu_plus, modes.r_plus, "r_plus", lambda);
  const Vector6c wm = evolve_unstable(lambda, dm.mu_minus, modes.r_minus);
  const Vector6c wp = evolve_stable(lambda, dm.mu_plus, modes.r_plus);
  return wm.transpose() * wedge_pairing().cast<cdouble>() * wp;
}

std::vector<EvansEvaluation> EvansSystem::evaluate_batch(std::span<const cdouble> lambdas,
                                                         std::span<const ModeVectors> modes,
                                                         int jobs) const {
  if (lambdas.size() != modes.size()) {
    throw DomainError("evaluate_batch: lambdas and modes differ in length");
  }
  std::vector<EvansEvaluation> out(lambdas.size());
  parallel_for(lambdas.size(), jobs, [&](std::size_t i) { out[i] = evaluate(lambdas[i], modes[i]); });
  return out;
}

RealAxisScan EvansSystem::real_axis_scan(double R, int n, int jobs) const {
  if (!(R > 0.0) || n < 1) throw DomainError("real_axis_scan needs R > 0 and n >= 1");
  RealAxisScan scan;
  scan.lambdas.resize(n);
  for (int k = 1; k <= n; ++k) {
    scan.lambdas[k - 1] = 0.5 * R * (1.0 - std::cos(std::numbers::pi * k / n));
  }
  // Transport from the top down so each chord is short.
  std::vector<cdouble> path(scan.lambdas.rbegin(), scan.lambdas.rend());
  auto modes = analytic_modes(path);
  std::reverse(modes.begin(), modes.end());
  std::reverse(path.begin(), path.end());
  const auto evals = evaluate_batch(path, modes, jobs);
  scan.values.reserve(n);
  scan.min_abs = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    const cdouble D = evals[k].value;
    scan.values.push_back(D);
    if (std::abs(D) < scan.min_abs) {
      scan.min_abs = std::abs(D);
      scan.min_abs_lambda = scan.lambdas[k];
    }
    scan.max_imag_ratio = std::max(scan.max_imag_ratio, std::abs(D.imag()) / std::abs(D));
    if (k > 0 && (D.real() < 0.0) != (scan.values[k - 1].real() < 0.0)) ++scan.sign_changes;
  }
  return scan;
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, std::max(1, jobs));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex mu;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace capshock
