#include "capshock/kato.hpp"

#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "capshock/detail/integrate.hpp"
#include "capshock/errors.hpp"

namespace capshock {

namespace {

using cd = std::complex<double>;

void require_gap(const SpectralData& s, double gap_tol, cd lambda) {
  if (!(s.gap >= gap_tol)) {
    std::ostringstream os;
    os << "tracked eigenvalue " << s.eigenvalue << " is not simple at lambda=" << lambda
       << " (gap " << s.gap << ")";
    throw DegeneracyError(os.str(), lambda);
  }
}

Eigen::MatrixXcd projector(const SpectralData& s) { return s.right * s.left.transpose(); }

}  // namespace

namespace {

template <class Score>
SpectralData select(const Eigen::MatrixXcd& M, Score&& score) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M);
  if (es.info() != Eigen::Success) throw NumericError("complex eigensolver failed");
  const auto& ev = es.eigenvalues();
  const Eigen::MatrixXcd inv = es.eigenvectors().partialPivLu().inverse();
  Eigen::Index k = 0;
  double best = score(ev[0], es.eigenvectors().col(0), inv.row(0));
  for (Eigen::Index i = 1; i < ev.size(); ++i) {
    const double si = score(ev[i], es.eigenvectors().col(i), inv.row(i));
    if (si < best) {
      best = si;
      k = i;
    }
  }
  SpectralData out;
  out.eigenvalue = ev[k];
  out.gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (i != k) out.gap = std::min(out.gap, std::abs(ev[i] - ev[k]));
  }
  out.right = es.eigenvectors().col(k);
  out.left = inv.row(k).transpose();
  return out;
}

}  // namespace

SpectralData spectral_data(const Eigen::MatrixXcd& M, cd target) {
  return select(M, [&](cd mu, const auto&, const auto&) { return std::abs(mu - target); });
}

SpectralData spectral_data(const Eigen::MatrixXcd& M, const Eigen::VectorXcd& near) {
  // component of `near` along each eigenvector: (left_k^T near) right_k
  return select(M, [&](cd, const auto& right, const auto& left) {
    return -std::abs((left * near).value()) * right.norm();
  });
}

std::vector<Eigen::VectorXcd> kato_transport(const AffineFamily& family,
                                             std::span<const cd> path,
                                             const Eigen::VectorXcd& r0,
                                             const KatoOptions& opt) {
  const Eigen::Index n = family.base.rows();
  if (family.base.cols() != n || family.slope.rows() != n || family.slope.cols() != n ||
      r0.size() != n) {
    throw DomainError("kato_transport: family and start vector dimensions differ");
  }
  std::vector<Eigen::VectorXcd> out;
  if (path.empty()) return out;
  out.reserve(path.size());

  // Eigenvalue at the start: the one whose right eigenvector r0 is.
  const Eigen::MatrixXcd M0 = family.at(path[0]);
  SpectralData tracked = spectral_data(M0, r0);
  require_gap(tracked, opt.gap_tol, path[0]);
  out.push_back(r0);

  if (opt.scheme == KatoScheme::ProjectorUpdate) {
    Eigen::VectorXcd r = projector(tracked) * r0;
    const int sub = std::max(1, opt.substeps);
    for (std::size_t j = 1; j < path.size(); ++j) {
      for (int k = 1; k <= sub; ++k) {
        const cd lambda = path[j - 1] + (path[j] - path[j - 1]) * (double(k) / sub);
        const SpectralData next = spectral_data(family.at(lambda), r);
        require_gap(next, opt.gap_tol, lambda);
        const Eigen::MatrixXcd P = projector(tracked);
        const Eigen::MatrixXcd Pn = projector(next);
        r = Pn * (r + P * (r - Pn * r));
        tracked = next;
      }
      out.push_back(r);
    }
    return out;
  }

  // r' = -S(lambda) M'(lambda) r, with S the reduced resolvent, from the
  // bordered system [[M - mu, r], [l^T, 0]] [y; c] = [M' r; 0].
  using State = std::vector<cd>;
  Eigen::VectorXcd r = r0;
  for (std::size_t j = 1; j < path.size(); ++j) {
    const cd a = path[j - 1];
    const cd chord = path[j] - a;
    if (chord == cd(0.0)) {
      out.push_back(r);
      continue;
    }
    const Eigen::MatrixXcd dM = family.slope * chord;
    auto system = [&](const State& y, State& dy, double t) {
      const cd lambda = a + t * chord;
      const Eigen::Map<const Eigen::VectorXcd> rv(y.data(), n);
      const SpectralData s = spectral_data(family.at(lambda), Eigen::VectorXcd(rv));
      require_gap(s, opt.gap_tol, lambda);
      Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(n + 1, n + 1);
      B.topLeftCorner(n, n) = family.at(lambda) - s.eigenvalue * Eigen::MatrixXcd::Identity(n, n);
      B.topRightCorner(n, 1) = rv;
      B.bottomLeftCorner(1, n) = s.left.transpose();
      Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n + 1);
      rhs.head(n) = dM * rv;
      const Eigen::VectorXcd sol = B.partialPivLu().solve(rhs);
      dy.resize(n);
      for (Eigen::Index i = 0; i < n; ++i) dy[i] = -sol[i];
    };
    State y(r.data(), r.data() + n);
    detail::integrate_dopri(system, y, 0.0, 1.0, opt.abs_tol, opt.rel_tol, 0.0,
                            [](const State&, double) { return true; });
    r = Eigen::Map<const Eigen::VectorXcd>(y.data(), n);
    tracked = spectral_data(family.at(path[j]), r);
    require_gap(tracked, opt.gap_tol, path[j]);
    out.push_back(r);
  }
  return out;
}

}  // namespace capshock
