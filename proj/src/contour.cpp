#include "capshock/contour.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <utility>

#include "capshock/errors.hpp"

namespace capshock {

namespace {

constexpr double kPi = std::numbers::pi;

double increment(cdouble from, cdouble to) { return std::arg(to * std::conj(from)); }

void require_nonzero(const ContourSample& sample) {
  if (!(std::abs(sample.value) >= kNearZeroThreshold)) {
    std::ostringstream os;
    os << "|D| = " << std::abs(sample.value) << " below " << kNearZeroThreshold
       << " at lambda = " << sample.lambda;
    throw NearZeroError(os.str(), sample.lambda);
  }
}

struct Request {
  std::size_t left;
  double s;
};

/// Bisects every segment whose phase increment reaches the threshold until
/// none is left. Node must expose `sample`; make(left_node, s) evaluates a
/// batch of midpoints.
template <class Node, class Make>
int refine(std::vector<Node>& nodes, bool closed, const ContourSpec& spec, Make&& make) {
  int inserted = 0;
  for (int depth = 0;; ++depth) {
    std::vector<Request> requests;
    double worst = 0.0;
    const std::size_t segments = closed ? nodes.size() : nodes.size() - 1;
    for (std::size_t k = 0; k < segments; ++k) {
      const std::size_t next = (k + 1) % nodes.size();
      const double d = std::abs(increment(nodes[k].sample.value, nodes[next].sample.value));
      if (d < spec.max_phase_step) continue;
      worst = std::max(worst, d);
      const double s1 = next == 0 ? 4.0 : nodes[next].sample.s;
      requests.push_back({k, 0.5 * (nodes[k].sample.s + s1)});
    }
    if (requests.empty()) return inserted;
    if (depth == spec.max_depth) {
      std::ostringstream os;
      os << requests.size() << " contour segment(s) still turn by up to " << worst
         << " rad after " << spec.max_depth << " bisections";
      throw UnresolvedPhaseError(os.str());
    }
    std::vector<Node> fresh = make(std::as_const(nodes), std::span<const Request>(requests));
    for (const Node& n : fresh) require_nonzero(n.sample);
    inserted += static_cast<int>(fresh.size());

    std::vector<Node> merged;
    merged.reserve(nodes.size() + fresh.size());
    std::size_t r = 0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      merged.push_back(std::move(nodes[k]));
      if (r < requests.size() && requests[r].left == k) merged.push_back(std::move(fresh[r++]));
    }
    nodes = std::move(merged);
  }
}

ContourResult assemble(std::vector<ContourSample> samples, int inserted) {
  ContourResult out;
  out.samples = std::move(samples);
  out.refinements_used = inserted;
  out.min_abs_D = std::numeric_limits<double>::infinity();
  const std::size_t n = out.samples.size();
  out.phase_increments.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.min_abs_D = std::min(out.min_abs_D, std::abs(out.samples[k].value));
    const double d = increment(out.samples[k].value, out.samples[(k + 1) % n].value);
    out.phase_increments.push_back(d);
    out.total_phase += d;
  }
  const double turns = out.total_phase / (2.0 * kPi);
  out.winding = static_cast<int>(std::lround(turns));
  if (std::abs(turns - out.winding) > 1e-6) {
    std::ostringstream os;
    os << "accumulated phase " << out.total_phase << " is not a multiple of 2 pi";
    throw ConsistencyError(os.str());
  }
  return out;
}

struct PlainNode {
  ContourSample sample;
};

struct EvansNode {
  ContourSample sample;
  ModeVectors modes;
};

ContourSample to_sample(double s, const EvansEvaluation& e) {
  return {s, e.lambda, e.value, e.minus_stats.steps + e.plus_stats.steps,
          e.minus_stats.rejections + e.plus_stats.rejections};
}

template <class Value>
ContourResult evans_contour_impl(const EvansSystem& system, const ContourSpec& spec, int jobs,
                                 bool direct_lower, Value&& value) {
  spec.validate();
  const auto points = upper_contour(spec);
  std::vector<cdouble> lambdas;
  for (const auto& p : points) lambdas.push_back(p.lambda);
  const auto modes = system.analytic_modes(lambdas);

  std::vector<EvansNode> nodes(points.size());
  parallel_for(points.size(), jobs, [&](std::size_t i) {
    nodes[i] = {value(points[i].s, points[i].lambda, modes[i]), modes[i]};
  });
  for (const auto& n : nodes) require_nonzero(n.sample);

  auto make = [&](const std::vector<EvansNode>& current, std::span<const Request> requests) {
    std::vector<EvansNode> fresh(requests.size());
    parallel_for(requests.size(), jobs, [&](std::size_t i) {
      const EvansNode& left = current[requests[i].left];
      const double s = requests[i].s;
      const cdouble lambda = contour_lambda(spec, s);
      const ModeVectors m = lambda.imag() < 0.0 && left.sample.lambda.imag() >= 0.0
                                ? system.analytic_modes(lambda)
                                : system.transport_modes(left.sample.lambda, left.modes, lambda);
      fresh[i] = {value(s, lambda, m), m};
    });
    return fresh;
  };
  int inserted = refine(nodes, false, spec, make);

  if (!direct_lower) {
    std::vector<ContourSample> upper;
    for (const auto& n : nodes) upper.push_back(n.sample);
    ContourResult out = conjugate_extend(upper);
    out.refinements_used = inserted;
    return out;
  }

  // Conjugate-symmetric initial vectors; only the integration is repeated.
  std::vector<cdouble> lower;
  std::vector<ModeVectors> lower_modes;
  for (std::size_t k = nodes.size() - 1; k-- > 1;) {
    const ModeVectors& m = nodes[k].modes;
    lower.push_back(std::conj(nodes[k].sample.lambda));
    lower_modes.push_back({m.r_minus.conjugate(), m.r_tilde_plus.conjugate(), m.r_plus.conjugate()});
  }
  const std::size_t upper_count = nodes.size();
  nodes.resize(upper_count + lower.size());
  parallel_for(lower.size(), jobs, [&](std::size_t i) {
    const double s = 4.0 - nodes[upper_count - 2 - i].sample.s;
    nodes[upper_count + i] = {value(s, lower[i], lower_modes[i]), lower_modes[i]};
  });
  for (const auto& n : nodes) require_nonzero(n.sample);
  inserted += refine(nodes, true, spec, make);
  std::vector<ContourSample> all;
  for (const auto& n : nodes) all.push_back(n.sample);
  return assemble(std::move(all), inserted);
}

}  // namespace

void ContourSpec::validate() const {
  if (!(radius > 0.0 && std::isfinite(radius))) throw DomainError("contour radius must be positive");
  if (!(origin_offset > 0.0 && origin_offset < radius)) {
    throw DomainError("contour origin offset must lie in (0, radius)");
  }
  if (n_arc < 2 || n_imag < 2) throw DomainError("contour needs n_arc >= 2 and n_imag >= 2");
  if (!(max_phase_step > 0.0 && max_phase_step < kPi)) {
    throw DomainError("max_phase_step must lie in (0, pi)");
  }
  if (max_depth < 0) throw DomainError("max_depth must be non-negative");
}

cdouble contour_lambda(const ContourSpec& spec, double s) {
  s = std::fmod(s, 4.0);
  if (s < 0.0) s += 4.0;
  if (s > 2.0) return std::conj(contour_lambda(spec, 4.0 - s));
  const double top = std::sqrt(spec.radius * spec.radius - spec.origin_offset * spec.origin_offset);
  if (s < 1.0) return std::polar(spec.radius, s * std::atan2(top, spec.origin_offset));
  return {spec.origin_offset, top * (2.0 - s)};
}

std::vector<ContourPoint> upper_contour(const ContourSpec& spec) {
  spec.validate();
  std::vector<ContourPoint> out;
  out.reserve(spec.n_arc + spec.n_imag);
  for (int k = 0; k < spec.n_arc; ++k) {
    const double s = static_cast<double>(k) / spec.n_arc;
    out.push_back({s, contour_lambda(spec, s)});
  }
  for (int k = 0; k < spec.n_imag; ++k) {
    const double s = 1.0 + static_cast<double>(k) / (spec.n_imag - 1);
    out.push_back({s, contour_lambda(spec, s)});
  }
  // Exact real endpoints.
  out.front().lambda = {spec.radius, 0.0};
  out.back().lambda = {spec.origin_offset, 0.0};
  return out;
}

std::vector<ContourPoint> build_contour(const ContourSpec& spec) {
  auto out = upper_contour(spec);
  for (std::size_t k = out.size() - 1; k-- > 1;) {
    out.push_back({4.0 - out[k].s, std::conj(out[k].lambda)});
  }
  return out;
}

ContourResult conjugate_extend(std::span<const ContourSample> upper) {
  if (upper.size() < 2) throw DomainError("conjugate_extend needs at least two samples");
  std::vector<ContourSample> all(upper.begin(), upper.end());
  for (std::size_t k = upper.size() - 1; k-- > 1;) {
    ContourSample m = upper[k];
    m.s = 4.0 - m.s;
    m.lambda = std::conj(m.lambda);
    m.value = std::conj(m.value);
    all.push_back(m);
  }
  return assemble(std::move(all), 0);
}

ContourResult winding_number(const ContourSpec& spec, const std::function<cdouble(cdouble)>& f) {
  spec.validate();
  std::vector<PlainNode> nodes;
  for (const auto& p : build_contour(spec)) {
    nodes.push_back({{p.s, p.lambda, f(p.lambda)}});
    require_nonzero(nodes.back().sample);
  }
  auto make = [&](const std::vector<PlainNode>&, std::span<const Request> requests) {
    std::vector<PlainNode> fresh;
    for (const auto& r : requests) {
      const cdouble lambda = contour_lambda(spec, r.s);
      fresh.push_back({{r.s, lambda, f(lambda)}});
    }
    return fresh;
  };
  const int inserted = refine(nodes, true, spec, make);
  std::vector<ContourSample> samples;
  for (auto& n : nodes) samples.push_back(n.sample);
  return assemble(std::move(samples), inserted);
}

ContourResult evans_contour(const EvansSystem& system, const ContourSpec& spec,
                            const EvansContourOptions& options) {
  return evans_contour_impl(system, spec, options.jobs, options.direct_lower_half,
                            [&](double s, cdouble lambda, const ModeVectors& m) {
                              return to_sample(s, system.evaluate(lambda, m));
                            });
}

ContourResult evans_contour_forward(const EvansSystem& system, const ContourSpec& spec,
                                    int jobs) {
  return evans_contour_impl(system, spec, jobs, false,
                            [&](double s, cdouble lambda, const ModeVectors& m) {
                              return ContourSample{s, lambda, system.evaluate_forward(lambda, m)};
                            });
}

double default_radius(const ProfileSolution& profile) {
  return hf_bound(profile.v_hat, profile.w_hat, profile.params).radius;
}

}  // namespace capshock
