#include <doctest.h>

#include <cmath>
#include <numbers>

#include "capshock/contour.hpp"
#include "capshock/errors.hpp"

using namespace capshock;

namespace {

std::shared_ptr<const ProfileSolution> profile_of(double vp, double d, double gamma = 1.4) {
  return std::make_shared<const ProfileSolution>(solve_profile(GasParams::make(gamma, vp, d)));
}

}  // namespace

TEST_CASE("contour geometry") {
  const ContourSpec spec;
  const auto upper = upper_contour(spec);
  REQUIRE(upper.size() == 70);
  CHECK(upper.front().lambda == cdouble(12.0, 0.0));
  CHECK(upper.back().lambda == cdouble(1e-4, 0.0));
  CHECK(upper.front().s == 0.0);
  CHECK(upper.back().s == 2.0);
  for (std::size_t i = 1; i < upper.size(); ++i) CHECK(upper[i].s > upper[i - 1].s);
  for (const auto& p : upper) {
    CHECK(p.lambda.real() >= 1e-4 - 1e-15);
    CHECK(p.lambda.imag() >= 0.0);
    CHECK(std::abs(p.lambda) <= spec.radius + 1e-12);
    CHECK(std::abs(contour_lambda(spec, p.s) - p.lambda) < 1e-12);
  }
  const double top = std::sqrt(144.0 - 1e-8);
  CHECK(std::abs(contour_lambda(spec, 1.0) - cdouble(1e-4, top)) < 1e-12);
  CHECK(std::abs(contour_lambda(spec, 3.0) - cdouble(1e-4, -top)) < 1e-12);
  CHECK(std::abs(contour_lambda(spec, 4.0 - 0.3) - std::conj(contour_lambda(spec, 0.3))) < 1e-14);

  const auto closed = build_contour(spec);
  CHECK(closed.size() == 2 * 70 - 2);
  int real_points = 0;
  for (const auto& p : closed) real_points += p.lambda.imag() == 0.0;
  CHECK(real_points == 2);
  for (std::size_t k = 70; k < closed.size(); ++k) {
    CHECK(closed[k].lambda == std::conj(closed[138 - k].lambda));
  }

  ContourSpec tiny{1.0, 2, 2};
  CHECK(upper_contour(tiny).size() == 4);
  CHECK(build_contour(tiny).size() == 6);
}

TEST_CASE("contour spec validation") {
  ContourSpec s;
  s.n_arc = 1;
  CHECK_THROWS_AS(s.validate(), DomainError);
  s = {};
  s.origin_offset = 0.0;
  CHECK_THROWS_AS(s.validate(), DomainError);
  s = {};
  s.origin_offset = 13.0;
  CHECK_THROWS_AS(s.validate(), DomainError);
  s = {};
  s.max_phase_step = 4.0;
  CHECK_THROWS_AS(s.validate(), DomainError);
  s = {};
  s.max_depth = -1;
  CHECK_THROWS_AS(s.validate(), DomainError);
  CHECK_NOTHROW(ContourSpec{}.validate());
}

TEST_CASE("winding of analytic test functions") {
  const ContourSpec spec;
  CHECK(winding_number(spec, [](cdouble) { return cdouble(2.0, 1.0); }).winding == 0);
  CHECK(winding_number(spec, [](cdouble l) { return l - cdouble(5.0, 2.0); }).winding == 1);
  CHECK(winding_number(spec, [](cdouble l) { return l - cdouble(-3.0, 0.0); }).winding == 0);
  CHECK(winding_number(spec, [](cdouble l) { return l - cdouble(20.0, 1.0); }).winding == 0);
  CHECK(winding_number(spec, [](cdouble l) { return l - cdouble(5.0, -2.0); }).winding == 1);

  const ContourResult cubic =
      winding_number(spec, [](cdouble l) { return std::pow(l - cdouble(6.0, 0.5), 3); });
  CHECK(cubic.winding == 3);
  CHECK(std::abs(cubic.total_phase - 6.0 * std::numbers::pi) < 1e-9);
  for (double inc : cubic.phase_increments) CHECK(std::abs(inc) < spec.max_phase_step);

  // Zeros close to the origin lie inside the shifted contour only if Re > offset.
  CHECK(winding_number(spec, [](cdouble l) { return l - cdouble(1e-3, 0.0); }).winding == 1);
  CHECK(winding_number(spec, [](cdouble l) { return l - cdouble(-1e-3, 0.0); }).winding == 0);
}

TEST_CASE("refinement inserts midpoints where the phase moves fast") {
  ContourSpec spec;
  // Unit modulus with a phase that is single valued on the plane.
  const ContourResult r =
      winding_number(spec, [](cdouble l) { return std::polar(1.0, 5.0 * (l.real() + l.imag())); });
  CHECK(r.refinements_used > 0);
  CHECK(r.winding == 0);
  CHECK(r.samples.size() == r.phase_increments.size());
  for (std::size_t k = 1; k < r.samples.size(); ++k) CHECK(r.samples[k].s > r.samples[k - 1].s);
}

TEST_CASE("contour failures") {
  ContourSpec spec;
  CHECK_THROWS_AS(winding_number(spec, [](cdouble l) { return l - 12.0; }), NearZeroError);
  spec.max_depth = 2;
  CHECK_THROWS_AS(winding_number(spec, [](cdouble l) { return std::polar(1.0, 200.0 * (l.real() + l.imag())); }),
                  UnresolvedPhaseError);
}

TEST_CASE("conjugate extension of an upper half") {
  const ContourSpec spec;
  std::vector<ContourSample> upper;
  for (const auto& p : upper_contour(spec)) upper.push_back({p.s, p.lambda, p.lambda + 1.0});
  const ContourResult r = conjugate_extend(upper);
  CHECK(r.winding == 0);
  CHECK(r.samples.size() == 138);
  CHECK(r.samples[100].value == std::conj(r.samples[38].value));
  CHECK(r.min_abs_D == doctest::Approx(1.0 + 1e-4));

  std::vector<ContourSample> shifted;
  for (const auto& p : upper_contour(spec)) shifted.push_back({p.s, p.lambda, p.lambda - 3.0});
  CHECK(conjugate_extend(shifted).winding == 1);
}

TEST_CASE("Evans contour for a stable shock") {
  const EvansSystem sys(profile_of(0.25, 0.45));
  const ContourSpec spec;
  const ContourResult reflected = evans_contour(sys, spec, {2, false});
  const ContourResult direct = evans_contour(sys, spec, {1, true});
  CHECK(reflected.winding == 0);
  CHECK(direct.winding == 0);
  CHECK(reflected.min_abs_D > 0.0);
  REQUIRE(reflected.samples.size() == direct.samples.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < direct.samples.size(); ++k) {
    REQUIRE(direct.samples[k].lambda == reflected.samples[k].lambda);
    worst = std::max(worst, std::abs(direct.samples[k].value - reflected.samples[k].value) /
                                std::abs(direct.samples[k].value));
  }
  CHECK(worst < 1e-8);

  for (const auto& s : reflected.samples) {
    if (s.lambda.imag() == 0.0) CHECK(std::abs(s.value.imag()) < 1e-10 * std::abs(s.value));
    CHECK(s.steps > 0);
  }
  CHECK(evans_contour_forward(sys, spec).winding == 0);
}

TEST_CASE("winding is insensitive to contour parameters") {
  const EvansSystem sys(profile_of(0.45, 0.45));
  ContourSpec spec;
  spec.max_phase_step = std::numbers::pi / 4;
  CHECK(evans_contour(sys, spec).winding == 0);
  spec = {};
  spec.n_arc = 80;
  spec.n_imag = 60;
  CHECK(evans_contour(sys, spec).winding == 0);
  for (double offset : {1e-3, 1e-5}) {
    spec = {};
    spec.origin_offset = offset;
    CHECK(evans_contour(sys, spec).winding == 0);
  }
}

TEST_CASE("default radius") {
  const auto prof = profile_of(0.45, 0.45);
  CHECK(default_radius(*prof) >= 12.0);
  const HighFrequencyBound hf = hf_bound(prof->v_hat, prof->w_hat, prof->params);
  CHECK(default_radius(*prof) == doctest::Approx(std::max(12.0, hf.radius)));
}
