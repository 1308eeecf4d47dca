#pragma once

#include <complex>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "capshock/evans.hpp"

namespace capshock {

/// Boundary of the right half-disc of the given radius, shifted off the
/// origin to the vertical line Re(lambda) = origin_offset.
///
/// Parametrised counterclockwise by s in [0, 4): [0, 1) the arc from
/// lambda = radius up to the top point, [1, 2] down the shifted imaginary
/// segment to lambda = origin_offset, (2, 4) the mirror image,
/// lambda(4 - s) = conj(lambda(s)).
struct ContourSpec {
  double radius = 12.0;
  int n_arc = 40;    // first-quadrant arc samples, lambda = radius included
  int n_imag = 30;   // samples on the vertical segment, both ends included
  double origin_offset = 1e-4;
  double max_phase_step = std::numbers::pi / 2;
  int max_depth = 12;

  /// Throws DomainError on invalid geometry.
  void validate() const;
};

struct ContourPoint {
  double s;
  cdouble lambda;
};

cdouble contour_lambda(const ContourSpec& spec, double s);

/// The n_arc + n_imag samples of the closed upper half, ordered by s from
/// lambda = radius to lambda = origin_offset.
std::vector<ContourPoint> upper_contour(const ContourSpec& spec);

/// The closed contour: upper half followed by the conjugate reflections of its
/// non-real samples. The two real points appear once.
std::vector<ContourPoint> build_contour(const ContourSpec& spec);

struct ContourSample {
  double s;
  cdouble lambda;
  cdouble value;
  int steps = 0;
  int rejections = 0;
};

struct ContourResult {
  std::vector<ContourSample> samples;     // closed: the last sample connects to the first
  std::vector<double> phase_increments;   // arg(D[k+1]/D[k]) in (-pi, pi], wrapping at the end
  int winding = 0;
  double total_phase = 0.0;
  int refinements_used = 0;               // midpoints inserted
  double min_abs_D = 0.0;
};

/// Threshold on |D| below which a sample counts as a zero on the contour.
inline constexpr double kNearZeroThreshold = 1e-12;

/// Winding of an arbitrary function around the full contour, refining by
/// bisection wherever a phase increment reaches spec.max_phase_step.
ContourResult winding_number(const ContourSpec& spec, const std::function<cdouble(cdouble)>& f);

/// Completes a refined upper half (ordered by s in [0, 2]) by conjugate
/// reflection and accumulates the phase of the closed contour.
ContourResult conjugate_extend(std::span<const ContourSample> upper);

struct EvansContourOptions {
  int jobs = 1;
  /// Evaluate the lower half directly instead of by reflection.
  bool direct_lower_half = false;
};

/// Evans function around the contour with phase refinement. Evaluations run
/// in parallel; Kato transport along the upper half runs first, and
/// refinement midpoints inherit their eigenvectors from the left neighbour.
ContourResult evans_contour(const EvansSystem& system, const ContourSpec& spec,
                            const EvansContourOptions& options = {});

/// Same contour with the forward compound variant, for cross-checking the winding.
ContourResult evans_contour_forward(const EvansSystem& system, const ContourSpec& spec,
                                    int jobs = 1);

/// max(12, hf_bound radius) for the profile behind the system.
double default_radius(const ProfileSolution& profile);

}  // namespace capshock
