#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace capshock {

/// Piecewise-cubic Hermite interpolant through (x_i, y_i, y'_i).
///
/// Evaluation outside [x_0, x_n] clamps to the end values with zero slope.
class CubicHermite {
 public:
  CubicHermite() = default;
  CubicHermite(std::vector<double> x, std::vector<double> y, std::vector<double> dy);

  struct Sample {
    double value;
    double slope;
  };

  Sample operator()(double x) const;

  /// Same as operator() but starts the interval search at *hint and updates it.
  Sample eval(double x, std::size_t* hint) const;

  std::span<const double> knots() const { return x_; }
  bool empty() const { return x_.size() < 2; }

 private:
  std::size_t locate(double x, std::size_t* hint) const;

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> dy_;
};

}  // namespace capshock
