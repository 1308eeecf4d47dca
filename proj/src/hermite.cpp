#include "capshock/hermite.hpp"

#include <algorithm>
#include <utility>

#include "capshock/errors.hpp"

namespace capshock {

CubicHermite::CubicHermite(std::vector<double> x, std::vector<double> y, std::vector<double> dy)
    : x_(std::move(x)), y_(std::move(y)), dy_(std::move(dy)) {
  if (x_.size() != y_.size() || x_.size() != dy_.size() || x_.size() < 2) {
    throw DomainError("CubicHermite: need at least two knots with matching value/slope arrays");
  }
  for (std::size_t i = 1; i < x_.size(); ++i) {
    if (!(x_[i] > x_[i - 1])) throw DomainError("CubicHermite: knots must be strictly increasing");
  }
}

std::size_t CubicHermite::locate(double x, std::size_t* hint) const {
  const std::size_t last = x_.size() - 2;
  if (hint != nullptr && *hint <= last && x_[*hint] <= x && x <= x_[*hint + 1]) return *hint;
  if (hint != nullptr && *hint + 1 <= last && x_[*hint + 1] <= x && x <= x_[*hint + 2]) {
    return ++*hint;
  }
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  i = std::min(i, last);
  if (hint != nullptr) *hint = i;
  return i;
}

CubicHermite::Sample CubicHermite::operator()(double x) const { return eval(x, nullptr); }

CubicHermite::Sample CubicHermite::eval(double x, std::size_t* hint) const {
  if (x <= x_.front()) return {y_.front(), x == x_.front() ? dy_.front() : 0.0};
  if (x >= x_.back()) return {y_.back(), x == x_.back() ? dy_.back() : 0.0};
  const std::size_t i = locate(x, hint);
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  const double value = h00 * y_[i] + h10 * h * dy_[i] + h01 * y_[i + 1] + h11 * h * dy_[i + 1];
  const double d00 = (6 * t2 - 6 * t) / h;
  const double d10 = 3 * t2 - 4 * t + 1;
  const double d01 = (-6 * t2 + 6 * t) / h;
  const double d11 = 3 * t2 - 2 * t;
  const double slope = d00 * y_[i] + d10 * dy_[i] + d01 * y_[i + 1] + d11 * dy_[i + 1];
  return {value, slope};
}

}  // namespace capshock
