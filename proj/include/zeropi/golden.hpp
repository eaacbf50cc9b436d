#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>

namespace zeropi {

struct GoldenResult {
  double x = 0.0;
  double value = 0.0;
  std::size_t evaluations = 0;
};

/// Golden-section search for a maximum of f on [a, b], stopping once the
/// bracket is narrower than tol. NaN values count as -infinity.
template <class F>
GoldenResult golden_maximize(F&& f, double a, double b, double tol) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  std::size_t evals = 0;
  auto eval = [&](double x) {
    ++evals;
    const double v = f(x);
    return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
  };
  if (b < a) std::swap(a, b);
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  double fc = eval(c);
  double fd = eval(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = eval(d);
    }
  }
  return fc >= fd ? GoldenResult{c, fc, evals} : GoldenResult{d, fd, evals};
}

}  // namespace zeropi
