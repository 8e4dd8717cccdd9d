#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "expjump/errors.hpp"

namespace expjump::numerics {

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussRule gauss_legendre(int n);

// Rule mapped to [a, b].
GaussRule gauss_legendre(int n, double a, double b);

// Root of an increasing function on [lo, hi] given f(lo) < 0 < f(hi).
// Stops when the bracket is narrower than xtol or cannot shrink further.
template <class F>
double bisect_increasing(F&& f, double lo, double hi, double xtol = 0.0,
                         int max_iter = 500) {
  for (int it = 0; it < max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi || hi - lo <= xtol) break;
    if (f(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace expjump::numerics
