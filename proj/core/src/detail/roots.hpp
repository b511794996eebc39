#pragma once

#include <cmath>
#include <optional>

namespace swirl::detail {

// Plain bisection on [lo, hi]; requires f(lo) and f(hi) of opposite sign (or
// one of them zero). Stops once the bracket is narrower than tol or after
// 200 halvings, and returns the midpoint of the final bracket.
template <typename F>
std::optional<double> bisect(F&& f, double lo, double hi, double tol) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0)) return std::nullopt;
  for (int it = 0; it < 200 && (hi - lo) > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Counts sign changes of f over samples x_0..x_{n-1}, ignoring exact zeros.
// The bracket of the first change is written to first_lo/first_hi.
template <typename F>
int count_sign_changes(F&& f, double a, double b, int n, double* first_lo = nullptr,
                       double* first_hi = nullptr) {
  int changes = 0;
  int last_sign = 0;
  double last_x = a;
  for (int k = 0; k < n; ++k) {
    const double x = a + (b - a) * k / (n - 1);
    const double v = f(x);
    const int s = (v > 0.0) - (v < 0.0);
    if (s == 0) continue;
    if (last_sign != 0 && s != last_sign) {
      if (changes == 0) {
        if (first_lo) *first_lo = last_x;
        if (first_hi) *first_hi = x;
      }
      ++changes;
    }
    last_sign = s;
    last_x = x;
  }
  return changes;
}

}  // namespace swirl::detail
