#pragma once

#include <utility>

namespace aes::detail {

/// Shrinks [lo, hi] around the switch point of a monotone predicate with
/// same_as_lo(lo) == true and same_as_lo(hi) == false. Stops when the width
/// is <= tol or no representable midpoint remains.
template <class Pred>
std::pair<double, double> bisect(double lo, double hi, double tol, Pred same_as_lo) {
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (same_as_lo(mid))
      lo = mid;
    else
      hi = mid;
  }
  return {lo, hi};
}

}  // namespace aes::detail
