#pragma once

#include <array>
#include <cmath>
#include <utility>

#include "common.hpp"

namespace thzalloc {

// Convex curve fit of the molecular-absorption coefficient inside one
// transmission window:
//   k_bar(f) = t1 * exp(-1/(t2 f + t3)^2) + t4   [f in THz, k in 1/m]
// Valid (convex) only on a bounded interval around the window; see
// convexity_interval().
struct TwFit {
  double t1 = 0, t2 = 0, t3 = 0, t4 = 0;  // fit coefficients
  double f_lo = 0, f_hi = 0;              // window endpoints, THz
};

inline double k_bar(double f_thz, const TwFit& fit) {
  const double x = fit.t2 * f_thz + fit.t3;
  // x == 0: exp(-inf) -> 0, the analytic limit; IEEE gives this for free.
  const double x2 = x * x;
  return fit.t1 * std::exp(-1.0 / x2) + fit.t4;
}

// Interval on which k_bar'' >= 0. Endpoints ordered regardless of the sign
// of t2.
inline std::pair<double, double> convexity_interval(const TwFit& fit) {
  const double r6 = std::sqrt(6.0);
  const double a = (-r6 - 3.0 * fit.t3) / (3.0 * fit.t2);
  const double b = (r6 - 3.0 * fit.t3) / (3.0 * fit.t2);
  return a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
}

// Built-in fits for the four windows between 0.4 and 1.1 THz.
inline const TwFit& tw_registry(int idx) {
  static const std::array<TwFit, 4> kFits = {{
      {1.1, -14.5233, 7.1063, 0.0173, 0.448, 0.531},
      {0.8, 11.3600, -7.6442, 0.0139, 0.624, 0.722},
      {0.5, 9.6221, -8.1526, 0.0139, 0.780, 0.915},
      {1.2, -21.6372, 22.28, 0.0882, 0.997, 1.063},
  }};
  if (idx < 1 || idx > 4) throw RangeError("tw index must be 1..4");
  return kFits[static_cast<std::size_t>(idx - 1)];
}

}  // namespace thzalloc
