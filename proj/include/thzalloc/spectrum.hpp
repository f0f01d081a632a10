#pragma once

#include <cmath>
#include <optional>
#include <tuple>
#include <vector>

#include "absorption.hpp"
#include "common.hpp"

namespace thzalloc {

inline constexpr double kTHz = 1e12;  // Hz per THz

// Stage-1 output: a transmission window divided into S equal sub-bands with
// guard bands, edge bands and a beam-squint cap on fractional bandwidth.
struct SpectrumPlan {
  TwFit fit;
  double epsilon = 0;    // absorption-variation tolerance (1/m)
  double w_i = 0;        // leading edge band, Hz
  double w_e = 0;        // trailing edge band, Hz
  double w_g = 0;        // guard band, Hz
  double b_th = 0;       // fractional-bandwidth cap
  int s_star = 0;        // sub-band count
  double w = 0;          // sub-band width, Hz
  std::vector<double> f_centers;  // Hz, strictly increasing

  double center(int s) const { return f_centers[static_cast<std::size_t>(s)]; }
  // Fitted absorption coefficient at sub-band s (1/m).
  double absorption(int s) const { return k_bar(center(s) / kTHz, fit); }
  double window_width() const { return (fit.f_hi - fit.f_lo) * kTHz; }
};

// Minimal-total edge bands (w_I, w_E) in Hz such that both trimmed endpoints
// lie inside the convexity interval of k_bar and the absorption values at the
// two trimmed endpoints differ by at most eps. The window is first clamped to
// the convexity interval, then the side with the higher absorption shrinks by
// bisection until the gap closes (k_bar is U-shaped inside the interval, so
// shrinking the lower side could only widen the gap).
inline std::pair<double, double> solve_edge_bands(const TwFit& fit,
                                                  double eps) {
  if (eps <= 0) throw RangeError("edge-band tolerance must be > 0");
  if (!(fit.f_lo < fit.f_hi)) throw Infeasible("empty transmission window");
  auto [c_lo, c_hi] = convexity_interval(fit);
  double a = std::max(fit.f_lo, c_lo);  // THz
  double b = std::min(fit.f_hi, c_hi);
  if (!(a < b)) throw Infeasible("convexity-clamped window is empty");

  const double f_min = -fit.t3 / fit.t2;  // argmin of k_bar
  double ka = k_bar(a, fit), kb = k_bar(b, fit);
  if (std::abs(ka - kb) > eps) {
    // Shrink the higher side toward the minimum until its value meets
    // (other side) + eps. A root exists because k_bar reaches t4 at f_min.
    const bool left_high = ka > kb;
    const double target = (left_high ? kb : ka) + eps;
    double lo = left_high ? a : std::max(f_min, a);
    double hi = left_high ? std::min(f_min, b) : b;
    // g = k_bar - target is monotone on [lo,hi]; keep the endpoint with
    // g <= 0 so the returned pair satisfies the tolerance exactly.
    for (int it = 0; it < 200 && hi - lo > 1e-18; ++it) {
      const double mid = 0.5 * (lo + hi);
      const bool below = k_bar(mid, fit) <= target;
      if (left_high) {
        (below ? hi : lo) = mid;
      } else {
        (below ? lo : hi) = mid;
      }
    }
    if (left_high) {
      a = hi;
    } else {
      b = lo;
    }
  }
  return {(a - fit.f_lo) * kTHz, (fit.f_hi - b) * kTHz};
}

// Smallest sub-band count satisfying the fractional-bandwidth cap at the
// lowest center frequency (all arguments in Hz). Derived from
// w/f_1 <= B_th with w = (w_T - w_I - w_E - (S-1) w_G)/S and
// f_1 = f_I + w_I + w/2.
inline int s_lower_bound(double w_t, double w_i, double w_e, double w_g,
                         double b_th, double f_i) {
  if (!(w_t > w_i + w_e)) throw Infeasible("edge bands exceed the window");
  if (!(b_th > 0)) throw RangeError("b_th must be > 0");
  const double num = (2.0 - b_th) * (w_t - w_i - w_e + w_g);
  const double den = 2.0 * w_g + 2.0 * b_th * (f_i + w_i) - b_th * w_g;
  const double s = std::ceil(num / den);
  return s < 1.0 ? 1 : static_cast<int>(s);
}

inline double sub_band_width(int s_star, double w_t, double w_i, double w_e,
                             double w_g) {
  if (s_star < 1) throw RangeError("s_star must be >= 1");
  const double w = (w_t - w_e - w_i - (s_star - 1) * w_g) / s_star;
  if (!(w > 0)) throw Infeasible("sub-band width is not positive");
  return w;
}

inline std::vector<double> sub_band_centers(int s_star, double f_i, double w_i,
                                            double w, double w_g) {
  std::vector<double> c(static_cast<std::size_t>(s_star));
  for (int s = 0; s < s_star; ++s)
    c[static_cast<std::size_t>(s)] = f_i + w_i + (s + 0.5) * w + s * w_g;
  return c;
}

// Full stage-1 plan. Edge bands come from solve_edge_bands unless the caller
// fixes them (fixed edges are still validated against eps and the convexity
// interval). Throws Infeasible when no S satisfies the squint cap.
inline SpectrumPlan make_plan(const TwFit& fit, double eps, double w_g,
                              double b_th,
                              std::optional<double> fixed_w_i = std::nullopt,
                              std::optional<double> fixed_w_e = std::nullopt) {
  SpectrumPlan plan;
  plan.fit = fit;
  plan.epsilon = eps;
  plan.w_g = w_g;
  plan.b_th = b_th;
  if (fixed_w_i.has_value() != fixed_w_e.has_value())
    throw RangeError("fix both edge bands or neither");
  if (fixed_w_i) {
    plan.w_i = *fixed_w_i;
    plan.w_e = *fixed_w_e;
    auto [c_lo, c_hi] = convexity_interval(fit);
    const double a = fit.f_lo + plan.w_i / kTHz;
    const double b = fit.f_hi - plan.w_e / kTHz;
    if (!(a < b)) throw Infeasible("fixed edge bands exceed the window");
    if (a < c_lo || b > c_hi)
      throw Infeasible("fixed edge bands leave the convexity interval");
    if (std::abs(k_bar(a, fit) - k_bar(b, fit)) > eps)
      throw Infeasible("fixed edge bands violate the absorption tolerance");
  } else {
    std::tie(plan.w_i, plan.w_e) = solve_edge_bands(fit, eps);
  }
  const double w_t = plan.window_width();
  const double f_i = fit.f_lo * kTHz;
  plan.s_star = s_lower_bound(w_t, plan.w_i, plan.w_e, w_g, b_th, f_i);
  plan.w = sub_band_width(plan.s_star, w_t, plan.w_i, plan.w_e, w_g);
  plan.f_centers = sub_band_centers(plan.s_star, f_i, plan.w_i, plan.w, w_g);
  if (plan.w / plan.f_centers.front() > b_th * (1.0 + 1e-9))
    throw Infeasible("squint cap unsatisfiable at s=1");
  return plan;
}

// Plan with a caller-chosen S. Used by the rate-vs-S probe; the squint cap is
// deliberately not enforced here.
inline SpectrumPlan make_plan_forced_s(const TwFit& fit, double w_g, int s,
                                       double w_i = 0, double w_e = 0,
                                       double b_th = 0) {
  SpectrumPlan plan;
  plan.fit = fit;
  plan.epsilon = 0;
  plan.w_i = w_i;
  plan.w_e = w_e;
  plan.w_g = w_g;
  plan.b_th = b_th;
  plan.s_star = s;
  const double w_t = plan.window_width();
  plan.w = sub_band_width(s, w_t, w_i, w_e, w_g);
  plan.f_centers = sub_band_centers(s, fit.f_lo * kTHz, w_i, plan.w, w_g);
  return plan;
}

}  // namespace thzalloc
