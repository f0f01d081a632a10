#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "thzalloc/power_fp.hpp"

namespace thzalloc {

struct AdmmConfig {
  double eps_a = 1e-3;     // consensus residual threshold
  int l_max_inner = 50;    // inner rounds per outer iteration
  double rho = 2.2;        // penalty weight (on normalized coefficients)
  double stiffness = 1.0;  // normalized local curvature, see admm_power_step
};

// Euclidean projection of one BS's sqrt-power row onto the ball of radius
// sqrt(p_max): the feasible set of the per-BS budget.
inline std::vector<double> project_ball(const std::vector<double>& xi,
                                        double p_max) {
  double norm2 = 0.0;
  for (double v : xi) norm2 += v * v;
  if (norm2 <= p_max || norm2 == 0.0) return xi;
  const double scale = std::sqrt(p_max / norm2);
  std::vector<double> out(xi);
  for (double& v : out) v *= scale;
  return out;
}

// One unconstrained consensus step: minimize the local quadratic model plus
// the proximal term centered on delta + z. Each slot's raw coefficients are
// rescaled to curvature `stiffness` (num -> stiffness*num/den0, den0 ->
// stiffness), which leaves the slot's unconstrained stationary point
// num/den0 untouched but makes the fixed penalty rho = 2.2 commensurate
// with every slot regardless of the raw gain magnitudes. A slot with zero
// curvature (always zero numerator too) degenerates to the pure consensus
// copy delta + z.
inline PowerMatrix admm_power_step(const PowerCoeffs& co, double stiffness,
                                   const PowerMatrix& delta,
                                   const PowerMatrix& z, double rho) {
  PowerMatrix out(co.num.num_bs, co.num.num_sub);
  const double half_rho = 0.5 * rho;
  for (int b = 0; b < out.num_bs; ++b)
    for (int s = 0; s < out.num_sub; ++s) {
      const double raw_d = co.den0(b, s);
      const double a_hat =
          raw_d > 0.0 ? stiffness * co.num(b, s) / raw_d : 0.0;
      const double d_hat = raw_d > 0.0 ? stiffness : 0.0;
      out(b, s) =
          (a_hat + half_rho * (delta(b, s) + z(b, s))) / (d_hat + half_rho);
    }
  return out;
}

struct AdmmInner {
  PowerMatrix delta;          // feasible consensus variable at exit
  int iterations = 0;
  double residual = 0.0;      // last relative consensus residual
};

// Inner consensus loop for one outer iteration: alternate the unconstrained
// local step, the budget-ball projection, and the dual correction until the
// relative gap between the local and feasible copies closes. The scaled dual
// z persists across calls: on rounds where no budget binds the dual update
// returns it to zero by itself, and on rounds where a budget does bind the
// carried-over dual already encodes the price, so the loop starts at (or
// near) consensus instead of rebuilding the price from scratch.
inline AdmmInner run_admm_inner(const PowerProblem& prob,
                                const PowerCoeffs& co,
                                const PowerMatrix& start, PowerMatrix& z,
                                const AdmmConfig& cfg) {
  const int B = prob.idx.B, S = prob.idx.S;
  AdmmInner inner{start, 0, 0.0};
  PowerMatrix p_bar = start;
  for (int it = 0; it < cfg.l_max_inner; ++it) {
    p_bar = admm_power_step(co, cfg.stiffness, inner.delta, z, cfg.rho);
    for (int b = 0; b < B; ++b) {
      std::vector<double> xi(static_cast<std::size_t>(S));
      for (int s = 0; s < S; ++s) xi[static_cast<std::size_t>(s)] =
          p_bar(b, s) - z(b, s);
      std::vector<double> d = project_ball(xi, prob.p_max);
      for (int s = 0; s < S; ++s) inner.delta(b, s) =
          d[static_cast<std::size_t>(s)];
    }
    for (int b = 0; b < B; ++b)
      for (int s = 0; s < S; ++s)
        z(b, s) += inner.delta(b, s) - p_bar(b, s);
    double gap2 = 0.0, ref2 = 0.0;
    for (int b = 0; b < B; ++b)
      for (int s = 0; s < S; ++s) {
        const double diff = p_bar(b, s) - inner.delta(b, s);
        gap2 += diff * diff;
        ref2 += inner.delta(b, s) * inner.delta(b, s);
      }
    inner.residual =
        ref2 > 0.0 ? std::sqrt(gap2 / ref2) : std::sqrt(gap2);
    inner.iterations = it + 1;
    if (inner.residual <= cfg.eps_a) break;
  }
  return inner;
}

// Exchange bookkeeping for the decentralized variant: every inner round
// costs one broadcast of local powers and one broadcast of the projected
// consensus copies, each carrying one float per sub-band.
struct MessageLog {
  int rounds = 0;
  int payload_floats = 0;
};

struct AdmmResult {
  PowerMatrix p;      // transmit powers delta^2
  PowerMatrix p_bar;  // feasible sqrt powers at exit
  std::vector<double> trace;      // objective in bits/s per outer iteration
  std::vector<int> inner_counts;  // inner rounds per outer iteration
  MessageLog messages;
  int iterations = 0;
  bool converged = false;
};

// Decentralized power allocation: the outer loop refreshes the fractional-
// programming auxiliaries exactly as the centralized solver does, but the
// per-BS power step is solved by consensus ADMM against the shared budget
// ball instead of a priced closed form.
inline AdmmResult run_admm(const PowerProblem& prob, const FpConfig& outer = {},
                           const AdmmConfig& cfg = {},
                           const PowerMatrix* start = nullptr,
                           PowerMatrix* dual_io = nullptr) {
  constexpr double kLn2 = 0.6931471805599453;
  AdmmResult res;
  res.p_bar = start ? *start : initial_power(prob, outer);
  res.messages.payload_floats = prob.idx.S;
  double f_prev = fp_objective(prob, res.p_bar);
  res.trace.push_back(f_prev / kLn2);
  // callers re-solving a sequence of related problems may thread the dual
  // through so an already-learned budget price survives the restart
  PowerMatrix local_z(prob.idx.B, prob.idx.S, 0.0);
  PowerMatrix& z = dual_io ? *dual_io : local_z;
  if (dual_io && (z.num_bs != prob.idx.B || z.num_sub != prob.idx.S))
    z = PowerMatrix(prob.idx.B, prob.idx.S, 0.0);
  for (int l = 0; l < outer.l_max; ++l) {
    std::vector<double> gamma = update_gamma(prob, res.p_bar);
    std::vector<double> y = update_y(prob, res.p_bar, gamma);
    const PowerCoeffs co = power_coeffs(prob, gamma, y);
    AdmmInner inner = run_admm_inner(prob, co, res.p_bar, z, cfg);
    res.p_bar = inner.delta;
    res.inner_counts.push_back(inner.iterations);
    res.messages.rounds += 2 * inner.iterations;
    const double f_now = fp_objective(prob, res.p_bar);
    res.trace.push_back(f_now / kLn2);
    res.iterations = l + 1;
    if (std::abs(f_now - f_prev) <=
        outer.eps1 * std::max(std::abs(f_prev), 1e-12)) {
      res.converged = true;
      f_prev = f_now;
      break;
    }
    f_prev = f_now;
  }
  res.p = PowerMatrix(prob.idx.B, prob.idx.S);
  for (int b = 0; b < prob.idx.B; ++b)
    for (int s = 0; s < prob.idx.S; ++s)
      res.p(b, s) = res.p_bar(b, s) * res.p_bar(b, s);
  return res;
}

}  // namespace thzalloc
