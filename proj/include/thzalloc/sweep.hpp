#pragma once
// Monte-Carlo driver: grid x drops x methods with one fresh drop per (grid
// value, drop index) and child seeds split by purpose, so adding methods or
// grid points never perturbs the other streams and paired drops line up
// across grid values.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "config.hpp"
#include "orchestrator.hpp"
#include "results.hpp"

namespace thzalloc {

// Returns a copy of the config with the swept parameter applied.
inline RunConfig apply_sweep_param(RunConfig cfg, const std::string& param,
                                   double value) {
  if (param == "q_align") {
    cfg.q_align = value;
  } else if (param == "k_scale") {
    cfg.k_scale = value;
  } else if (param == "hi_level") {
    cfg.hi_kt = value;
    cfg.hi_kr = value;
  } else if (param == "csi_zeta") {
    cfg.csi_zeta = value;
  } else if (param == "eta") {
    cfg.blockage_density = value;
  } else if (param == "num_bs") {
    cfg.num_bs = static_cast<int>(value);
    if (cfg.num_bs != value) throw RangeError("num_bs grid must be integral");
  } else {
    throw RangeError("unknown sweep parameter: " + param);
  }
  validate_config(cfg);
  return cfg;
}

struct DropBundle {
  NetworkScenario sc;
  SpectrumPlan plan;
  ChannelTensor t;
};

// One drop end to end, sampling in the fixed order positions -> fading ->
// blockage -> CSI error. All four streams key off the same drop seed with
// distinct purpose tags.
inline DropBundle build_drop(const RunConfig& cfg, std::uint64_t drop_seed) {
  DropBundle d;
  d.sc = make_scenario(cfg, drop_seed);
  d.plan = plan_from_config(cfg);
  d.t = link_gains(d.sc, d.plan, cfg.k_scale);
  if (cfg.csi_zeta < 1.0)
    perturb_csi(d.t, d.sc, d.plan, cfg.csi_zeta, drop_seed);
  return d;
}

inline SolveReport solve_single(const RunConfig& cfg, Method method,
                                std::uint64_t drop_seed) {
  const DropBundle d = build_drop(cfg, drop_seed);
  return run_method(method, d.t, d.plan, d.sc, drop_seed,
                    solver_from_config(cfg));
}

// Controlled bandwidth-splitting experiment: equal power P_max/S, one fixed
// user per BS across all its sub-bands, fading drawn once per (b,n) pair so
// the draw does not depend on the sub-band grid, blockage frozen the same
// way. What remains is the pure effect of slicing the window into more,
// narrower sub-bands. k_const freezes the absorption coefficient (used by
// the exact-constancy check); zero_noise drops the thermal term.
struct SplitPoint {
  int s = 0;
  double sum_rate = 0;
};

inline std::vector<SplitPoint> bandwidth_split_sweep(
    const NetworkScenario& sc, const TwFit& fit,
    const std::vector<int>& s_values, double w_g = 0.0,
    std::optional<double> k_const = std::nullopt, bool zero_noise = false) {
  const int B = sc.num_bs(), N = sc.num_users();
  if (B > N)
    throw RangeError("fixed per-BS association needs at least one user each");
  NetworkScenario sc_eff = sc;
  if (zero_noise) sc_eff.n0 = 0.0;

  // frozen per-(b,n) draws, independent of every S in the list
  std::mt19937_64 rng(derive_seed(sc.rng_seed, 0, "fading"));
  std::gamma_distribution<double> gd(sc.nakagami_m, 1.0 / sc.nakagami_m);
  std::vector<double> chi(static_cast<std::size_t>(B) * N);
  for (double& x : chi) x = gd(rng);
  const std::vector<std::uint8_t> psi = sample_blockage(sc);
  const double c0 = channel_constant(sc);

  std::vector<SplitPoint> points;
  for (int S : s_values) {
    if (S < 1) throw RangeError("sub-band counts must be >= 1");
    const SpectrumPlan plan = make_plan_forced_s(fit, w_g, S);
    ChannelTensor t;
    t.idx = Index3{B, S, N};
    const int total = t.idx.size();
    t.h2.resize(static_cast<std::size_t>(total));
    t.h_tilde2.resize(static_cast<std::size_t>(total));
    t.h_bar2.resize(static_cast<std::size_t>(total));
    t.psi = psi;
    t.dist.resize(static_cast<std::size_t>(B) * N);
    t.k_abs.resize(static_cast<std::size_t>(S));
    for (int s = 0; s < S; ++s)
      t.k_abs[static_cast<std::size_t>(s)] =
          k_const ? *k_const : plan.absorption(s);
    for (int b = 0; b < B; ++b)
      for (int n = 0; n < N; ++n) {
        const double d =
            distance(sc.bs_positions[static_cast<std::size_t>(b)],
                     sc.user_positions[static_cast<std::size_t>(n)]);
        if (d == 0) throw ZeroDistance("link distance is zero");
        t.dist[static_cast<std::size_t>(b) * N + n] = d;
      }
    for (int b = 0; b < B; ++b)
      for (int s = 0; s < S; ++s) {
        const double f = plan.center(s);
        const double spread = c0 / (f * f);
        for (int n = 0; n < N; ++n) {
          const double d = t.d(b, n);
          const double bar =
              spread * chi[static_cast<std::size_t>(b) * N + n] / (d * d);
          const double att =
              std::exp(-t.k_abs[static_cast<std::size_t>(s)] * d);
          const int i = t.idx(b, s, n);
          t.h_bar2[static_cast<std::size_t>(i)] = bar;
          t.h2[static_cast<std::size_t>(i)] = bar * att;
          t.h_tilde2[static_cast<std::size_t>(i)] = bar * (1.0 - att);
        }
      }

    const PowerMatrix p(B, S, sc.p_max / S);
    double sum = 0;
    for (int b = 0; b < B; ++b)
      for (int s = 0; s < S; ++s)
        sum += blockage_aware_rate(b, s, b % N, p, t, plan, sc_eff,
                                   SinrVariant::hardware_impaired);
    points.push_back({S, sum});
  }
  return points;
}

struct SweepOutcome {
  ResultTable table;
  std::vector<std::string> failures;  // "param=v drop=i method=m: why"
};

// Full sweep. Per-point failures are collected, not fatal; rows appear in
// deterministic (grid, drop, method) order. The drop seed depends only on
// the drop index, so grid points share their random drops and the per-point
// means are paired comparisons.
inline SweepOutcome run_sweep(const SweepSpec& spec, const RunConfig& base) {
  if (spec.grid.empty()) throw RangeError("sweep grid must be nonempty");
  if (spec.drops < 1) throw RangeError("sweep drops must be >= 1");
  SweepOutcome out;
  for (double value : spec.grid) {
    const RunConfig cfg = apply_sweep_param(base, spec.param, value);
    for (int drop = 0; drop < spec.drops; ++drop) {
      const std::uint64_t drop_seed =
          derive_seed(base.master_seed, static_cast<std::uint64_t>(drop), "drop");
      DropBundle d;
      bool drop_ok = true;
      try {
        d = build_drop(cfg, drop_seed);
      } catch (const Error& e) {
        drop_ok = false;
        out.failures.push_back(spec.param + "=" + detail::fmt12(value) +
                               " drop=" + std::to_string(drop) + ": " +
                               e.what());
      }
      if (!drop_ok) continue;
      for (Method method : spec.methods) {
        try {
          const SolveReport rep = run_method(method, d.t, d.plan, d.sc,
                                             drop_seed, solver_from_config(cfg));
          out.table.rows.push_back({method_name(method), spec.param, value,
                                    drop, rep.sum_rate, rep.aom,
                                    rep.outer_iterations, rep.work_units});
        } catch (const Error& e) {
          out.failures.push_back(spec.param + "=" + detail::fmt12(value) +
                                 " drop=" + std::to_string(drop) +
                                 " method=" + method_name(method) + ": " +
                                 e.what());
        }
      }
    }
  }
  return out;
}

}  // namespace thzalloc
