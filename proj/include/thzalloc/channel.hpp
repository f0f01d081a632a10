#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "common.hpp"
#include "scenario.hpp"
#include "spectrum.hpp"

namespace thzalloc {

// Transmit power per (BS, sub-band), watts.
struct PowerMatrix {
  int num_bs = 0;
  int num_sub = 0;
  std::vector<double> p;

  PowerMatrix() = default;
  PowerMatrix(int b, int s, double value = 0.0)
      : num_bs(b), num_sub(s),
        p(static_cast<std::size_t>(b) * static_cast<std::size_t>(s), value) {}
  // gcc 11 -O2 reports spurious -Warray-bounds here after inlining vector
  // storage into fixed-trip-count loops
#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Warray-bounds"
  double& operator()(int b, int s) { return p.data()[b * num_sub + s]; }
  double operator()(int b, int s) const { return p.data()[b * num_sub + s]; }
#pragma GCC diagnostic pop
};

// Per-link power gains for one drop. h2 is the desired-link gain, h_tilde2
// the molecular-absorption-noise gain, h_bar2 the absorption-free gain seen
// by interference paths; h2 = h_bar2*exp(-k d) and h2 + h_tilde2 = h_bar2
// hold elementwise. psi marks blocked (b,n) pairs. h2_est is filled by
// perturb_csi and consumed by the solvers only.
struct ChannelTensor {
  Index3 idx;
  std::vector<double> h2, h_tilde2, h_bar2;
  std::vector<double> h2_est;
  std::vector<std::uint8_t> psi;   // B*N, row-major (b,n)
  std::vector<double> dist;        // B*N, meters
  std::vector<double> k_abs;       // per sub-band absorption actually applied

  bool blocked(int b, int n) const {
    return psi[static_cast<std::size_t>(b) * idx.N + n] != 0;
  }
  double d(int b, int n) const {
    return dist[static_cast<std::size_t>(b) * idx.N + n];
  }
  bool has_estimates() const { return !h2_est.empty(); }
  // Solver-side desired-link gain: the estimate when present, truth otherwise.
  double h2_solver(int i) const { return has_estimates() ? h2_est[i] : h2[i]; }
  // Estimated variants of the other gains share the fading estimate and the
  // known deterministic absorption split.
  double h_bar2_solver(int i) const {
    if (!has_estimates()) return h_bar2[i];
    return h2[i] > 0 ? h_bar2[i] * (h2_est[i] / h2[i]) : 0.0;
  }
  double h_tilde2_solver(int i) const {
    if (!has_estimates()) return h_tilde2[i];
    return h2[i] > 0 ? h_tilde2[i] * (h2_est[i] / h2[i]) : 0.0;
  }
};

// Sectored pattern: full main-lobe gain inside the beamwidth, g_min outside.
inline double antenna_gain(double theta, double theta_main, double g_max,
                           double g_min) {
  return std::abs(theta) <= theta_main ? g_max : g_min;
}

// C = G_tx G_rx c^2 / (4 pi)^2; h_bar2 = C d^-2 chi f^-2.
inline double channel_constant(const NetworkScenario& sc) {
  const double c_over_4pi = kSpeedOfLight / (4.0 * kPi);
  return sc.g_tx * sc.g_rx * c_over_4pi * c_over_4pi;
}

// Blockage mask: psi=1 with probability 1-exp(-eta d), independent per link.
inline std::vector<std::uint8_t> sample_blockage(const NetworkScenario& sc) {
  const int nb = sc.num_bs(), nu = sc.num_users();
  std::vector<std::uint8_t> psi(static_cast<std::size_t>(nb) * nu, 0);
  std::mt19937_64 rng(derive_seed(sc.rng_seed, 0, "blockage"));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int b = 0; b < nb; ++b)
    for (int n = 0; n < nu; ++n) {
      const double d = distance(sc.bs_positions[b], sc.user_positions[n]);
      const double p_block = 1.0 - std::exp(-sc.blockage_density * d);
      psi[static_cast<std::size_t>(b) * nu + n] = u(rng) < p_block ? 1 : 0;
    }
  return psi;
}

// Builds gains for every (b,s,n) link. Fading is one unit-mean Gamma draw
// per triple, frozen for the drop. k_scale scales the fitted absorption;
// k_override (per sub-band, 1/m) replaces the fit entirely when given.
inline ChannelTensor link_gains(const NetworkScenario& sc,
                                const SpectrumPlan& plan, double k_scale = 1.0,
                                const std::vector<double>* k_override = nullptr) {
  const int nb = sc.num_bs(), ns = plan.s_star, nu = sc.num_users();
  ChannelTensor t;
  t.idx = Index3{nb, ns, nu};
  const int total = t.idx.size();
  t.h2.resize(total);
  t.h_tilde2.resize(total);
  t.h_bar2.resize(total);
  t.dist.resize(static_cast<std::size_t>(nb) * nu);
  t.k_abs.resize(static_cast<std::size_t>(ns));
  if (k_override && static_cast<int>(k_override->size()) != ns)
    throw RangeError("k_override needs one value per sub-band");
  for (int s = 0; s < ns; ++s)
    t.k_abs[s] = k_override ? (*k_override)[static_cast<std::size_t>(s)]
                            : k_scale * plan.absorption(s);

  const double c0 = channel_constant(sc);
  std::mt19937_64 rng(derive_seed(sc.rng_seed, 0, "fading"));
  std::gamma_distribution<double> gamma(sc.nakagami_m, 1.0 / sc.nakagami_m);
  for (int b = 0; b < nb; ++b)
    for (int n = 0; n < nu; ++n) {
      const double d = distance(sc.bs_positions[b], sc.user_positions[n]);
      if (d == 0) throw ZeroDistance("link distance is zero");
      t.dist[static_cast<std::size_t>(b) * nu + n] = d;
    }
  for (int b = 0; b < nb; ++b)
    for (int s = 0; s < ns; ++s) {
      const double f = plan.center(s);
      const double spread = c0 / (f * f);
      for (int n = 0; n < nu; ++n) {
        const double d = t.d(b, n);
        const double chi = gamma(rng);
        const double bar = spread * chi / (d * d);
        const double att = std::exp(-t.k_abs[s] * d);
        const int i = t.idx(b, s, n);
        t.h_bar2[i] = bar;
        t.h2[i] = bar * att;
        t.h_tilde2[i] = bar * (1.0 - att);
      }
    }
  t.psi = sample_blockage(sc);
  return t;
}

// Imperfect CSI: the true amplitude satisfies h = zeta*h_hat + sqrt(1-zeta^2)e
// with e complex Gaussian of variance C f^-2 d^-2 (the mean absorption-free
// link power). The engine inverts this for h_hat from the true gain and a
// fresh error draw; zeta=1 copies, zeta=0 draws an independent channel.
inline void perturb_csi(ChannelTensor& t, const NetworkScenario& sc,
                        const SpectrumPlan& plan, double zeta,
                        std::uint64_t seed) {
  if (zeta < 0 || zeta > 1) throw RangeError("zeta must be in [0,1]");
  const int total = t.idx.size();
  t.h2_est.resize(total);
  if (zeta == 1.0) {
    t.h2_est = t.h2;
    return;
  }
  const double c0 = channel_constant(sc);
  std::mt19937_64 rng(derive_seed(seed, 0, "csi"));
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int b = 0; b < t.idx.B; ++b)
    for (int s = 0; s < t.idx.S; ++s) {
      const double f = plan.center(s);
      for (int n = 0; n < t.idx.N; ++n) {
        const int i = t.idx(b, s, n);
        const double d = t.d(b, n);
        const double sigma2 = c0 / (f * f * d * d);
        // complex e with E|e|^2 = sigma2
        const double er = gauss(rng) * std::sqrt(0.5 * sigma2);
        const double ei = gauss(rng) * std::sqrt(0.5 * sigma2);
        if (zeta == 0.0) {
          t.h2_est[i] = er * er + ei * ei;
          continue;
        }
        const double root = std::sqrt(1.0 - zeta * zeta);
        const double re = (std::sqrt(t.h2[i]) - root * er) / zeta;
        const double im = (-root * ei) / zeta;
        t.h2_est[i] = re * re + im * im;
      }
    }
}

enum class SinrVariant { ideal, hardware_impaired };

// SINR of user n served by BS b on sub-band s. Interference comes from every
// other BS active on s, attenuated by the alignment probability q; the
// impaired variant adds transceiver distortion terms to the denominator.
inline double sinr(int b, int s, int n, const PowerMatrix& power,
                   const ChannelTensor& t, const SpectrumPlan& plan,
                   const NetworkScenario& sc,
                   SinrVariant variant = SinrVariant::ideal,
                   bool use_estimates = false) {
  const int i = t.idx(b, s, n);
  auto g_sig = [&](int j) { return use_estimates ? t.h2_solver(j) : t.h2[j]; };
  auto g_bar = [&](int j) {
    return use_estimates ? t.h_bar2_solver(j) : t.h_bar2[j];
  };
  auto g_til = [&](int j) {
    return use_estimates ? t.h_tilde2_solver(j) : t.h_tilde2[j];
  };
  const double p_own = power(b, s);
  double den = p_own * g_til(i) + sc.n0 * plan.w;
  for (int bp = 0; bp < t.idx.B; ++bp) {
    if (bp == b) continue;
    den += sc.q_align * power(bp, s) * g_bar(t.idx(bp, s, n));
  }
  if (variant == SinrVariant::hardware_impaired) {
    const double kt2 = sc.hi_kt * sc.hi_kt, kr2 = sc.hi_kr * sc.hi_kr;
    den += (kt2 + kr2) * p_own * g_sig(i);
    for (int bp = 0; bp < t.idx.B; ++bp) {
      if (bp == b) continue;
      den += kr2 * sc.q_align * power(bp, s) * g_sig(t.idx(bp, s, n));
    }
  }
  return p_own * g_sig(i) / den;
}

// w log2(1+SINR) on unblocked links, exactly zero on blocked ones.
inline double blockage_aware_rate(int b, int s, int n,
                                  const PowerMatrix& power,
                                  const ChannelTensor& t,
                                  const SpectrumPlan& plan,
                                  const NetworkScenario& sc,
                                  SinrVariant variant = SinrVariant::ideal,
                                  bool use_estimates = false) {
  if (t.blocked(b, n)) return 0.0;
  const double g = sinr(b, s, n, power, t, plan, sc, variant, use_estimates);
  return plan.w * std::log2(1.0 + g);
}

}  // namespace thzalloc
