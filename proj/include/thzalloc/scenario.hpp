#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "common.hpp"

namespace thzalloc {

struct Point {
  double x = 0;
  double y = 0;
};

inline double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

// One network drop: geometry plus every physical and impairment parameter
// that is not part of the spectrum plan.
struct NetworkScenario {
  std::vector<Point> bs_positions;
  std::vector<Point> user_positions;
  double p_max = 1.0;          // W per BS
  double q_align = 0.2;        // beam-alignment probability on interferers
  double g_tx = 316.22776601683796;  // 25 dB
  double g_rx = 316.22776601683796;
  double nakagami_m = 20.0;
  double blockage_density = 0.005;  // 1/m
  double n0 = 4e-21;                // W/Hz
  std::vector<int> gamma_floor;     // per-user minimum sub-band count
  double hi_kt = 0.0;
  double hi_kr = 0.0;
  double csi_zeta = 1.0;
  std::uint64_t rng_seed = 1;

  int num_bs() const { return static_cast<int>(bs_positions.size()); }
  int num_users() const { return static_cast<int>(user_positions.size()); }

  void validate() const {
    if (bs_positions.empty() || user_positions.empty())
      throw RangeError("scenario needs at least one BS and one user");
    if (!(p_max > 0)) throw RangeError("p_max must be > 0");
    if (q_align < 0 || q_align > 1) throw RangeError("q_align must be in [0,1]");
    if (!(g_tx > 0) || !(g_rx > 0)) throw RangeError("antenna gains must be > 0");
    if (!(nakagami_m >= 0.5)) throw RangeError("nakagami_m must be >= 0.5");
    if (blockage_density < 0) throw RangeError("blockage_density must be >= 0");
    if (!(n0 > 0)) throw RangeError("n0 must be > 0");
    if (gamma_floor.size() != user_positions.size())
      throw RangeError("gamma_floor must have one entry per user");
    for (int g : gamma_floor)
      if (g < 0) throw RangeError("gamma_floor entries must be >= 0");
    if (hi_kt < 0 || hi_kr < 0) throw RangeError("impairment levels must be >= 0");
    if (csi_zeta < 0 || csi_zeta > 1) throw RangeError("csi_zeta must be in [0,1]");
    for (int b = 0; b < num_bs(); ++b)
      for (int n = 0; n < num_users(); ++n)
        if (distance(bs_positions[b], user_positions[n]) == 0)
          throw ZeroDistance("BS and user coincide");
  }
};

// Uniform draw inside a disk of the given radius centered at the origin.
inline std::vector<Point> random_points_in_disk(int count, double radius,
                                                std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point> pts(static_cast<std::size_t>(count));
  for (auto& p : pts) {
    const double r = radius * std::sqrt(u(rng));
    const double phi = 2.0 * kPi * u(rng);
    p = {r * std::cos(phi), r * std::sin(phi)};
  }
  return pts;
}

// Random drop with all non-geometry parameters at their defaults. The
// position stream is derived from the seed with its own tag so that fading,
// blockage and CSI draws elsewhere cannot shift it.
inline NetworkScenario random_scenario(int num_bs, int num_users,
                                       double radius, std::uint64_t seed) {
  if (num_bs < 1 || num_users < 1) throw RangeError("need >= 1 BS and user");
  if (!(radius > 0)) throw RangeError("radius must be > 0");
  NetworkScenario sc;
  std::mt19937_64 rng(derive_seed(seed, 0, "positions"));
  sc.bs_positions = random_points_in_disk(num_bs, radius, rng);
  sc.user_positions = random_points_in_disk(num_users, radius, rng);
  sc.gamma_floor.assign(static_cast<std::size_t>(num_users), 1);
  sc.rng_seed = seed;
  return sc;
}

}  // namespace thzalloc
