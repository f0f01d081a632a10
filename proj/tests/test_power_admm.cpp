#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <random>

#include "thzalloc/power_admm.hpp"

using namespace thzalloc;
using Catch::Approx;

namespace {

PowerProblem realistic_problem(std::uint64_t seed, int bs = 3, int users = 6) {
  NetworkScenario sc = random_scenario(bs, users, 30.0, seed);
  SpectrumPlan plan = make_plan(tw_registry(3), 0.05, 0.5e9, 0.01);
  ChannelTensor t = link_gains(sc, plan);
  AssignmentMatrix a(bs, plan.s_star, users);
  for (int b = 0; b < bs; ++b)
    for (int s = 0; s < plan.s_star; ++s) a.at(b, s, (b + s) % users) = 1;
  return make_power_problem(a, t, plan, sc);
}

double row_power(const PowerMatrix& pb, int b) {
  double total = 0.0;
  for (int s = 0; s < pb.num_sub; ++s) total += pb(b, s) * pb(b, s);
  return total;
}

}  // namespace

TEST_CASE("ball projection basics") {
  SECTION("interior points are untouched") {
    std::vector<double> xi = {0.3, -0.4, 0.1};
    CHECK(project_ball(xi, 1.0) == xi);
  }
  SECTION("exterior points land on the boundary along the same ray") {
    std::vector<double> xi = {3.0, 4.0};
    std::vector<double> d = project_ball(xi, 4.0);
    CHECK(d[0] == Approx(1.2).epsilon(1e-15));
    CHECK(d[1] == Approx(1.6).epsilon(1e-15));
  }
  SECTION("zero input stays zero") {
    std::vector<double> xi = {0.0, 0.0};
    CHECK(project_ball(xi, 0.5) == xi);
  }
}

TEST_CASE("projection is idempotent and beats sampled candidates") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_real_distribution<double> radius(0.2, 1.5);
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 1 + static_cast<int>(rng() % 6);
    std::vector<double> xi(static_cast<std::size_t>(dim));
    for (double& v : xi) v = u(rng);
    const double p_max = radius(rng);
    std::vector<double> d = project_ball(xi, p_max);
    double norm2 = 0.0;
    for (double v : d) norm2 += v * v;
    CHECK(norm2 <= p_max * (1.0 + 1e-12));
    std::vector<double> dd = project_ball(d, p_max);
    for (int k = 0; k < dim; ++k)
      CHECK(dd[static_cast<std::size_t>(k)] ==
            Approx(d[static_cast<std::size_t>(k)]).margin(1e-12));
    // no sampled feasible point is closer to xi
    auto dist2 = [&](const std::vector<double>& a) {
      double t = 0.0;
      for (int k = 0; k < dim; ++k) {
        const double diff = a[static_cast<std::size_t>(k)] -
                            xi[static_cast<std::size_t>(k)];
        t += diff * diff;
      }
      return t;
    };
    const double best = dist2(d);
    for (int c = 0; c < 60; ++c) {
      std::vector<double> cand(static_cast<std::size_t>(dim));
      for (double& v : cand) v = u(rng);
      double c2 = 0.0;
      for (double v : cand) c2 += v * v;
      if (c2 > p_max) {
        const double s = std::sqrt(p_max / c2);
        for (double& v : cand) v *= s;
      }
      CHECK(best <= dist2(cand) + 1e-6);
    }
  }
}

TEST_CASE("unconstrained step matches scalar arithmetic") {
  PowerCoeffs co{PowerMatrix(1, 2), PowerMatrix(1, 2)};
  co.num(0, 0) = 6.0;
  co.num(0, 1) = 2.0;
  co.den0(0, 0) = 8.0;
  co.den0(0, 1) = 4.0;
  PowerMatrix delta(1, 2), z(1, 2);
  delta(0, 0) = 0.5;
  delta(0, 1) = 0.25;
  z(0, 0) = 0.1;
  z(0, 1) = -0.05;
  PowerMatrix p = admm_power_step(co, 2.0, delta, z, 2.2);
  // per slot: (k*num/den0 + 1.1*(delta+z)) / (k + 1.1) with k = 2
  CHECK(p(0, 0) ==
        Approx((2.0 * 0.75 + 1.1 * 0.6) / (2.0 + 1.1)).epsilon(1e-15));
  CHECK(p(0, 1) ==
        Approx((2.0 * 0.5 + 1.1 * 0.2) / (2.0 + 1.1)).epsilon(1e-15));
  // the rescaling never moves a slot's unconstrained stationary point
  PowerMatrix d2(1, 2), z2(1, 2);
  d2(0, 0) = 0.75;
  d2(0, 1) = 0.5;
  PowerMatrix fixed = admm_power_step(co, 0.37, d2, z2, 2.2);
  CHECK(fixed(0, 0) == Approx(0.75).epsilon(1e-14));
  CHECK(fixed(0, 1) == Approx(0.5).epsilon(1e-14));
}

TEST_CASE("huge penalty pins the step to the consensus point") {
  PowerCoeffs co{PowerMatrix(2, 2, 1.0), PowerMatrix(2, 2, 3.0)};
  PowerMatrix delta(2, 2), z(2, 2);
  delta(0, 0) = 0.4;
  delta(0, 1) = 0.2;
  delta(1, 0) = 0.3;
  delta(1, 1) = 0.1;
  z(0, 0) = 0.02;
  z(1, 1) = -0.01;
  PowerMatrix p = admm_power_step(co, 3.0, delta, z, 1e12);
  for (int b = 0; b < 2; ++b)
    for (int s = 0; s < 2; ++s)
      CHECK(p(b, s) == Approx(delta(b, s) + z(b, s)).margin(1e-9));
}

TEST_CASE("inactive coefficients make the step a pure consensus copy") {
  PowerCoeffs co{PowerMatrix(1, 3, 0.0), PowerMatrix(1, 3, 0.0)};
  PowerMatrix delta(1, 3), z(1, 3);
  delta(0, 0) = 0.7;
  delta(0, 1) = 0.1;
  delta(0, 2) = 0.4;
  z(0, 1) = 0.05;
  PowerMatrix p = admm_power_step(co, 1.0, delta, z, 2.2);
  for (int s = 0; s < 3; ++s)
    CHECK(p(0, s) == Approx(delta(0, s) + z(0, s)).epsilon(1e-15));
}

TEST_CASE("inner loop closes the consensus gap and stays feasible") {
  PowerProblem prob = realistic_problem(3);
  FpConfig outer;
  PowerMatrix start = initial_power(prob, outer);
  std::vector<double> gamma = update_gamma(prob, start);
  std::vector<double> y = update_y(prob, start, gamma);
  PowerCoeffs co = power_coeffs(prob, gamma, y);
  AdmmConfig cfg;
  PowerMatrix z(prob.idx.B, prob.idx.S, 0.0);
  AdmmInner inner = run_admm_inner(prob, co, start, z, cfg);
  CHECK(inner.residual <= cfg.eps_a);
  CHECK(inner.iterations <= cfg.l_max_inner);
  for (int b = 0; b < prob.idx.B; ++b)
    CHECK(row_power(inner.delta, b) <= prob.p_max * (1.0 + 1e-12));
}

TEST_CASE("full solve is deterministic and feasible") {
  PowerProblem prob = realistic_problem(4);
  AdmmResult r1 = run_admm(prob);
  AdmmResult r2 = run_admm(prob);
  CHECK(r1.p.p == r2.p.p);
  CHECK(r1.trace == r2.trace);
  CHECK(r1.inner_counts == r2.inner_counts);
  for (int b = 0; b < prob.idx.B; ++b)
    CHECK(row_power(r1.p_bar, b) <= prob.p_max * (1.0 + 1e-12));
  CHECK(r1.messages.payload_floats == prob.idx.S);
  CHECK(r1.messages.rounds ==
        2 * std::accumulate(r1.inner_counts.begin(), r1.inner_counts.end(), 0));
}

TEST_CASE("consensus solve tracks the priced solve closely") {
  for (std::uint64_t seed : {1, 2, 3}) {
    PowerProblem prob = realistic_problem(seed);
    FpConfig outer;
    FpResult fp = run_fp(prob, outer);
    AdmmResult ad = run_admm(prob, outer);
    REQUIRE(fp.trace.back() > 0.0);
    const double gap =
        std::abs(fp.trace.back() - ad.trace.back()) / fp.trace.back();
    CHECK(gap <= 0.02);
  }
}

TEST_CASE("warm inner loops settle to very few rounds") {
  PowerProblem prob = realistic_problem(5);
  AdmmResult res = run_admm(prob);
  REQUIRE(res.inner_counts.size() >= 2);
  // after the first outer round the consensus starts at the previous
  // feasible point, so the gap is already nearly closed
  CHECK(res.inner_counts.back() <= 2);
}

TEST_CASE("restarting at the solution leaves it in place") {
  PowerProblem prob = realistic_problem(6);
  FpConfig outer;
  AdmmResult first = run_admm(prob, outer);
  AdmmResult again = run_admm(prob, outer, {}, &first.p_bar);
  REQUIRE(first.trace.back() > 0.0);
  CHECK(std::abs(again.trace.back() - first.trace.back()) <=
        1e-2 * first.trace.back());
  CHECK(again.iterations <= first.iterations);
}
