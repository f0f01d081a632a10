#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "thzalloc/assignment.hpp"

using namespace thzalloc;
using Catch::Approx;

namespace {

// deterministic random feasible instance dims with B <= N
struct Dims {
  int b, s, n;
  std::vector<int> gamma;
};

Dims random_dims(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(1, 4);
  Dims out{d(rng), d(rng), d(rng), {}};
  out.n = std::max(out.n, out.b);
  std::uniform_int_distribution<int> g(0, 1);
  int budget = out.b * out.s;
  for (int i = 0; i < out.n; ++i) {
    int want = std::min(g(rng), out.s);
    if (want > budget) want = 0;
    budget -= want;
    out.gamma.push_back(want);
  }
  return out;
}

std::vector<double> random_q(int size, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> q(static_cast<std::size_t>(size));
  for (double& v : q) v = u(rng);
  return q;
}

}  // namespace

TEST_CASE("smallest constraint system") {
  ConstraintSystem cs = build_constraints(1, 1, 1, {1});
  REQUIRE(cs.t.rows == 4);
  REQUIRE(cs.t.cols == 1);
  CHECK(cs.t.at(0, 0) == 1);
  CHECK(cs.t.at(1, 0) == 1);
  CHECK(cs.t.at(2, 0) == 1);
  CHECK(cs.t.at(3, 0) == -1);
  CHECK(cs.k == std::vector<int>{1, 1, 1, -1});
}

TEST_CASE("constraint blocks match their definitions") {
  const int B = 2, S = 2, N = 2;
  ConstraintSystem cs = build_constraints(B, S, N, {1, 1});
  // NS + BS + 2N rows over BSN columns
  REQUIRE(cs.t.rows == N * S + B * S + 2 * N);
  REQUIRE(cs.t.cols == B * S * N);
  const Index3 idx{B, S, N};
  // C2 block: row (s,n) sums user n's column over BSs
  int r = 0;
  for (int s = 0; s < S; ++s)
    for (int n = 0; n < N; ++n, ++r) {
      CHECK(cs.tags[r] == RowTag::c2);
      CHECK(cs.k[r] == 1);
      for (int b = 0; b < B; ++b)
        for (int s2 = 0; s2 < S; ++s2)
          for (int n2 = 0; n2 < N; ++n2)
            CHECK(cs.t.at(r, idx(b, s2, n2)) ==
                  ((s2 == s && n2 == n) ? 1 : 0));
    }
  // C3 block: one row per (b,s), row sum N
  for (int b = 0; b < B; ++b)
    for (int s = 0; s < S; ++s, ++r) {
      CHECK(cs.tags[r] == RowTag::c3);
      int sum = 0;
      for (int c = 0; c < cs.t.cols; ++c) sum += cs.t.at(r, c);
      CHECK(sum == N);
      for (int n = 0; n < N; ++n) CHECK(cs.t.at(r, idx(b, s, n)) == 1);
    }
  // C4 blocks: F = -E elementwise
  for (int n = 0; n < N; ++n) {
    const int re = N * S + B * S + n;
    const int rf = re + N;
    CHECK(cs.k[re] == S);
    CHECK(cs.k[rf] == -1);
    for (int c = 0; c < cs.t.cols; ++c)
      CHECK(cs.t.at(rf, c) == -cs.t.at(re, c));
  }
}

TEST_CASE("lower-bound block negates the upper block at any size") {
  ConstraintSystem cs = build_constraints(3, 2, 4, {1, 0, 2, 1});
  const int base_e = 4 * 2 + 3 * 2;
  for (int n = 0; n < 4; ++n)
    for (int c = 0; c < cs.t.cols; ++c)
      CHECK(cs.t.at(base_e + 4 + n, c) == -cs.t.at(base_e + n, c));
}

TEST_CASE("fairness preconditions") {
  CHECK_THROWS_AS(build_constraints(2, 2, 2, {3, 0}), InfeasibleFairness);
  CHECK_THROWS_AS(build_constraints(1, 2, 3, {1, 1, 1}), InfeasibleFairness);
  CHECK_THROWS_AS(build_constraints(2, 2, 2, {1}), RangeError);
}

TEST_CASE("rate coefficients zero out blocked pairs") {
  NetworkScenario sc = random_scenario(2, 3, 30.0, 81);
  SpectrumPlan plan = make_plan_forced_s(tw_registry(3), 0, 3);
  ChannelTensor t = link_gains(sc, plan);
  t.psi.assign(t.psi.size(), 0);
  t.psi[static_cast<std::size_t>(1) * 3 + 2] = 1;  // block (b=1, n=2)
  PowerMatrix power(2, 3, 0.1);
  std::vector<double> q = rate_coefficients(power, t, plan, sc);
  for (int s = 0; s < 3; ++s) {
    CHECK(q[static_cast<std::size_t>(t.idx(1, s, 2))] == 0.0);
    CHECK(q[static_cast<std::size_t>(t.idx(0, s, 2))] > 0.0);
  }
}

TEST_CASE("single-BS coefficients match the closed form") {
  NetworkScenario sc = random_scenario(1, 2, 30.0, 82);
  sc.q_align = 0.0;
  SpectrumPlan plan = make_plan_forced_s(tw_registry(3), 0, 2);
  ChannelTensor t = link_gains(sc, plan);
  t.psi.assign(t.psi.size(), 0);
  PowerMatrix power(1, 2);
  power(0, 0) = 0.3;
  power(0, 1) = 0.7;
  std::vector<double> q = rate_coefficients(power, t, plan, sc);
  for (int s = 0; s < 2; ++s)
    for (int n = 0; n < 2; ++n) {
      const int i = t.idx(0, s, n);
      const double p = power(0, s);
      const double expected =
          plan.w * std::log2(1.0 + p * t.h2[i] /
                                       (p * t.h_tilde2[i] + sc.n0 * plan.w));
      CHECK(q[static_cast<std::size_t>(i)] == Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("coefficients match an independent scalar recomputation") {
  NetworkScenario sc = random_scenario(2, 2, 30.0, 83);
  SpectrumPlan plan = make_plan_forced_s(tw_registry(3), 0, 2);
  ChannelTensor t = link_gains(sc, plan);
  PowerMatrix power(2, 2);
  power(0, 0) = 0.4;
  power(0, 1) = 0.1;
  power(1, 0) = 0.2;
  power(1, 1) = 0.6;
  std::vector<double> q = rate_coefficients(power, t, plan, sc);
  for (int b = 0; b < 2; ++b)
    for (int s = 0; s < 2; ++s)
      for (int n = 0; n < 2; ++n) {
        const int i = t.idx(b, s, n);
        if (t.blocked(b, n)) {
          CHECK(q[static_cast<std::size_t>(i)] == 0.0);
          continue;
        }
        const int other = 1 - b;
        const double den = sc.q_align * power(other, s) *
                               t.h_bar2[t.idx(other, s, n)] +
                           power(b, s) * t.h_tilde2[i] + sc.n0 * plan.w;
        const double expected =
            plan.w * std::log2(1.0 + power(b, s) * t.h2[i] / den);
        CHECK(q[static_cast<std::size_t>(i)] == Approx(expected).epsilon(1e-12));
      }
}

TEST_CASE("worked two-sub-band assignment") {
  // q indexed (b=0, s, n): s0 -> (3,1), s1 -> (2,5)
  std::vector<double> q = {3, 1, 2, 5};
  double obj = 0;
  AssignmentMatrix a = solve_assignment(q, 1, 2, 2, {1, 1}, &obj);
  CHECK(obj == Approx(8.0));
  CHECK(a.at(0, 0, 0) == 1);
  CHECK(a.at(0, 0, 1) == 0);
  CHECK(a.at(0, 1, 1) == 1);
  CHECK(a.at(0, 1, 0) == 0);
}

TEST_CASE("uniform coefficients yield the forced objective") {
  std::vector<double> q(2 * 3 * 4, 2.5);
  double obj = 0;
  AssignmentMatrix a = solve_assignment(q, 2, 3, 4, {0, 0, 0, 0}, &obj);
  CHECK(obj == Approx(2 * 3 * 2.5));
  a.validate({0, 0, 0, 0});
}

TEST_CASE("positive rescaling leaves the assignment unchanged") {
  std::mt19937_64 rng(99);
  std::vector<double> q = random_q(3 * 2 * 4, rng);
  AssignmentMatrix a1 = solve_assignment(q, 3, 2, 4, {1, 1, 0, 1});
  for (double alpha : {4.0, 3.7, 0.125}) {
    std::vector<double> scaled(q);
    for (double& v : scaled) v *= alpha;
    AssignmentMatrix a2 = solve_assignment(scaled, 3, 2, 4, {1, 1, 0, 1});
    CHECK(a1.a == a2.a);
  }
}

TEST_CASE("lp equals exhaustive enumeration on random small instances") {
  std::mt19937_64 rng(123);
  int compared = 0;
  for (int trial = 0; trial < 150; ++trial) {
    Dims d = random_dims(rng);
    std::vector<double> q = random_q(d.b * d.s * d.n, rng);
    double lp_obj = 0;
    AssignmentMatrix a = solve_assignment(q, d.b, d.s, d.n, d.gamma, &lp_obj);
    a.validate(d.gamma);  // integrality & feasibility of the rounded output
    if (d.b * d.s * d.n <= 20) {
      auto [ia, iobj] = ilp_brute_force(q, d.b, d.s, d.n, d.gamma);
      CHECK(lp_obj == Approx(iobj).margin(1e-9));
      ++compared;
    }
  }
  CHECK(compared > 50);
}

TEST_CASE("repeated solves stay optimal across objective changes") {
  std::mt19937_64 rng(321);
  AssignmentSolver solver(2, 2, 2, {1, 1});
  for (int round = 0; round < 20; ++round) {
    std::vector<double> q = random_q(8, rng);
    AssignmentMatrix warm = solver.solve(q);
    double cold_obj = 0;
    solve_assignment(q, 2, 2, 2, {1, 1}, &cold_obj);
    CHECK(solver.objective() == Approx(cold_obj).margin(1e-9));
    warm.validate({1, 1});
  }
}

TEST_CASE("crash basis from a feasible hint") {
  const int B = 3, S = 4, N = 6;
  AssignmentMatrix hint(B, S, N);
  for (int b = 0; b < B; ++b)
    for (int s = 0; s < S; ++s) hint.at(b, s, (b + s) % N) = 1;
  hint.validate(std::vector<int>(N, 1));
  std::mt19937_64 rng(555);
  std::vector<double> q = random_q(B * S * N, rng);
  AssignmentSolver with_hint(B, S, N, std::vector<int>(N, 1));
  AssignmentMatrix a = with_hint.solve(q, &hint);
  double cold_obj = 0;
  solve_assignment(q, B, S, N, std::vector<int>(N, 1), &cold_obj);
  CHECK(with_hint.objective() == Approx(cold_obj).margin(1e-9));
  a.validate(std::vector<int>(N, 1));
}

TEST_CASE("infeasible shapes are reported") {
  // two BSs, one user, one sub-band: C2 and C3 cannot both hold
  std::vector<double> q = {1.0, 1.0};
  CHECK_THROWS_AS(solve_assignment(q, 2, 1, 1, {1}), LpInfeasible);
  CHECK_THROWS_AS(ilp_brute_force(q, 2, 1, 1, {1}), LpInfeasible);
}

TEST_CASE("all-zero coefficients still produce a feasible assignment") {
  std::vector<double> q(2 * 2 * 3, 0.0);
  double obj = 1;
  AssignmentMatrix a = solve_assignment(q, 2, 2, 3, {1, 1, 0}, &obj);
  CHECK(obj == 0.0);
  a.validate({1, 1, 0});
}

TEST_CASE("unimodularity oracle on hand matrices") {
  DenseIntMatrix good{2, 2, {1, 1, 0, 1}};
  CHECK(tum_oracle(good));
  DenseIntMatrix bad{2, 2, {1, 1, -1, 1}};
  CHECK_FALSE(tum_oracle(bad));
  DenseIntMatrix out_of_range{1, 1, {2}};
  CHECK_THROWS_AS(tum_oracle(out_of_range), EntriesOutOfRange);
}

TEST_CASE("constraint matrices pass the determinant oracle") {
  ConstraintSystem small = build_constraints(2, 2, 1, {1});
  CHECK(tum_oracle(small.t));  // sampled path (8x4)
  ConstraintSystem mid = build_constraints(2, 2, 2, {1, 1});
  CHECK(tum_exhaustive(mid.t, 3));
  CHECK(tum_sampled(mid.t, 8, 2000, 42));
}

TEST_CASE("assignment matrix helpers") {
  AssignmentMatrix a(2, 3, 2);
  a.at(0, 0, 0) = a.at(0, 1, 0) = a.at(0, 2, 1) = 1;
  a.at(1, 0, 1) = a.at(1, 1, 1) = a.at(1, 2, 0) = 1;
  CHECK(a.degree(0) == 3);
  CHECK(a.degree(1) == 3);
  CHECK(a.connected_bs(0) == 2);
  CHECK(a.user_of(1, 2) == 0);
  a.validate({1, 1});
  a.at(0, 0, 1) = 1;  // two users on one slot
  CHECK_THROWS_AS(a.validate({1, 1}), Error);
}
