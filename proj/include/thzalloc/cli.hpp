#pragma once
// Command-line front end: plan / solve / sweep / verify. Kept in a header
// so the test suite can drive cli_main in-process; tools/thzcli.cpp is the
// binary shell around it.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "config.hpp"
#include "results.hpp"
#include "sweep.hpp"

namespace thzalloc {

namespace detail {

inline void print_plan(const SpectrumPlan& plan) {
  std::printf("w_i = %s\n", fmt12(plan.w_i).c_str());
  std::printf("w_e = %s\n", fmt12(plan.w_e).c_str());
  std::printf("s_star = %d\n", plan.s_star);
  std::printf("w = %s\n", fmt12(plan.w).c_str());
  std::string centers;
  for (int s = 0; s < plan.s_star; ++s) {
    if (s) centers += ",";
    centers += fmt12(plan.center(s));
  }
  std::printf("centers = %s\n", centers.c_str());
}

inline bool verify_tum() {
  const ConstraintSystem cs = build_constraints(2, 2, 2, {1, 1});
  return tum_exhaustive(cs.t, 4) && tum_sampled(cs.t, 8, 2000, 7);
}

inline bool verify_lp_vs_ilp() {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> dim(1, 3);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int compared = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int b = dim(rng), s = dim(rng), n = dim(rng);
    if (b > n || b * s * n > 20) continue;
    std::vector<int> gamma(static_cast<std::size_t>(n));
    long long total = 0;
    for (int& g : gamma) {
      g = unif(rng) < 0.5 ? 1 : 0;
      total += g;
    }
    if (total > static_cast<long long>(b) * s) continue;
    std::vector<double> q(static_cast<std::size_t>(b * s * n));
    for (double& v : q) v = unif(rng);
    AssignmentSolver solver(b, s, n, gamma);
    AssignmentMatrix a = solver.solve(q);
    auto [ia, iobj] = ilp_brute_force(q, b, s, n, gamma);
    if (std::abs(solver.objective() - iobj) > 1e-9 * std::max(1.0, iobj))
      return false;
    (void)a;
    (void)ia;
    ++compared;
  }
  return compared > 20;
}

inline bool verify_projection() {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> span(-2.0, 2.0);
  std::uniform_int_distribution<int> dim(1, 6);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = dim(rng);
    const double p_max = 0.5 + 3.5 * std::abs(span(rng)) / 2.0;
    std::vector<double> x(static_cast<std::size_t>(m));
    for (double& v : x) v = span(rng);
    const std::vector<double> px = project_ball(x, p_max);
    const std::vector<double> ppx = project_ball(px, p_max);
    double norm2 = 0, drift = 0;
    for (int i = 0; i < m; ++i) {
      norm2 += px[static_cast<std::size_t>(i)] * px[static_cast<std::size_t>(i)];
      drift = std::max(drift, std::abs(px[static_cast<std::size_t>(i)] -
                                       ppx[static_cast<std::size_t>(i)]));
    }
    if (drift > 1e-12) return false;
    if (norm2 > p_max * (1.0 + 1e-12)) return false;
    auto dist2 = [&](const std::vector<double>& y) {
      double acc = 0;
      for (int i = 0; i < m; ++i) {
        const double dd = x[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(i)];
        acc += dd * dd;
      }
      return acc;
    };
    for (int cand = 0; cand < 50; ++cand) {
      std::vector<double> y(static_cast<std::size_t>(m));
      double ny = 0;
      for (double& v : y) {
        v = span(rng);
        ny += v * v;
      }
      if (ny > p_max) {
        const double scale = std::sqrt(p_max / ny) * 0.999999;
        for (double& v : y) v *= scale;
      }
      if (dist2(px) > dist2(y) + 1e-9) return false;
    }
  }
  return true;
}

inline bool verify_monotone() {
  const SpectrumPlan plan = make_plan(tw_registry(3), 0.05, 0.5e9, 0.01);
  for (std::uint64_t seed : {1, 2, 3}) {
    const NetworkScenario sc = random_scenario(3, 6, 30.0, seed);
    const ChannelTensor t = link_gains(sc, plan);
    const AssignmentMatrix a = initial_association(t, sc);
    const PowerProblem prob = make_power_problem(a, t, plan, sc);
    const FpResult res = run_fp(prob);
    for (std::size_t i = 1; i < res.trace.size(); ++i)
      if (res.trace[i] <
          res.trace[i - 1] - 1e-9 * std::max(std::abs(res.trace[i - 1]), 1.0))
        return false;
    if (!res.converged) return false;
  }
  return true;
}

}  // namespace detail

inline int cli_main(int argc, const char* const* argv) {
  CLI::App app{"THz downlink spectrum, association and power toolkit"};
  app.require_subcommand(1);

  std::string config_path, method_flag, out_flag, format_flag = "csv";
  std::uint64_t seed_flag = 0;
  bool seed_set = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "config file path");
    cmd->add_option("--seed", seed_flag, "master seed override")
        ->each([&](const std::string&) { seed_set = true; });
    cmd->add_option("--method", method_flag,
                    "fp | admm | eq-power | random-uasa | single-conn");
    cmd->add_option("--out", out_flag, "output directory override");
    cmd->add_option("--format", format_flag, "csv | json")
        ->check(CLI::IsMember({"csv", "json"}));
  };
  CLI::App* cmd_plan = app.add_subcommand("plan", "spectrum partition only");
  CLI::App* cmd_solve = app.add_subcommand("solve", "one drop, one method");
  CLI::App* cmd_sweep = app.add_subcommand("sweep", "Monte-Carlo sweep");
  CLI::App* cmd_verify = app.add_subcommand("verify", "fast property suites");
  for (CLI::App* c : {cmd_plan, cmd_solve, cmd_sweep, cmd_verify})
    add_common(c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    if (seed_set) cfg.master_seed = seed_flag;
    if (!method_flag.empty()) {
      method_from_name(method_flag);  // throws RangeError on junk
      cfg.method = method_flag;
    }
    if (const char* env = std::getenv("THZALLOC_OUT"); env && *env)
      cfg.out_dir = env;
    if (!out_flag.empty()) cfg.out_dir = out_flag;

    if (cmd_plan->parsed()) {
      detail::print_plan(plan_from_config(cfg));
      return 0;
    }

    if (cmd_solve->parsed()) {
      const Method method = method_from_name(cfg.method);
      const std::uint64_t drop_seed = derive_seed(cfg.master_seed, 0, "drop");
      const SolveReport rep = solve_single(cfg, method, drop_seed);
      std::printf("method = %s\n", method_name(rep.method));
      std::printf("sum_rate = %s\n", detail::fmt12(rep.sum_rate).c_str());
      std::printf("aom = %s\n", detail::fmt12(rep.aom).c_str());
      std::printf("outer_iterations = %d\n", rep.outer_iterations);
      std::printf("work_units = %lld\n", rep.work_units);
      ResultTable table;
      table.rows.push_back({method_name(rep.method), "-", 0.0, 0, rep.sum_rate,
                            rep.aom, rep.outer_iterations, rep.work_units});
      std::filesystem::create_directories(cfg.out_dir);
      for (const std::string& p :
           export_results(table, cfg.out_dir, {format_flag}))
        std::printf("wrote %s\n", p.c_str());
      return 0;
    }

    if (cmd_sweep->parsed()) {
      if (!cfg.sweep)
        throw RangeError("sweep subcommand needs a [sweep] section");
      const SweepOutcome outcome = run_sweep(*cfg.sweep, cfg);
      for (const std::string& f : outcome.failures)
        std::fprintf(stderr, "failed point: %s\n", f.c_str());
      if (outcome.table.rows.empty()) {
        std::fprintf(stderr, "every sweep point failed\n");
        return 1;
      }
      std::filesystem::create_directories(cfg.out_dir);
      for (const std::string& p :
           export_results(outcome.table, cfg.out_dir, {format_flag}))
        std::printf("wrote %s\n", p.c_str());
      std::printf("rows = %zu\n", outcome.table.rows.size());
      std::printf("failures = %zu\n", outcome.failures.size());
      return 0;
    }

    // verify
    struct Suite {
      const char* name;
      bool (*run)();
    };
    const Suite suites[] = {
        {"tum", detail::verify_tum},
        {"lp-vs-ilp", detail::verify_lp_vs_ilp},
        {"projection", detail::verify_projection},
        {"fp-monotone", detail::verify_monotone},
    };
    bool all_ok = true;
    for (const Suite& s : suites) {
      bool ok = false;
      try {
        ok = s.run();
      } catch (const Error& e) {
        std::fprintf(stderr, "%s threw: %s\n", s.name, e.what());
      }
      std::printf("%s %s\n", ok ? "ok" : "FAIL", s.name);
      all_ok = all_ok && ok;
    }
    return all_ok ? 0 : 1;
  } catch (const Infeasible& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return 1;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const RangeError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 1;
  }
}

}  // namespace thzalloc
