#pragma once
// Run configuration: a flat sectioned key-value file covering the scenario,
// the spectrum plan, the solver tolerances, and an optional sweep. Every
// field has the journal-table default, unknown keys are rejected, and each
// numeric is range-checked with the field name in the message.

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "absorption.hpp"
#include "channel.hpp"
#include "common.hpp"
#include "orchestrator.hpp"
#include "spectrum.hpp"

namespace thzalloc {

struct SweepSpec {
  std::string param;  // q_align | k_scale | hi_level | csi_zeta | eta | num_bs
  std::vector<double> grid;
  int drops = 20;
  std::vector<Method> methods = {Method::fp};
};

struct RunConfig {
  // scenario
  int num_bs = 6;
  int num_users = 12;
  double radius = 30.0;
  double p_max = 1.0;
  double q_align = 0.2;
  double g_tx = 316.22776601683796;  // 25 dB
  double g_rx = 316.22776601683796;
  double nakagami_m = 20.0;
  double blockage_density = 0.005;
  double n0 = 4e-21;
  int gamma_floor = 1;  // uniform per-user sub-band floor
  double hi_kt = 0.0;
  double hi_kr = 0.0;
  double csi_zeta = 1.0;
  // spectrum
  int tw_index = 3;
  std::optional<TwFit> custom_fit;
  double epsilon = 0.05;  // absorption-variation tolerance, 1/m
  double w_g = 0.5e9;
  double b_th = 0.01;
  std::optional<double> w_i_fixed;
  std::optional<double> w_e_fixed;
  double k_scale = 1.0;  // global absorption scale (sweepable)
  // solver
  double eps1 = 1e-3;
  double eps_a = 1e-3;
  double eps3 = 1e-3;
  double eps_b = 1e-8;
  double rho = 2.2;
  int l_max = 200;
  int l_max_inner = 50;
  int max_outer = 30;
  // run
  std::string method = "fp";
  std::string out_dir = "out";
  std::uint64_t master_seed = 1;
  std::optional<SweepSpec> sweep;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  std::size_t b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& v,
                           int lineno) {
  std::size_t pos = 0;
  double x = 0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty())
    throw ParseError("line " + std::to_string(lineno) + ": bad number for " +
                     key);
  return x;
}

inline long long parse_int(const std::string& key, const std::string& v,
                           int lineno) {
  std::size_t pos = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty())
    throw ParseError("line " + std::to_string(lineno) + ": bad integer for " +
                     key);
  return x;
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

}  // namespace detail

// Range validation with the offending field named in every message.
inline void validate_config(const RunConfig& c) {
  auto fail = [](const std::string& m) { throw RangeError(m); };
  if (c.num_bs < 1) fail("num_bs must be >= 1");
  if (c.num_users < 1) fail("num_users must be >= 1");
  if (!(c.radius > 0)) fail("radius must be > 0");
  if (!(c.p_max > 0)) fail("p_max must be > 0");
  if (c.q_align < 0 || c.q_align > 1) fail("q_align must be in [0,1]");
  if (!(c.g_tx > 0)) fail("g_tx must be > 0");
  if (!(c.g_rx > 0)) fail("g_rx must be > 0");
  if (!(c.nakagami_m >= 0.5)) fail("nakagami_m must be >= 0.5");
  if (c.blockage_density < 0) fail("blockage_density must be >= 0");
  if (!(c.n0 > 0)) fail("n0 must be > 0");
  if (c.gamma_floor < 0) fail("gamma_floor must be >= 0");
  if (c.hi_kt < 0) fail("hi_kt must be >= 0");
  if (c.hi_kr < 0) fail("hi_kr must be >= 0");
  if (c.csi_zeta < 0 || c.csi_zeta > 1) fail("csi_zeta must be in [0,1]");
  if (!c.custom_fit && (c.tw_index < 1 || c.tw_index > 4))
    fail("tw_index must be in [1,4]");
  if (c.epsilon < 0) fail("epsilon must be >= 0");
  if (c.w_g < 0) fail("w_g must be >= 0");
  if (c.b_th < 0 || c.b_th > 1) fail("b_th must be in [0,1]");
  if (c.w_i_fixed.has_value() != c.w_e_fixed.has_value())
    fail("w_i_fixed and w_e_fixed must be set together");
  if (c.w_i_fixed && !(*c.w_i_fixed > 0)) fail("w_i_fixed must be > 0");
  if (c.w_e_fixed && !(*c.w_e_fixed > 0)) fail("w_e_fixed must be > 0");
  if (!(c.k_scale > 0)) fail("k_scale must be > 0");
  if (!(c.eps1 > 0)) fail("eps1 must be > 0");
  if (!(c.eps_a > 0)) fail("eps_a must be > 0");
  if (!(c.eps3 > 0)) fail("eps3 must be > 0");
  if (!(c.eps_b > 0)) fail("eps_b must be > 0");
  if (!(c.rho > 0)) fail("rho must be > 0");
  if (c.l_max < 1) fail("l_max must be >= 1");
  if (c.l_max_inner < 1) fail("l_max_inner must be >= 1");
  if (c.max_outer < 1) fail("max_outer must be >= 1");
  method_from_name(c.method);  // throws RangeError on junk
  if (c.out_dir.empty()) fail("out_dir must be nonempty");
  if (c.sweep) {
    static const std::vector<std::string> kParams = {
        "q_align", "k_scale", "hi_level", "csi_zeta", "eta", "num_bs"};
    bool known = false;
    for (const std::string& p : kParams) known = known || p == c.sweep->param;
    if (!known) fail("sweep param must be one of q_align, k_scale, hi_level, csi_zeta, eta, num_bs");
    if (c.sweep->grid.empty()) fail("sweep grid must be nonempty");
    if (c.sweep->drops < 1) fail("sweep drops must be >= 1");
    if (c.sweep->methods.empty()) fail("sweep methods must be nonempty");
  }
}

inline RunConfig parse_config(const std::string& text) {
  RunConfig c;
  bool fit_seen = false;
  TwFit fit;
  std::istringstream in(text);
  std::string raw;
  std::string section = "";
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    const std::size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParseError("line " + std::to_string(lineno) +
                         ": unterminated section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section != "scenario" && section != "spectrum" &&
          section != "solver" && section != "run" && section != "sweep")
        throw ParseError("line " + std::to_string(lineno) +
                         ": unknown section [" + section + "]");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("line " + std::to_string(lineno) +
                       ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (key.empty())
      throw ParseError("line " + std::to_string(lineno) + ": empty key");

    auto num = [&] { return detail::parse_double(key, val, lineno); };
    auto integer = [&] {
      return static_cast<int>(detail::parse_int(key, val, lineno));
    };
    bool handled = true;
    if (section == "scenario") {
      if (key == "num_bs") c.num_bs = integer();
      else if (key == "num_users") c.num_users = integer();
      else if (key == "radius") c.radius = num();
      else if (key == "p_max") c.p_max = num();
      else if (key == "q_align") c.q_align = num();
      else if (key == "g_tx") c.g_tx = num();
      else if (key == "g_rx") c.g_rx = num();
      else if (key == "nakagami_m") c.nakagami_m = num();
      else if (key == "blockage_density") c.blockage_density = num();
      else if (key == "n0") c.n0 = num();
      else if (key == "gamma_floor") c.gamma_floor = integer();
      else if (key == "hi_kt") c.hi_kt = num();
      else if (key == "hi_kr") c.hi_kr = num();
      else if (key == "csi_zeta") c.csi_zeta = num();
      else handled = false;
    } else if (section == "spectrum") {
      if (key == "tw_index") c.tw_index = integer();
      else if (key == "epsilon") c.epsilon = num();
      else if (key == "w_g") c.w_g = num();
      else if (key == "b_th") c.b_th = num();
      else if (key == "w_i_fixed") c.w_i_fixed = num();
      else if (key == "w_e_fixed") c.w_e_fixed = num();
      else if (key == "k_scale") c.k_scale = num();
      else if (key == "fit_t1") { fit.t1 = num(); fit_seen = true; }
      else if (key == "fit_t2") { fit.t2 = num(); fit_seen = true; }
      else if (key == "fit_t3") { fit.t3 = num(); fit_seen = true; }
      else if (key == "fit_t4") { fit.t4 = num(); fit_seen = true; }
      else if (key == "fit_f_lo") { fit.f_lo = num(); fit_seen = true; }
      else if (key == "fit_f_hi") { fit.f_hi = num(); fit_seen = true; }
      else handled = false;
    } else if (section == "solver") {
      if (key == "eps1") c.eps1 = num();
      else if (key == "eps_a") c.eps_a = num();
      else if (key == "eps3") c.eps3 = num();
      else if (key == "eps_b") c.eps_b = num();
      else if (key == "rho") c.rho = num();
      else if (key == "l_max") c.l_max = integer();
      else if (key == "l_max_inner") c.l_max_inner = integer();
      else if (key == "max_outer") c.max_outer = integer();
      else handled = false;
    } else if (section == "run") {
      if (key == "method") c.method = val;
      else if (key == "out_dir") c.out_dir = val;
      else if (key == "master_seed")
        c.master_seed =
            static_cast<std::uint64_t>(detail::parse_int(key, val, lineno));
      else handled = false;
    } else if (section == "sweep") {
      if (!c.sweep) c.sweep.emplace();
      if (key == "param") c.sweep->param = val;
      else if (key == "grid") {
        c.sweep->grid.clear();
        for (const std::string& item : detail::split_list(val))
          c.sweep->grid.push_back(detail::parse_double(key, item, lineno));
      } else if (key == "drops")
        c.sweep->drops = integer();
      else if (key == "methods") {
        c.sweep->methods.clear();
        for (const std::string& item : detail::split_list(val))
          c.sweep->methods.push_back(method_from_name(item));
      } else
        handled = false;
    } else {
      throw ParseError("line " + std::to_string(lineno) +
                       ": key outside any section: " + key);
    }
    if (!handled)
      throw ParseError("line " + std::to_string(lineno) + ": unknown key " +
                       key + " in section [" + section + "]");
  }
  if (fit_seen) c.custom_fit = fit;
  validate_config(c);
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file " + path);
  std::ostringstream body;
  body << in.rdbuf();
  return parse_config(body.str());
}

// Canonical serialization; load(save(c)) reproduces c exactly (all values
// printed with 17 significant digits).
inline std::string config_text(const RunConfig& c) {
  std::ostringstream out;
  auto d = [&](const char* k, double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s = %.17g\n", k, v);
    out << buf;
  };
  out << "[scenario]\n";
  out << "num_bs = " << c.num_bs << "\n";
  out << "num_users = " << c.num_users << "\n";
  d("radius", c.radius);
  d("p_max", c.p_max);
  d("q_align", c.q_align);
  d("g_tx", c.g_tx);
  d("g_rx", c.g_rx);
  d("nakagami_m", c.nakagami_m);
  d("blockage_density", c.blockage_density);
  d("n0", c.n0);
  out << "gamma_floor = " << c.gamma_floor << "\n";
  d("hi_kt", c.hi_kt);
  d("hi_kr", c.hi_kr);
  d("csi_zeta", c.csi_zeta);
  out << "\n[spectrum]\n";
  out << "tw_index = " << c.tw_index << "\n";
  d("epsilon", c.epsilon);
  d("w_g", c.w_g);
  d("b_th", c.b_th);
  if (c.w_i_fixed) d("w_i_fixed", *c.w_i_fixed);
  if (c.w_e_fixed) d("w_e_fixed", *c.w_e_fixed);
  d("k_scale", c.k_scale);
  if (c.custom_fit) {
    d("fit_t1", c.custom_fit->t1);
    d("fit_t2", c.custom_fit->t2);
    d("fit_t3", c.custom_fit->t3);
    d("fit_t4", c.custom_fit->t4);
    d("fit_f_lo", c.custom_fit->f_lo);
    d("fit_f_hi", c.custom_fit->f_hi);
  }
  out << "\n[solver]\n";
  d("eps1", c.eps1);
  d("eps_a", c.eps_a);
  d("eps3", c.eps3);
  d("eps_b", c.eps_b);
  d("rho", c.rho);
  out << "l_max = " << c.l_max << "\n";
  out << "l_max_inner = " << c.l_max_inner << "\n";
  out << "max_outer = " << c.max_outer << "\n";
  out << "\n[run]\n";
  out << "method = " << c.method << "\n";
  out << "out_dir = " << c.out_dir << "\n";
  out << "master_seed = " << c.master_seed << "\n";
  if (c.sweep) {
    out << "\n[sweep]\n";
    out << "param = " << c.sweep->param << "\n";
    out << "grid = ";
    for (std::size_t i = 0; i < c.sweep->grid.size(); ++i) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", c.sweep->grid[i]);
      out << (i ? "," : "") << buf;
    }
    out << "\n";
    out << "drops = " << c.sweep->drops << "\n";
    out << "methods = ";
    for (std::size_t i = 0; i < c.sweep->methods.size(); ++i)
      out << (i ? "," : "") << method_name(c.sweep->methods[i]);
    out << "\n";
  }
  return out.str();
}

inline void save_config(const RunConfig& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write config file " + path);
  out << config_text(c);
  if (!out) throw IoError("short write to " + path);
}

// Scenario for one drop: positions from the drop seed, every physics knob
// from the config. The drop seed also keys the fading/blockage/CSI streams.
inline NetworkScenario make_scenario(const RunConfig& c, std::uint64_t seed) {
  NetworkScenario sc = random_scenario(c.num_bs, c.num_users, c.radius, seed);
  sc.p_max = c.p_max;
  sc.q_align = c.q_align;
  sc.g_tx = c.g_tx;
  sc.g_rx = c.g_rx;
  sc.nakagami_m = c.nakagami_m;
  sc.blockage_density = c.blockage_density;
  sc.n0 = c.n0;
  sc.gamma_floor.assign(static_cast<std::size_t>(c.num_users), c.gamma_floor);
  sc.hi_kt = c.hi_kt;
  sc.hi_kr = c.hi_kr;
  sc.csi_zeta = c.csi_zeta;
  sc.validate();
  return sc;
}

inline SpectrumPlan plan_from_config(const RunConfig& c) {
  const TwFit& fit = c.custom_fit ? *c.custom_fit : tw_registry(c.tw_index);
  if (c.w_i_fixed)
    return make_plan(fit, c.epsilon, c.w_g, c.b_th, *c.w_i_fixed, *c.w_e_fixed);
  return make_plan(fit, c.epsilon, c.w_g, c.b_th);
}

inline AlternateConfig solver_from_config(const RunConfig& c) {
  AlternateConfig a;
  a.eps3 = c.eps3;
  a.max_outer = c.max_outer;
  a.fp.eps1 = c.eps1;
  a.fp.eps_b = c.eps_b;
  a.fp.l_max = c.l_max;
  a.admm.eps_a = c.eps_a;
  a.admm.l_max_inner = c.l_max_inner;
  a.admm.rho = c.rho;
  return a;
}

}  // namespace thzalloc
