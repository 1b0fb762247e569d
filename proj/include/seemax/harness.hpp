#pragma once

#include "channels.hpp"
#include "model.hpp"
#include "ssslm.hpp"
#include "suiap.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace seemax {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double db2lin(double db) { return std::pow(10.0, db / 10.0); }

// Benchmark labels: objective ("SEE" or "CS") joined with a duplexing tag
// ("FD", "HD", "BD", "TDD").
struct Benchmark {
  enum class Kind { Uni, Bd, Tdd };
  std::string label;
  Objective objective = Objective::SEE;
  Kind kind = Kind::Uni;
  Mode mode = Mode::UniFD;
};

inline Benchmark parse_benchmark(const std::string& label) {
  const auto dash = label.find('-');
  if (dash == std::string::npos)
    throw ConfigError("invalid benchmark label \"" + label + "\"");
  const std::string obj = label.substr(0, dash);
  const std::string dup = label.substr(dash + 1);
  Benchmark b;
  b.label = label;
  if (obj == "SEE")
    b.objective = Objective::SEE;
  else if (obj == "CS")
    b.objective = Objective::CS;
  else
    throw ConfigError("invalid benchmark label \"" + label + "\"");
  if (dup == "FD") {
    b.kind = Benchmark::Kind::Uni;
    b.mode = Mode::UniFD;
  } else if (dup == "HD") {
    b.kind = Benchmark::Kind::Uni;
    b.mode = Mode::UniHD;
  } else if (dup == "BD") {
    b.kind = Benchmark::Kind::Bd;
    b.mode = Mode::BD;
  } else if (dup == "TDD") {
    b.kind = Benchmark::Kind::Tdd;
    b.mode = Mode::UniHD;
  } else {
    throw ConfigError("invalid benchmark label \"" + label + "\"");
  }
  return b;
}

inline const std::vector<std::string>& sweep_vocabulary() {
  static const std::vector<std::string> v = {
      "p_max_db", "noise_var_db", "kappa_db", "eve_pos_m", "m_e",
      "mu",       "p_zero_db",    "p_fd_db",  "rho_si_db", "n_antennas"};
  return v;
}

// The default simulated setup: P_max = 0 dB, P_0 = -20 dB, mu = 0.9,
// kappa = beta = -40 dB, noise at -40 dB, no cancellation overhead.
inline NodeParams default_node_params() {
  NodeParams n;
  n.kappa = db2lin(-40.0);
  n.beta = db2lin(-40.0);
  n.mu = 0.9;
  n.p_zero = db2lin(-20.0);
  n.p_max = db2lin(0.0);
  n.p_fd = 0.0;
  n.noise_var = db2lin(-40.0);
  return n;
}

struct ScenarioConfig {
  Dims dims{};
  NodeParams alice = default_node_params();
  NodeParams bob = default_node_params();
  double rho_bar = 1e-2;
  double rho_si = 1.0;
  double k_rician = 10.0;
  std::string geom_type = "triangle";  // "triangle" | "line"
  double tri_side = 1.0;
  double eve_pos = 50.0;
  double ab_distance = 100.0;
  double rho_eve = 1.0;  // interference fraction Eve cannot cancel (BD)
  bool csi_statistical = false;
  int g_count = 100;
  std::string sweep_param = "p_max_db";
  std::vector<double> sweep_values{0.0};
  int n_realizations = 100;
  std::uint64_t seed = 1;
  std::vector<std::string> benchmarks{"SEE-FD"};
  SuiapConfig suiap{};
  SsslmConfig ssslm{};
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& j, const std::vector<std::string>& allowed,
                       const std::string& ctx) {
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      throw ConfigError("unknown key \"" + (ctx.empty() ? "" : ctx + ".") +
                        item.key() + "\"");
  }
}

inline double jnum(const json& j, const char* key, double dflt,
                   const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return dflt;
  if (!it->is_number())
    throw ConfigError("\"" + ctx + key + "\" must be a number");
  return it->get<double>();
}

inline int jint(const json& j, const char* key, int dflt,
                const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return dflt;
  if (!it->is_number_integer())
    throw ConfigError("\"" + ctx + key + "\" must be an integer");
  return it->get<int>();
}

inline std::string jstr(const json& j, const char* key, const std::string& dflt,
                        const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return dflt;
  if (!it->is_string())
    throw ConfigError("\"" + ctx + key + "\" must be a string");
  return it->get<std::string>();
}

inline NodeParams parse_node(const json* j, const std::string& ctx) {
  NodeParams n = default_node_params();
  if (!j) return n;
  check_keys(*j,
             {"kappa_db", "beta_db", "mu", "p_zero_db", "p_max_db", "p_fd_db",
              "noise_var_db"},
             ctx);
  n.kappa = db2lin(jnum(*j, "kappa_db", -40.0, ctx + "."));
  n.beta = db2lin(jnum(*j, "beta_db", -40.0, ctx + "."));
  n.mu = jnum(*j, "mu", 0.9, ctx + ".");
  n.p_zero = db2lin(jnum(*j, "p_zero_db", -20.0, ctx + "."));
  n.p_max = db2lin(jnum(*j, "p_max_db", 0.0, ctx + "."));
  n.noise_var = db2lin(jnum(*j, "noise_var_db", -40.0, ctx + "."));
  auto it = j->find("p_fd_db");
  if (it != j->end() && !it->is_null()) {
    if (!it->is_number())
      throw ConfigError("\"" + ctx + ".p_fd_db\" must be a number or null");
    n.p_fd = db2lin(it->get<double>());
  }
  if (!(n.mu > 0.0 && n.mu <= 1.0))
    throw ConfigError("\"" + ctx + ".mu\" must lie in (0, 1]");
  return n;
}

inline void require_integral(double v, const std::string& what) {
  if (!(v >= 1.0) || v != std::floor(v) || v > 64.0)
    throw ConfigError(what + " must be an integer in [1, 64]");
}

}  // namespace detail

inline ScenarioConfig parse_config_json(const nlohmann::json& j) {
  using detail::jint;
  using detail::jnum;
  using detail::jstr;
  ScenarioConfig c;
  detail::check_keys(
      j,
      {"dims", "alice", "bob", "rho_bar_db", "rho_si_db", "k_rician",
       "geometry", "mode", "objective", "rho_eve", "csi", "sweep",
       "n_realizations", "seed", "benchmarks", "suiap", "ssslm"},
      "");

  if (auto it = j.find("dims"); it != j.end() && !it->is_null()) {
    detail::check_keys(*it, {"n_a", "m_a", "n_b", "m_b", "m_e"}, "dims");
    c.dims.n_a = jint(*it, "n_a", 4, "dims.");
    c.dims.m_a = jint(*it, "m_a", 4, "dims.");
    c.dims.n_b = jint(*it, "n_b", 4, "dims.");
    c.dims.m_b = jint(*it, "m_b", 4, "dims.");
    c.dims.m_e = jint(*it, "m_e", 4, "dims.");
    for (int v : {c.dims.n_a, c.dims.m_a, c.dims.n_b, c.dims.m_b, c.dims.m_e})
      if (v < 1 || v > 64)
        throw ConfigError("\"dims\" entries must lie in [1, 64]");
  }

  {
    auto ita = j.find("alice");
    auto itb = j.find("bob");
    c.alice = detail::parse_node(
        ita != j.end() && !ita->is_null() ? &*ita : nullptr, "alice");
    c.bob = detail::parse_node(
        itb != j.end() && !itb->is_null() ? &*itb : nullptr, "bob");
  }

  c.rho_bar = db2lin(jnum(j, "rho_bar_db", -20.0, ""));
  c.rho_si = db2lin(jnum(j, "rho_si_db", 0.0, ""));
  c.k_rician = jnum(j, "k_rician", 10.0, "");
  if (c.k_rician < 0.0) throw ConfigError("\"k_rician\" must be nonnegative");

  if (auto it = j.find("geometry"); it != j.end() && !it->is_null()) {
    detail::check_keys(*it, {"type", "side", "eve_pos_m", "ab_distance_m"},
                       "geometry");
    c.geom_type = jstr(*it, "type", "triangle", "geometry.");
    c.tri_side = jnum(*it, "side", 1.0, "geometry.");
    c.ab_distance = jnum(*it, "ab_distance_m", 100.0, "geometry.");
    c.eve_pos = jnum(*it, "eve_pos_m", 0.5 * c.ab_distance, "geometry.");
    if (c.geom_type != "triangle" && c.geom_type != "line")
      throw ConfigError("\"geometry.type\" must be \"triangle\" or \"line\"");
    if (c.geom_type == "triangle" && c.tri_side <= 0.0)
      throw ConfigError("\"geometry.side\" must be positive");
    if (c.geom_type == "line" &&
        !(c.eve_pos > 0.0 && c.eve_pos < c.ab_distance))
      throw ConfigError(
          "\"geometry.eve_pos_m\" must lie strictly between the nodes");
  }

  c.rho_eve = jnum(j, "rho_eve", 1.0, "");
  if (!(c.rho_eve >= 0.0 && c.rho_eve <= 1.0))
    throw ConfigError("\"rho_eve\" must lie in [0, 1]");

  if (auto it = j.find("csi"); it != j.end() && !it->is_null()) {
    detail::check_keys(*it, {"type", "g_count"}, "csi");
    const std::string type = jstr(*it, "type", "exact", "csi.");
    if (type == "statistical")
      c.csi_statistical = true;
    else if (type != "exact")
      throw ConfigError("\"csi.type\" must be \"exact\" or \"statistical\"");
    c.g_count = jint(*it, "g_count", 100, "csi.");
    if (c.g_count < 1) throw ConfigError("\"csi.g_count\" must be positive");
  }

  if (auto it = j.find("sweep"); it != j.end() && !it->is_null()) {
    detail::check_keys(*it, {"param", "values"}, "sweep");
    c.sweep_param = jstr(*it, "param", "p_max_db", "sweep.");
    if (auto vit = it->find("values"); vit != it->end() && !vit->is_null()) {
      if (!vit->is_array())
        throw ConfigError("\"sweep.values\" must be an array of numbers");
      c.sweep_values.clear();
      for (const auto& v : *vit) {
        if (!v.is_number())
          throw ConfigError("\"sweep.values\" must be an array of numbers");
        c.sweep_values.push_back(v.get<double>());
      }
    }
  }
  const auto& vocab = sweep_vocabulary();
  if (std::find(vocab.begin(), vocab.end(), c.sweep_param) == vocab.end())
    throw ConfigError("unknown sweep parameter \"" + c.sweep_param + "\"");
  if (c.sweep_values.empty())
    throw ConfigError("\"sweep.values\" must not be empty");
  if (c.sweep_param == "eve_pos_m") {
    if (c.geom_type != "line")
      throw ConfigError("sweep over \"eve_pos_m\" requires line geometry");
    for (double v : c.sweep_values)
      if (!(v > 0.0 && v < c.ab_distance))
        throw ConfigError(
            "\"sweep.values\" for eve_pos_m must lie strictly between the nodes");
  }
  if (c.sweep_param == "m_e" || c.sweep_param == "n_antennas")
    for (double v : c.sweep_values)
      detail::require_integral(v, "\"sweep.values\" for " + c.sweep_param);

  c.n_realizations = jint(j, "n_realizations", 100, "");
  if (c.n_realizations < 1)
    throw ConfigError("\"n_realizations\" must be positive");
  {
    auto it = j.find("seed");
    if (it != j.end() && !it->is_null()) {
      if (!it->is_number_integer() || it->get<long long>() < 0)
        throw ConfigError("\"seed\" must be a nonnegative integer");
      c.seed = it->get<std::uint64_t>();
    }
  }

  const std::string mode = jstr(j, "mode", "UniFD", "");
  const std::string objective = jstr(j, "objective", "SEE", "");
  if (objective != "SEE" && objective != "CS")
    throw ConfigError("\"objective\" must be \"SEE\" or \"CS\"");
  std::string dup;
  if (mode == "UniFD")
    dup = "FD";
  else if (mode == "UniHD")
    dup = "HD";
  else if (mode == "BD")
    dup = "BD";
  else if (mode == "TDD")
    dup = "TDD";
  else
    throw ConfigError(
        "\"mode\" must be one of \"UniFD\", \"UniHD\", \"BD\", \"TDD\"");
  c.benchmarks = {objective + "-" + dup};

  if (auto it = j.find("benchmarks"); it != j.end() && !it->is_null()) {
    if (!it->is_array() || it->empty())
      throw ConfigError("\"benchmarks\" must be a nonempty array of labels");
    c.benchmarks.clear();
    for (const auto& v : *it) {
      if (!v.is_string())
        throw ConfigError("\"benchmarks\" must be a nonempty array of labels");
      c.benchmarks.push_back(v.get<std::string>());
    }
  }
  for (const auto& label : c.benchmarks) {
    const Benchmark b = parse_benchmark(label);
    if (c.csi_statistical && b.kind != Benchmark::Kind::Uni)
      throw ConfigError("statistical CSI supports only FD/HD benchmarks; got \"" +
                        label + "\"");
  }

  if (auto it = j.find("suiap"); it != j.end() && !it->is_null()) {
    detail::check_keys(
        *it, {"c_min", "lambda_min", "max_outer", "max_inner", "tol",
              "subproblem_max_iter"},
        "suiap");
    c.suiap.c_min = jnum(*it, "c_min", c.suiap.c_min, "suiap.");
    c.suiap.lambda_min = jnum(*it, "lambda_min", c.suiap.lambda_min, "suiap.");
    c.suiap.max_outer = jint(*it, "max_outer", c.suiap.max_outer, "suiap.");
    c.suiap.max_inner = jint(*it, "max_inner", c.suiap.max_inner, "suiap.");
    c.suiap.subproblem.tol = jnum(*it, "tol", c.suiap.subproblem.tol, "suiap.");
    c.suiap.subproblem.max_iter =
        jint(*it, "subproblem_max_iter", c.suiap.subproblem.max_iter, "suiap.");
  }
  if (auto it = j.find("ssslm"); it != j.end() && !it->is_null()) {
    detail::check_keys(
        *it, {"c_min", "lambda_min", "zero_tol", "max_outer",
              "max_intermediate", "max_inner", "gc1_cap", "tol",
              "subproblem_max_iter"},
        "ssslm");
    c.ssslm.c_min = jnum(*it, "c_min", c.ssslm.c_min, "ssslm.");
    c.ssslm.lambda_min = jnum(*it, "lambda_min", c.ssslm.lambda_min, "ssslm.");
    c.ssslm.zero_tol = jnum(*it, "zero_tol", c.ssslm.zero_tol, "ssslm.");
    c.ssslm.max_outer = jint(*it, "max_outer", c.ssslm.max_outer, "ssslm.");
    c.ssslm.max_intermediate =
        jint(*it, "max_intermediate", c.ssslm.max_intermediate, "ssslm.");
    c.ssslm.max_inner = jint(*it, "max_inner", c.ssslm.max_inner, "ssslm.");
    c.ssslm.gc1_cap = jint(*it, "gc1_cap", c.ssslm.gc1_cap, "ssslm.");
    c.ssslm.subproblem.tol = jnum(*it, "tol", c.ssslm.subproblem.tol, "ssslm.");
    c.ssslm.subproblem.max_iter =
        jint(*it, "subproblem_max_iter", c.ssslm.subproblem.max_iter, "ssslm.");
  }
  return c;
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  return parse_config_json(j);
}

// Small built-in scenario used by the `demo` subcommand and by the
// determinism checks: four benchmarks over a three-point budget sweep.
inline ScenarioConfig demo_scenario() {
  ScenarioConfig cfg;
  cfg.benchmarks = {"SEE-FD", "SEE-HD", "CS-FD", "CS-HD"};
  cfg.sweep_param = "p_max_db";
  cfg.sweep_values = {-10.0, 0.0, 10.0};
  cfg.n_realizations = 2;
  cfg.seed = 1;
  return cfg;
}

// Returns the scenario with one sweep value applied.
inline ScenarioConfig apply_sweep(const ScenarioConfig& base, double value) {
  ScenarioConfig c = base;
  const std::string& p = base.sweep_param;
  if (p == "p_max_db") {
    c.alice.p_max = c.bob.p_max = db2lin(value);
  } else if (p == "noise_var_db") {
    c.alice.noise_var = c.bob.noise_var = db2lin(value);
  } else if (p == "kappa_db") {
    c.alice.kappa = c.alice.beta = c.bob.kappa = c.bob.beta = db2lin(value);
  } else if (p == "eve_pos_m") {
    c.eve_pos = value;
  } else if (p == "m_e") {
    c.dims.m_e = static_cast<int>(value);
  } else if (p == "mu") {
    c.alice.mu = c.bob.mu = value;
  } else if (p == "p_zero_db") {
    c.alice.p_zero = c.bob.p_zero = db2lin(value);
  } else if (p == "p_fd_db") {
    c.alice.p_fd = c.bob.p_fd = db2lin(value);
  } else if (p == "rho_si_db") {
    c.rho_si = db2lin(value);
  } else if (p == "n_antennas") {
    c.dims.n_a = c.dims.m_a = c.dims.n_b = c.dims.m_b = static_cast<int>(value);
  } else {
    throw ConfigError("unknown sweep parameter \"" + p + "\"");
  }
  return c;
}

inline ChannelGenConfig channel_config(const ScenarioConfig& sc) {
  ChannelGenConfig g;
  g.rho_bar = sc.rho_bar;
  g.rho_si = sc.rho_si;
  g.k_rician = sc.k_rician;
  g.dims = sc.dims;
  g.geom = sc.geom_type == "line"
               ? Geometry::line(sc.eve_pos, sc.ab_distance)
               : Geometry::triangle(sc.tri_side);
  return g;
}

// One per-realization record; `see` is the attained clipped secrecy energy
// efficiency regardless of the design objective.
struct SweepRow {
  std::string sweep_param;
  double sweep_value = 0.0;
  std::string benchmark;
  int realization = 0;
  double see = std::numeric_limits<double>::quiet_NaN();
  double rate = std::numeric_limits<double>::quiet_NaN();
  double power = std::numeric_limits<double>::quiet_NaN();
  int converged = 0;
  int outer_iters = 0;
};

struct AggregateRow {
  double sweep_value = 0.0;
  std::string benchmark;
  double mean_see = 0.0;
  double mean_rate = 0.0;
  double mean_power = 0.0;
  double std_see = 0.0;
  int n = 0;
};

struct SweepResult {
  std::vector<AggregateRow> aggregates;
  std::vector<SweepRow> raw;  // retained for CDFs
  int failures = 0;
};

namespace detail {

inline void parallel_for(int n, int threads,
                         const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, n > 0 ? n : 1));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= n) return;
        fn(i);
      }
    });
  for (auto& th : pool) th.join();
}

}  // namespace detail

inline SweepResult run_sweep(const ScenarioConfig& cfg, int threads = 1) {
  const int V = static_cast<int>(cfg.sweep_values.size());
  const int R = cfg.n_realizations;
  std::vector<Benchmark> benches;
  benches.reserve(cfg.benchmarks.size());
  for (const auto& label : cfg.benchmarks)
    benches.push_back(parse_benchmark(label));
  const int B = static_cast<int>(benches.size());
  bool need_bd = false;
  for (const auto& b : benches)
    if (b.kind != Benchmark::Kind::Uni) need_bd = true;

  SweepResult res;
  res.raw.resize(static_cast<std::size_t>(V) * R * B);

  auto run_task = [&](int task) {
    const int vi = task / R;
    const int r = task % R;
    const ScenarioConfig sc = apply_sweep(cfg, cfg.sweep_values[vi]);
    const std::size_t base_idx =
        (static_cast<std::size_t>(vi) * R + static_cast<std::size_t>(r)) * B;
    for (int bi = 0; bi < B; ++bi) {
      SweepRow& row = res.raw[base_idx + static_cast<std::size_t>(bi)];
      row.sweep_param = cfg.sweep_param;
      row.sweep_value = cfg.sweep_values[vi];
      row.benchmark = benches[bi].label;
      row.realization = r;
    }
    try {
      ChannelGenConfig gcfg = channel_config(sc);
      gcfg.seed = Rng::stream(cfg.seed, {static_cast<std::uint64_t>(vi),
                                         static_cast<std::uint64_t>(r)})
                      .next_u64();
      if (sc.csi_statistical) {
        const Ensemble ens = gen_statistical_eve(gcfg, sc.g_count, need_bd);
        for (int bi = 0; bi < B; ++bi) {
          SweepRow& row = res.raw[base_idx + static_cast<std::size_t>(bi)];
          try {
            const SsslmResult out =
                ssslm_run(ens, sc.alice, sc.bob, benches[bi].mode,
                          benches[bi].objective, sc.ssslm);
            row.rate = out.rate;
            row.power = out.power;
            row.see = out.rate / out.power;
            row.converged = out.converged ? 1 : 0;
            row.outer_iters = out.outer_iters;
          } catch (const std::exception&) {
          }
        }
      } else {
        const ChannelSet ch = gen_channel_set(gcfg, need_bd);
        for (int bi = 0; bi < B; ++bi) {
          SweepRow& row = res.raw[base_idx + static_cast<std::size_t>(bi)];
          const Benchmark& b = benches[bi];
          try {
            SuiapResult out;
            switch (b.kind) {
              case Benchmark::Kind::Uni:
                out = suiap_run(ch, sc.alice, sc.bob, b.mode, b.objective,
                                sc.suiap);
                break;
              case Benchmark::Kind::Bd:
                out = suiap_bd_run(ch, sc.alice, sc.bob,
                                   EveDecodingMode{sc.rho_eve}, b.objective,
                                   sc.suiap);
                break;
              case Benchmark::Kind::Tdd:
                out = tdd_baseline_run(ch, sc.alice, sc.bob, b.objective,
                                       sc.suiap);
                break;
            }
            row.rate = out.rate;
            row.power = out.power;
            row.see = out.rate / out.power;
            row.converged = out.converged ? 1 : 0;
            row.outer_iters = out.outer_iters;
          } catch (const std::exception&) {
          }
        }
      }
    } catch (const std::exception&) {
    }
  };

  detail::parallel_for(V * R, threads, run_task);

  for (const auto& row : res.raw)
    if (!std::isfinite(row.see)) ++res.failures;

  for (int vi = 0; vi < V; ++vi) {
    for (int bi = 0; bi < B; ++bi) {
      AggregateRow agg;
      agg.sweep_value = cfg.sweep_values[vi];
      agg.benchmark = benches[bi].label;
      double sum = 0.0, sum_rate = 0.0, sum_power = 0.0;
      std::vector<double> sees;
      for (int r = 0; r < R; ++r) {
        const SweepRow& row =
            res.raw[(static_cast<std::size_t>(vi) * R + r) * B + bi];
        if (!std::isfinite(row.see)) continue;
        sum += row.see;
        sum_rate += row.rate;
        sum_power += row.power;
        sees.push_back(row.see);
      }
      agg.n = static_cast<int>(sees.size());
      if (agg.n > 0) {
        agg.mean_see = sum / agg.n;
        agg.mean_rate = sum_rate / agg.n;
        agg.mean_power = sum_power / agg.n;
        double ss = 0.0;
        for (double v : sees) ss += (v - agg.mean_see) * (v - agg.mean_see);
        agg.std_see = agg.n > 1 ? std::sqrt(ss / (agg.n - 1)) : 0.0;
      }
      res.aggregates.push_back(std::move(agg));
    }
  }
  return res;
}

inline std::string format_g12(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline constexpr const char* kCsvHeader =
    "sweep_param, sweep_value, benchmark, realization, "
    "see_bits_per_hz_per_joule, rate_bits_per_s_per_hz, power_watts, "
    "converged, outer_iters";

inline void write_csv(const SweepResult& res, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << kCsvHeader << "\n";
  for (const auto& r : res.raw) {
    out << r.sweep_param << ", " << format_g12(r.sweep_value) << ", "
        << r.benchmark << ", " << r.realization << ", " << format_g12(r.see)
        << ", " << format_g12(r.rate) << ", " << format_g12(r.power) << ", "
        << r.converged << ", " << r.outer_iters << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline void write_summary_csv(const SweepResult& res, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "sweep_value, benchmark, mean_see, mean_rate, mean_power, std_see, n\n";
  for (const auto& a : res.aggregates) {
    out << format_g12(a.sweep_value) << ", " << a.benchmark << ", "
        << format_g12(a.mean_see) << ", " << format_g12(a.mean_rate) << ", "
        << format_g12(a.mean_power) << ", " << format_g12(a.std_see) << ", "
        << a.n << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

// Empirical distribution: sorted values paired with probabilities k/n.
inline std::vector<std::pair<double, double>> compute_cdf(
    std::vector<double> values) {
  if (values.empty())
    throw std::invalid_argument("compute_cdf: empty input");
  std::sort(values.begin(), values.end());
  std::vector<std::pair<double, double>> cdf;
  cdf.reserve(values.size());
  const double n = static_cast<double>(values.size());
  for (std::size_t k = 0; k < values.size(); ++k)
    cdf.emplace_back(values[k], static_cast<double>(k + 1) / n);
  return cdf;
}

inline void write_cdf_csv(const std::vector<std::pair<double, double>>& cdf,
                          const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "value, prob\n";
  for (const auto& [v, p] : cdf)
    out << format_g12(v) << ", " << format_g12(p) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

// Minimal reader for the CSV dialect written above (", " separators, no
// quoting). Returns the named column parsed as doubles, non-finite entries
// dropped.
inline std::vector<double> read_csv_column(const std::string& path,
                                           const std::string& column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      std::string tok = line.substr(
          pos, comma == std::string::npos ? std::string::npos : comma - pos);
      const auto b = tok.find_first_not_of(" \t\r");
      const auto e = tok.find_last_not_of(" \t\r");
      out.push_back(b == std::string::npos ? "" : tok.substr(b, e - b + 1));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    return out;
  };
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty CSV file: " + path);
  const auto header = split(line);
  std::size_t col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == column) col = i;
  if (col == header.size())
    throw std::runtime_error("column \"" + column + "\" not found in " + path);
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (col >= cells.size()) continue;
    try {
      const double v = std::stod(cells[col]);
      if (std::isfinite(v)) values.push_back(v);
    } catch (const std::exception&) {
    }
  }
  return values;
}

}  // namespace seemax
