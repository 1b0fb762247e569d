#include "seemax/harness.hpp"

#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace seemax;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path d = fs::temp_directory_path() / "seemax_harness";
  fs::create_directories(d);
  return d;
}

fs::path write_file(const std::string& name, const std::string& content) {
  const fs::path p = temp_dir() / name;
  std::ofstream out(p, std::ios::binary);
  out << content;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small deterministic scenario shared by the golden, determinism, and
// trend checks.
ScenarioConfig small_scenario() {
  const auto j = nlohmann::json::parse(R"({
    "dims": {"n_a": 2, "m_a": 2, "n_b": 2, "m_b": 2, "m_e": 2},
    "sweep": {"param": "p_max_db", "values": [0, 10]},
    "n_realizations": 2,
    "seed": 7,
    "benchmarks": ["SEE-FD", "SEE-HD", "CS-FD"]
  })");
  return parse_config_json(j);
}

}  // namespace

TEST_CASE("configuration parsing") {
  SECTION("an empty object yields the documented defaults") {
    const fs::path p = write_file("minimal.json", "{}");
    const ScenarioConfig c = load_config(p.string());
    REQUIRE(c.dims.n_a == 4);
    REQUIRE(c.dims.m_e == 4);
    REQUIRE(std::abs(c.alice.p_max - 1.0) <= 1e-15);
    REQUIRE(std::abs(c.alice.p_zero - 0.01) <= 1e-15);
    REQUIRE(std::abs(c.alice.kappa - 1e-4) <= 1e-18);
    REQUIRE(std::abs(c.alice.noise_var - 1e-4) <= 1e-18);
    REQUIRE(c.alice.mu == 0.9);
    REQUIRE(c.alice.p_fd == 0.0);
    REQUIRE(std::abs(c.rho_bar - 1e-2) <= 1e-16);
    REQUIRE(c.rho_si == 1.0);
    REQUIRE(c.k_rician == 10.0);
    REQUIRE(c.geom_type == "triangle");
    REQUIRE(!c.csi_statistical);
    REQUIRE(c.sweep_param == "p_max_db");
    REQUIRE((c.sweep_values == std::vector<double>{0.0}));
    REQUIRE(c.n_realizations == 100);
    REQUIRE(c.seed == 1);
    REQUIRE((c.benchmarks == std::vector<std::string>{"SEE-FD"}));
  }

  SECTION("decibel fields convert to linear scale") {
    const fs::path p =
        write_file("db.json", R"({"alice": {"p_max_db": -10}})");
    const ScenarioConfig c = load_config(p.string());
    REQUIRE(std::abs(c.alice.p_max - 0.1) <= 1e-15);
    REQUIRE(std::abs(c.bob.p_max - 1.0) <= 1e-15);
  }

  SECTION("a misspelled key is rejected by name") {
    const fs::path p =
        write_file("typo.json", R"({"alice": {"pmax_db": 0}})");
    REQUIRE_THROWS_AS(load_config(p.string()), ConfigError);
    REQUIRE_THROWS_WITH(load_config(p.string()),
                        Catch::Matchers::ContainsSubstring("pmax_db"));
    const fs::path q = write_file("typo_root.json", R"({"benchmark": []})");
    REQUIRE_THROWS_WITH(load_config(q.string()),
                        Catch::Matchers::ContainsSubstring("benchmark"));
  }

  SECTION("mode and objective compose the default benchmark") {
    const fs::path p = write_file(
        "mode.json", R"({"mode": "TDD", "objective": "CS"})");
    REQUIRE((load_config(p.string()).benchmarks ==
             std::vector<std::string>{"CS-TDD"}));
  }

  SECTION("invalid requests are named") {
    REQUIRE_THROWS_AS(load_config((temp_dir() / "missing.json").string()),
                      ConfigError);
    const fs::path bad = write_file("bad.json", "{ not json");
    REQUIRE_THROWS_AS(load_config(bad.string()), ConfigError);

    const fs::path eve = write_file(
        "eve.json", R"({"sweep": {"param": "eve_pos_m", "values": [10]}})");
    REQUIRE_THROWS_WITH(load_config(eve.string()),
                        Catch::Matchers::ContainsSubstring("line"));

    const fs::path me = write_file(
        "me.json", R"({"sweep": {"param": "m_e", "values": [2.5]}})");
    REQUIRE_THROWS_AS(load_config(me.string()), ConfigError);

    const fs::path stat_bd = write_file(
        "stat_bd.json",
        R"({"csi": {"type": "statistical"}, "benchmarks": ["SEE-BD"]})");
    REQUIRE_THROWS_AS(load_config(stat_bd.string()), ConfigError);

    const fs::path label = write_file(
        "label.json", R"({"benchmarks": ["SEE_FD"]})");
    REQUIRE_THROWS_AS(load_config(label.string()), ConfigError);
  }

  SECTION("sweep values reach the scenario parameters") {
    ScenarioConfig base;
    base.sweep_param = "kappa_db";
    ScenarioConfig c = apply_sweep(base, -30.0);
    REQUIRE(std::abs(c.alice.kappa - 1e-3) <= 1e-17);
    REQUIRE(std::abs(c.bob.beta - 1e-3) <= 1e-17);

    base.sweep_param = "n_antennas";
    c = apply_sweep(base, 3.0);
    REQUIRE(c.dims.n_a == 3);
    REQUIRE(c.dims.m_b == 3);
    REQUIRE(c.dims.m_e == base.dims.m_e);

    base.sweep_param = "rho_si_db";
    c = apply_sweep(base, -10.0);
    REQUIRE(std::abs(c.rho_si - 0.1) <= 1e-15);
  }
}

TEST_CASE("empirical distributions") {
  SECTION("small hand case") {
    const auto cdf = compute_cdf({3.0, 1.0, 2.0});
    REQUIRE(cdf.size() == 3);
    REQUIRE(cdf[0].first == 1.0);
    REQUIRE(std::abs(cdf[0].second - 1.0 / 3.0) <= 1e-15);
    REQUIRE(cdf[1].first == 2.0);
    REQUIRE(std::abs(cdf[1].second - 2.0 / 3.0) <= 1e-15);
    REQUIRE(cdf[2].first == 3.0);
    REQUIRE(cdf[2].second == 1.0);
  }

  SECTION("ties keep every step") {
    const auto cdf = compute_cdf({5.0, 5.0, 5.0, 5.0});
    REQUIRE(cdf.size() == 4);
    for (const auto& [v, p] : cdf) REQUIRE(v == 5.0);
    REQUIRE(cdf.back().second == 1.0);
  }

  SECTION("uniform draws stay within the DKW band") {
    oracle::Rng rng = Rng::stream(81, {0});
    std::vector<double> xs(10000);
    for (double& x : xs) x = rng.uniform();
    const auto cdf = compute_cdf(xs);
    double worst = 0.0;
    for (std::size_t k = 0; k < cdf.size(); ++k) {
      const double n = static_cast<double>(cdf.size());
      worst = std::max(worst, std::abs(cdf[k].second - cdf[k].first));
      worst = std::max(
          worst, std::abs(static_cast<double>(k) / n - cdf[k].first));
    }
    REQUIRE(worst <= 0.02);
  }

  SECTION("empty input is rejected") {
    REQUIRE_THROWS_AS(compute_cdf({}), std::invalid_argument);
  }
}

TEST_CASE("CSV round trips") {
  SECTION("an empty result writes only the header") {
    const fs::path p = temp_dir() / "empty.csv";
    write_csv(SweepResult{}, p.string());
    REQUIRE(slurp(p) == std::string(kCsvHeader) + "\n");
  }

  SECTION("twelve significant digits survive the round trip") {
    SweepResult res;
    SweepRow row;
    row.sweep_param = "p_max_db";
    row.sweep_value = -2.5;
    row.benchmark = "SEE-FD";
    row.realization = 0;
    row.see = 123.456789012345;
    row.rate = 0.000123456789012;
    row.power = 1.0 / 3.0;
    row.converged = 1;
    row.outer_iters = 7;
    res.raw.push_back(row);
    SweepRow nan_row = row;
    nan_row.realization = 1;
    nan_row.see = std::numeric_limits<double>::quiet_NaN();
    res.raw.push_back(nan_row);

    const fs::path p = temp_dir() / "roundtrip.csv";
    write_csv(res, p.string());
    const auto sees = read_csv_column(p.string(), "see_bits_per_hz_per_joule");
    REQUIRE(sees.size() == 1);  // the NaN row is dropped
    // twelve significant digits: relative error up to 5 units in the last
    REQUIRE(std::abs(sees[0] - row.see) <= 5e-12 * std::abs(row.see));
    const auto rates = read_csv_column(p.string(), "rate_bits_per_s_per_hz");
    REQUIRE(rates.size() == 2);
    REQUIRE(std::abs(rates[0] - row.rate) <= 5e-12 * std::abs(row.rate));
    REQUIRE_THROWS_WITH(read_csv_column(p.string(), "no_such_column"),
                        Catch::Matchers::ContainsSubstring("no_such_column"));
  }
}

TEST_CASE("deterministic sweeps") {
  const ScenarioConfig cfg = small_scenario();
  const SweepResult first = run_sweep(cfg, 1);
  REQUIRE(first.failures == 0);
  REQUIRE(first.raw.size() == 2 * 2 * 3);

  const fs::path base = temp_dir() / "sweep_a.csv";
  write_csv(first, base.string());

  SECTION("identical reruns are byte-identical") {
    const SweepResult again = run_sweep(cfg, 1);
    const fs::path p = temp_dir() / "sweep_b.csv";
    write_csv(again, p.string());
    REQUIRE(slurp(p) == slurp(base));
  }

  SECTION("thread count does not change the output") {
    const SweepResult threaded = run_sweep(cfg, 4);
    const fs::path p = temp_dir() / "sweep_t4.csv";
    write_csv(threaded, p.string());
    REQUIRE(slurp(p) == slurp(base));
  }

  SECTION("output matches the frozen fixture") {
    const fs::path golden = fs::path(SEEMAX_TEST_DATA_DIR) / "golden_sweep.csv";
    if (std::getenv("SEEMAX_REGEN_GOLDEN")) {
      fs::create_directories(golden.parent_path());
      write_csv(first, golden.string());
    }
    REQUIRE(fs::exists(golden));
    REQUIRE(slurp(base) == slurp(golden));
  }

  SECTION("aggregates reproduce the per-row means") {
    REQUIRE(first.aggregates.size() == 2 * 3);
    for (const auto& agg : first.aggregates) {
      double sum = 0.0;
      int n = 0;
      for (const auto& row : first.raw) {
        if (row.benchmark != agg.benchmark ||
            row.sweep_value != agg.sweep_value)
          continue;
        sum += row.see;
        ++n;
      }
      REQUIRE(agg.n == n);
      REQUIRE(std::abs(agg.mean_see - sum / n) <=
              1e-12 * (1.0 + std::abs(agg.mean_see)));
    }
    const fs::path p = temp_dir() / "summary.csv";
    write_summary_csv(first, p.string());
    const auto means = read_csv_column(p.string(), "mean_see");
    REQUIRE(means.size() == first.aggregates.size());
  }

  SECTION("per-realization benchmark orderings hold") {
    auto row_see = [&](double value, const std::string& bench, int r) {
      for (const auto& row : first.raw)
        if (row.sweep_value == value && row.benchmark == bench &&
            row.realization == r)
          return row.see;
      FAIL("row not found");
      return 0.0;
    };
    for (double v : cfg.sweep_values) {
      for (int r = 0; r < cfg.n_realizations; ++r) {
        const double fd = row_see(v, "SEE-FD", r);
        const double hd = row_see(v, "SEE-HD", r);
        const double cs = row_see(v, "CS-FD", r);
        REQUIRE(fd >= 0.95 * hd - 1e-9);
        REQUIRE(fd >= 0.95 * cs - 1e-9);
      }
    }
  }
}

TEST_CASE("bidirectional and statistical sweep paths") {
  SECTION("bidirectional smoke run") {
    ScenarioConfig cfg = small_scenario();
    cfg.benchmarks = {"SEE-BD"};
    cfg.n_realizations = 1;
    cfg.sweep_values = {0.0};
    const SweepResult res = run_sweep(cfg, 1);
    REQUIRE(res.failures == 0);
    REQUIRE(res.raw.size() == 1);
    REQUIRE(res.raw[0].see > 0.0);
    REQUIRE(res.raw[0].converged == 1);
  }

  SECTION("statistical runs are deterministic too") {
    ScenarioConfig cfg = small_scenario();
    cfg.benchmarks = {"SEE-FD"};
    cfg.csi_statistical = true;
    cfg.g_count = 3;
    cfg.n_realizations = 1;
    cfg.sweep_values = {0.0};
    // weak enough eavesdropper links that the sampled errors do not push
    // every member rate negative at the mean-channel design
    cfg.rho_bar = db2lin(-30.0);
    const SweepResult a = run_sweep(cfg, 1);
    const SweepResult b = run_sweep(cfg, 4);
    REQUIRE(a.failures == 0);
    REQUIRE(a.raw.size() == 1);
    REQUIRE(a.raw[0].see > 0.0);
    REQUIRE(a.raw[0].see == b.raw[0].see);
    REQUIRE(a.raw[0].rate == b.raw[0].rate);
    REQUIRE(a.raw[0].power == b.raw[0].power);
  }
}
