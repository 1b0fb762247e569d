#include "seemax/harness.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run_and_write(seemax::ScenarioConfig cfg, std::int64_t seed_override,
                  int threads, const std::string& out_dir) {
  if (seed_override >= 0)
    cfg.seed = static_cast<std::uint64_t>(seed_override);
  fs::create_directories(out_dir);
  const seemax::SweepResult res = seemax::run_sweep(cfg, threads);
  seemax::write_csv(res, out_dir + "/results.csv");
  seemax::write_summary_csv(res, out_dir + "/summary.csv");
  std::cout << "wrote " << res.raw.size() << " rows to " << out_dir
            << "/results.csv (" << res.failures << " failed runs)\n";
  return res.failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Secrecy energy efficiency designs for full-duplex multi-antenna links"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  int threads = 1;
  std::int64_t seed_override = -1;

  CLI::App* run = app.add_subcommand(
      "run", "Monte-Carlo benchmark sweep from a JSON scenario config");
  run->add_option("--config", config_path, "scenario config (JSON)")
      ->required();
  run->add_option("--out", out_dir, "output directory (default: out)");
  run->add_option("--threads", threads, "worker threads (default: 1)");
  run->add_option("--seed", seed_override, "override the config seed");

  std::string cdf_in;
  std::string cdf_col = "see_bits_per_hz_per_joule";
  std::string cdf_out;
  CLI::App* cdf = app.add_subcommand(
      "cdf", "empirical CDF of one column of a results CSV");
  cdf->add_option("--in", cdf_in, "results CSV")->required();
  cdf->add_option("--column", cdf_col,
                  "column name (default: see_bits_per_hz_per_joule)");
  cdf->add_option("--out", cdf_out, "output CSV")->required();

  CLI::App* demo = app.add_subcommand(
      "demo", "reduced default-setup sweep (four benchmarks, fixed seed)");
  demo->add_option("--out", out_dir, "output directory (default: out)");
  demo->add_option("--threads", threads, "worker threads (default: 1)");
  demo->add_option("--seed", seed_override, "override the demo seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) {
      return run_and_write(seemax::load_config(config_path), seed_override,
                           threads, out_dir);
    }
    if (demo->parsed()) {
      return run_and_write(seemax::demo_scenario(), seed_override, threads, out_dir);
    }
    if (cdf->parsed()) {
      try {
        const auto values = seemax::read_csv_column(cdf_in, cdf_col);
        seemax::write_cdf_csv(seemax::compute_cdf(values), cdf_out);
        std::cout << "wrote " << values.size() << " points to " << cdf_out
                  << "\n";
        return 0;
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
      }
    }
  } catch (const seemax::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
