// cperc: run, validate and reproduce photonic perceptron experiments.
//
//   cperc run <config.yaml>
//   cperc suite <name> [--out DIR] [--seed N] [--scale S]
//   cperc oracle <name>
//   cperc validate <config.yaml>
//
// Exit codes: 0 success, 2 config error, 3 runtime error.

#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cperc/config.hpp"
#include "cperc/experiment.hpp"
#include "cperc/suites.hpp"
#include "oracles.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

int run_config(const std::string& path) {
  const auto config = cperc::load_config(path);
  const auto result = cperc::run_experiment(config);
  const auto& best = result.rows[result.best_row];
  fmt::print("{}: {} BER {} ({} errors / {} bits, limit {}) at sampling index {}\n", config.name,
             best.model, best.test.ber, best.test.error_count, best.test.total_bits,
             best.test.statistical_limit, best.sampling_index);
  fmt::print("results in {}\n", config.output_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Complex-valued photonic perceptron simulator"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Train and test one configured experiment");
  run->add_option("config", config_path, "YAML config file")->required();

  std::string suite_name;
  cperc::SuiteOptions suite_opts;
  std::string out_dir = "results";
  auto* suite = app.add_subcommand("suite", "Run a named experiment suite");
  suite->add_option("name", suite_name, "suite name")->required();
  suite->add_option("--out", out_dir, "output directory");
  suite->add_option("--seed", suite_opts.seed, "master seed");
  suite->add_option("--scale", suite_opts.scale, "trace length factor (1 = 2 us traces)");
  suite->add_option("--attenuations", suite_opts.attenuations_db, "attenuation grid in dB");

  std::string oracle_name;
  auto* oracle = app.add_subcommand("oracle", "Check the library against a brute-force oracle");
  oracle->add_option("name", oracle_name, "oracle name or 'all'")->required();

  auto* validate = app.add_subcommand("validate", "Parse and check a config file");
  validate->add_option("config", config_path, "YAML config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*run) return run_config(config_path);
    if (*suite) {
      suite_opts.out_dir = out_dir;
      cperc::run_suite(suite_name, suite_opts);
      fmt::print("suite {} written to {}/{}\n", suite_name, out_dir, suite_name);
      return 0;
    }
    if (*oracle) {
      bool ok = true;
      if (oracle_name == "all")
        for (const auto& n : cperc::oracle::names()) ok &= cperc::oracle::run(n, std::cout);
      else
        ok = cperc::oracle::run(oracle_name, std::cout);
      return ok ? 0 : kRuntimeError;
    }
    if (*validate) {
      const auto config = cperc::load_config(config_path);
      std::cout << cperc::to_yaml(config);
      return 0;
    }
  } catch (const cperc::ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kRuntimeError;
  }
  return 0;
}
