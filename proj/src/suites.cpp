#include "cperc/suites.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "cperc/eval.hpp"
#include "cperc/experiment.hpp"
#include "cperc/link.hpp"
#include "cperc/seeds.hpp"

namespace cperc {

namespace {

constexpr double kDeg = kPi / 180.0;

std::vector<double> degree_grid() {
  std::vector<double> g(360);
  for (int i = 0; i < 360; ++i) g[static_cast<std::size_t>(i)] = i * kDeg;
  return g;
}

std::string rate_label(double hz) { return fmt::format("{}", hz / 1e9); }

struct SuiteRun {
  const SuiteOptions& options;
  std::string name;
  std::filesystem::path dir;
  std::uint64_t index = 0;

  std::uint64_t next_seed() { return derive_seed(options.seed, name, index++); }

  ExperimentResult run(ExperimentConfig config, const std::string& label) {
    config.name = fmt::format("{}/{}", name, label);
    config.output_dir = (dir / "runs" / label).string();
    auto result = execute(config);
    write_manifest(config, config.output_dir);
    write_results(result, config.output_dir);
    return result;
  }
};

void fig2_sweep(SuiteRun& s) {
  const auto toy = nominal_toy_params();
  const auto grid = degree_grid();
  const std::vector<double> phi_r{0.0, 90 * kDeg, 180 * kDeg};
  const std::vector<ToyInput> inputs{{1, 1, 1}, {1, 0, 0}, {0, 1, 1}};
  const auto table = phase_sweep(grid, phi_r, inputs, toy.a2, toy.gamma);
  {
    CsvWriter csv(s.dir / "fig2.csv", {"phi_r_deg", "phi_c_deg", "input", "output"});
    for (std::size_t ir = 0; ir < phi_r.size(); ++ir)
      for (std::size_t ic = 0; ic < grid.size(); ++ic)
        for (std::size_t ii = 0; ii < inputs.size(); ++ii) {
          const auto& u = inputs[ii];
          csv.row(static_cast<int>(ir) * 90, static_cast<int>(ic),
                  fmt::format("{}{}{}", u.u1, u.u2, u.u3), table.at(ir, ic, ii));
        }
  }
  CsvWriter csv(s.dir / "fig2_margins.csv", {"task", "phi_r_deg", "best_phi_c_deg", "margin"});
  for (const auto& m : toy_margins()) csv.row(m.task, m.phi_r_deg, m.best_phi_c_deg, m.margin);
}

const std::vector<std::string> kPatterns{"01", "10", "11", "001", "010", "011", "100", "101", "110", "111"};
const std::vector<double> kRatesGbps{5, 8, 10, 16};

void pattern_vs_bitrate(SuiteRun& s) {
  CsvWriter csv(s.dir / "fig3.csv", {"bit_rate_gbps", "pattern", "sampling_index", "ber", "error_count",
                                      "total_bits", "statistical_limit", "error_free"});
  CsvWriter levels(s.dir / "fig3_levels.csv", {"bit_rate_gbps", "pattern", "symbol", "level"});
  for (double g : kRatesGbps)
    for (const auto& p : kPatterns) {
      const auto task = TaskSpec::pattern(p, g * 1e9);
      const auto r = s.run(suite_config(task, s.options.scale, s.next_seed()),
                           fmt::format("{}gbps-{}", rate_label(g * 1e9), p));
      const auto& t = r.rows[r.best_row].test;
      csv.row(g, p, t.sampling_index, t.ber, t.error_count, t.total_bits, t.statistical_limit,
              t.is_error_free);
      if (p.size() != 2) continue;
      const auto h = level_histograms(r.test_outputs.front(), r.test_inputs.front(), 1, 0);
      for (std::size_t k = 0; k < h.levels.size(); ++k)
        for (double v : h.levels[k]) levels.row(g, p, LevelHistograms::symbol(k), v);
    }
}

void xor_vs_bitrate(SuiteRun& s) {
  CsvWriter csv(s.dir / "fig4.csv", {"bit_rate_gbps", "delay_bits", "sampling_index", "ber", "error_count",
                                      "total_bits", "statistical_limit", "linear_floor"});
  for (double g : kRatesGbps)
    for (int d = 1; d <= 3; ++d) {
      const auto task = TaskSpec::delayed_xor(d, g * 1e9);
      const auto r = s.run(suite_config(task, s.options.scale, s.next_seed()),
                           fmt::format("{}gbps-xor{}", rate_label(g * 1e9), d));
      const auto& t = r.rows[r.best_row].test;
      csv.row(g, d, t.sampling_index, t.ber, t.error_count, t.total_bits, t.statistical_limit,
              linear_separability_floor(task, d + 1));
    }
}

void xor_sampling_map(SuiteRun& s) {
  CsvWriter csv(s.dir / "fig5.csv",
                {"sampling_time_ps", "attenuation_db", "ber", "error_count", "total_bits"});
  for (double att : s.options.attenuations_db) {
    auto c = suite_config(TaskSpec::delayed_xor(1, 5e9), s.options.scale, s.next_seed());
    c.sampling = SamplingMode::Sweep;
    c.attenuation_db = att;
    const auto r = s.run(c, fmt::format("att{}db", att));
    for (const auto& row : r.rows)
      csv.row(row.sampling_index * r.sample_period_ps, att, row.test.ber, row.test.error_count,
              row.test.total_bits);
  }
}

void model_comparison(SuiteRun& s) {
  CsvWriter csv(s.dir / "fig6.csv",
                {"model", "loss_db_per_cm", "sampling_time_ps", "ber", "error_count", "total_bits"});
  const auto task = TaskSpec::delayed_xor(1, 5e9);
  const std::uint64_t seed = s.next_seed();
  auto with_loss = [&](double loss) {
    auto c = suite_config(task, s.options.scale, seed);
    c.loss_db_per_cm = loss;
    c.perceptron.amplitudes = amplitudes_from_loss(loss, c.spiral_length_cm, c.perceptron.n_taps);
    c.sampling = SamplingMode::Sweep;
    return c;
  };
  for (double loss : {6.0, 2.5}) {
    const auto r = s.run(with_loss(loss), fmt::format("complex-{}dbcm", loss));
    for (const auto& row : r.rows)
      csv.row("complex", loss, row.sampling_index * r.sample_period_ps, row.test.ber,
              row.test.error_count, row.test.total_bits);
  }
  auto real = with_loss(6.0);
  real.model = ModelKind::RealPerceptron;
  const auto rr = s.run(real, "real");
  for (const auto& row : rr.rows)
    csv.row("real", 6.0, row.sampling_index * rr.sample_period_ps, row.test.ber, row.test.error_count,
            row.test.total_bits);
  auto res = with_loss(6.0);
  res.model = ModelKind::Reservoir;
  res.virtual_nodes = res.samples_per_bit();
  const auto rv = s.run(res, "reservoir");
  const auto& best = rv.rows[rv.best_row].test;
  const auto& mean = rv.rows.back().test;
  csv.row("reservoir-best", 6.0, "", best.ber, best.error_count, best.total_bits);
  csv.row("reservoir-mean", 6.0, "", mean.ber, mean.error_count, mean.total_bits);
}

void phase_decode(SuiteRun& s) {
  CsvWriter trace(s.dir / "fig7.csv", {"snr_db", "bit", "input_bit", "input_phase_rad", "output"});
  CsvWriter summary(s.dir / "fig7_summary.csv",
                    {"snr_db", "sampling_index", "ber", "error_count", "total_bits", "abs_pearson"});
  for (double snr : {kNoiseOff, 14.0}) {
    auto c = suite_config(TaskSpec::phase_decode(10e9), s.options.scale, s.next_seed());
    c.modulation = Modulation::Bpsk;
    c.channel.snr_db = snr;
    const std::string snr_text = std::isinf(snr) ? "off" : fmt::format("{}", snr);
    const auto r = s.run(c, fmt::format("snr-{}", snr_text));
    const auto& row = r.rows[r.best_row];
    const auto& out = r.test_outputs.front();
    const auto& in = r.test_inputs.front();
    for (std::size_t l = 0; l < out.size(); ++l)
      trace.row(snr_text, l, static_cast<int>(in[l]), in[l] ? kPi : 0.0, out[l]);
    // a noiseless BPSK input has constant intensity and no correlation to report
    std::string rho;
    if (!std::isinf(snr)) rho = fmt::format("{}", phase_decode_correlation(c, row.phases, row.test.sampling_index));
    summary.row(snr_text, row.test.sampling_index, row.test.ber, row.test.error_count,
                row.test.total_bits, rho);
  }
}

using SuiteFn = std::function<void(SuiteRun&)>;

const std::map<std::string, SuiteFn>& suites() {
  static const std::map<std::string, SuiteFn> table{
      {"fig2-sweep", fig2_sweep},
      {"pattern-vs-bitrate", pattern_vs_bitrate},
      {"xor-vs-bitrate", xor_vs_bitrate},
      {"xor-sampling-map", xor_sampling_map},
      {"model-comparison", model_comparison},
      {"phase-decode", phase_decode},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"fig2-sweep",       "pattern-vs-bitrate",
                                              "xor-vs-bitrate",   "xor-sampling-map",
                                              "model-comparison", "phase-decode"};
  return names;
}

std::size_t suite_trace_bits(double bit_rate_hz, double scale) {
  return static_cast<std::size_t>(std::max(64.0, std::round(2e-6 * bit_rate_hz * scale)));
}

ExperimentConfig suite_config(const TaskSpec& task, double scale, std::uint64_t seed) {
  ExperimentConfig c;
  c.seed = seed;
  c.task = task;
  c.channel.snr_db = 14.0;
  c.perceptron.phase_noise_frac = 0.01;
  c.train_bits = suite_trace_bits(task.bit_rate_hz, scale);
  c.test_bits = c.train_bits;
  c.virtual_nodes = c.samples_per_bit();
  return c;
}

ToyModelParams nominal_toy_params() {
  ToyModelParams p;
  p.a2 = std::sqrt(kNominalAmplitudeSq[1]);
  p.gamma = std::sqrt(kNominalAmplitudeSq[2]) / p.a2;
  return p;
}

std::vector<ToyMargin> toy_margins() {
  const auto toy = nominal_toy_params();
  const auto grid = degree_grid();
  std::vector<ToyInput> inputs;
  for (int s = 0; s < 4; ++s) inputs.push_back(toy_input_for_symbol(s >> 1, s & 1));
  const auto table = phase_sweep(grid, grid, inputs, toy.a2, toy.gamma);

  // high class per symbol 00, 01, 10, 11 (oldest bit first)
  const std::vector<std::pair<std::string, std::array<bool, 4>>> tasks{
      {"xor", {false, true, true, false}},
      {"pattern-10", {false, false, true, false}},
      {"pattern-01", {false, true, false, false}},
      {"pattern-11", {false, false, false, true}},
  };
  std::vector<ToyMargin> out;
  for (const auto& [name, high] : tasks)
    for (std::size_t ir = 0; ir < grid.size(); ++ir) {
      ToyMargin m{name, static_cast<double>(ir), 0.0, -HUGE_VAL};
      for (std::size_t ic = 0; ic < grid.size(); ++ic) {
        const double v = separation_margin(table, ir, ic, high);
        if (v > m.margin) {
          m.margin = v;
          m.best_phi_c_deg = static_cast<double>(ic);
        }
      }
      out.push_back(m);
    }
  return out;
}

double phase_decode_correlation(const ExperimentConfig& config, std::span<const double> phases,
                                int sampling_index) {
  const Link link(config.link_setup(config.test_bits));
  const int b = link.samples_per_bit();
  std::vector<double> x, y;
  for (auto seed : test_seeds(config)) {
    const auto acq = link.acquire(seed);
    const auto in = link.input_trace(acq);
    const auto out = link.sampled_output(phases, acq, std::span<const int>(&sampling_index, 1));
    for (std::size_t l = 0; l < out.size(); ++l) {
      x.push_back(in.samples[l * static_cast<std::size_t>(b) + static_cast<std::size_t>(sampling_index)]);
      y.push_back(out[l]);
    }
  }
  return std::abs(pearson(x, y));
}

void run_suite(const std::string& name, const SuiteOptions& options) {
  const auto it = suites().find(name);
  if (it == suites().end()) {
    std::string valid;
    for (const auto& n : suite_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw ConfigError(fmt::format("unknown suite '{}'; valid suites: {}", name, valid));
  }
  if (!(options.scale > 0.0)) throw ConfigError("suite scale must be > 0");
  SuiteRun run{options, name, options.out_dir / name};
  std::filesystem::create_directories(run.dir);
  {
    std::ofstream m(run.dir / "suite.yaml");
    m << "suite: " << name << "\nseed: " << options.seed << "\nscale: " << fmt::format("{}", options.scale)
      << "\nattenuations_db: [";
    for (std::size_t i = 0; i < options.attenuations_db.size(); ++i)
      m << (i ? ", " : "") << fmt::format("{}", options.attenuations_db[i]);
    m << "]\n";
    if (!m) throw std::runtime_error(fmt::format("cannot write {}", (run.dir / "suite.yaml").string()));
  }
  it->second(run);
}

}  // namespace cperc
