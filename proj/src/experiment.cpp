#include "cperc/experiment.hpp"

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "cperc/baselines.hpp"
#include "cperc/link.hpp"
#include "cperc/pipeline.hpp"
#include "cperc/seeds.hpp"

namespace cperc {

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     std::initializer_list<std::string_view> header)
    : path_(path), file_(std::fopen(path.c_str(), "w")) {
  if (!file_)
    throw std::runtime_error(fmt::format("cannot write {}: {}", path.string(), std::strerror(errno)));
  std::string line;
  for (auto h : header) {
    if (!line.empty()) line += ',';
    line += h;
  }
  write_line(line);
}

CsvWriter::~CsvWriter() {
  if (file_) std::fclose(file_);
}

std::string CsvWriter::cell(double v) { return fmt::format("{}", v); }

void CsvWriter::write_line(const std::string& line) {
  if (std::fputs(line.c_str(), file_) < 0 || std::fputc('\n', file_) == EOF)
    throw std::runtime_error(fmt::format("write failed: {}", path_.string()));
}

namespace {

std::vector<std::uint64_t> seed_list(std::uint64_t master, std::string_view name, int count) {
  std::vector<std::uint64_t> out;
  for (int i = 0; i < count; ++i) out.push_back(derive_seed(master, name, static_cast<std::uint64_t>(i)));
  return out;
}

std::vector<int> all_offsets(int b) {
  std::vector<int> out(static_cast<std::size_t>(b));
  std::iota(out.begin(), out.end(), 0);
  return out;
}

std::vector<int> offsets_for(const ExperimentConfig& c) {
  if (c.sampling == SamplingMode::Fixed) return {c.sampling_offset};
  return all_offsets(c.samples_per_bit());
}

ResultRow complex_row(const ExperimentConfig& c, const Link& train_link, const Link& test_link,
                      std::optional<int> offset, std::span<const std::uint64_t> tests) {
  DecisionOptions decision{c.threshold_steps, offset};
  PswConfig psw = c.psw;
  psw.rng_seed = derive_seed(c.seed, "psw", offset ? static_cast<std::uint64_t>(*offset + 1) : 0);
  const auto trained = train_complex(train_link, c.task, psw, decision);
  ResultRow row;
  row.model = "complex";
  row.phases = trained.phases;
  row.convergence = trained.swarm.history;
  row.test = test_complex(test_link, c.task, row.phases, tests, decision);
  row.sampling_index = offset ? *offset : row.test.sampling_index;
  return row;
}

std::vector<ResultRow> complex_rows(const ExperimentConfig& c, const Link& train_link,
                                    const Link& test_link, std::span<const std::uint64_t> tests) {
  if (c.sampling == SamplingMode::Best)
    return {complex_row(c, train_link, test_link, std::nullopt, tests)};
  std::vector<ResultRow> rows;
  for (int n : offsets_for(c)) rows.push_back(complex_row(c, train_link, test_link, n, tests));
  return rows;
}

std::vector<ResultRow> real_rows(const ExperimentConfig& c, const Link& train_link,
                                 const Link& test_link, std::span<const std::uint64_t> trains,
                                 std::span<const std::uint64_t> tests) {
  const ReadoutOptions options{c.ridge_lambda_rel, c.threshold_steps};
  std::vector<ResultRow> rows;
  for (int n : offsets_for(c)) {
    ResultRow row;
    row.model = "real";
    row.sampling_index = n;
    row.readout = train_real_perceptron(train_link, c.task, n, trains, options);
    row.test = test_real_perceptron(test_link, c.task, n, row.readout, tests, options);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ResultRow> reservoir_rows(const ExperimentConfig& c, const Link& train_link,
                                      const Link& test_link, std::span<const std::uint64_t> trains,
                                      std::span<const std::uint64_t> tests) {
  ReservoirOptions options;
  options.repeats = c.reservoir_repeats;
  options.virtual_nodes = c.virtual_nodes;
  options.rng_seed = derive_seed(c.seed, "reservoir", 0);
  options.readout = {c.ridge_lambda_rel, c.threshold_steps};
  auto res = reservoir_predict(train_link, test_link, c.task, options, trains, tests);
  std::vector<ResultRow> rows;
  for (std::size_t r = 0; r < res.repeats.size(); ++r) {
    auto& rep = res.repeats[r];
    ResultRow row;
    row.model = fmt::format("reservoir[{}]", r);
    row.phases = std::move(rep.phases);
    row.readout = std::move(rep.readout);
    row.test = std::move(rep.test);
    rows.push_back(std::move(row));
  }
  ResultRow mean;
  mean.model = "reservoir-mean";
  for (const auto& r : rows) {
    mean.test.error_count += r.test.error_count;
    mean.test.total_bits += r.test.total_bits;
    mean.test.ber += r.test.ber / static_cast<double>(rows.size());
  }
  mean.test.is_error_free = mean.test.error_count == 0;
  mean.test.statistical_limit = statistical_ber_limit(static_cast<std::size_t>(mean.test.total_bits));
  rows.push_back(std::move(mean));
  return rows;
}

std::size_t pick_best(const std::vector<ResultRow>& rows) {
  std::size_t best = 0;
  bool found = false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].model == "reservoir-mean") continue;
    if (!found || rows[i].test.ber < rows[best].test.ber) {
      best = i;
      found = true;
    }
  }
  return best;
}

/// Decision variable of the best row, one value per bit of each test trace.
void record_outputs(const ExperimentConfig& c, const Link& link, std::span<const std::uint64_t> tests,
                    ExperimentResult& out) {
  const auto& row = out.rows[out.best_row];
  for (std::size_t t = 0; t < tests.size(); ++t) {
    const auto acq = link.acquire(tests[t]);
    std::vector<double> y;
    if (c.model == ModelKind::Complex) {
      const int n = row.test.traces[t].best_sampling_index;
      y = link.sampled_output(row.phases, acq, std::span<const int>(&n, 1));
    } else {
      const auto features = c.model == ModelKind::RealPerceptron
                                ? link.tap_power_features(acq, row.sampling_index)
                                : virtual_node_features(link, row.phases, acq, c.virtual_nodes);
      y.resize(static_cast<std::size_t>(features.rows()));
      for (Eigen::Index l = 0; l < features.rows(); ++l) {
        const Eigen::VectorXd f = features.row(l).transpose();
        y[static_cast<std::size_t>(l)] = row.readout.predict(std::span<const double>(f.data(), f.size()));
      }
    }
    out.test_outputs.push_back(std::move(y));
    out.test_inputs.push_back(acq.bits);
    out.test_targets.push_back(link.targets(c.task, acq).bits);
  }
}

std::string offset_cell(int n) { return n < 0 ? std::string() : std::to_string(n); }
std::string time_cell(int n, double period_ps) {
  return n < 0 ? std::string() : fmt::format("{}", n * period_ps);
}

}  // namespace

std::vector<std::uint64_t> test_seeds(const ExperimentConfig& config) {
  return seed_list(config.seed, "test", config.test_traces);
}

std::vector<std::uint64_t> train_seeds(const ExperimentConfig& config) {
  return seed_list(config.seed, "train", config.train_traces);
}

ExperimentResult execute(const ExperimentConfig& config) {
  config.validate();
  const Link train_link(config.link_setup(config.train_bits));
  const Link test_link(config.link_setup(config.test_bits));
  const auto tests = test_seeds(config);
  const auto trains = train_seeds(config);

  ExperimentResult out;
  out.samples_per_bit = train_link.samples_per_bit();
  out.sample_period_ps = 1e12 / config.channel.sample_rate_hz;
  switch (config.model) {
    case ModelKind::Complex:
      out.rows = complex_rows(config, train_link, test_link, tests);
      break;
    case ModelKind::RealPerceptron:
      out.rows = real_rows(config, train_link, test_link, trains, tests);
      break;
    case ModelKind::Reservoir:
      out.rows = reservoir_rows(config, train_link, test_link, trains, tests);
      break;
  }
  out.best_row = pick_best(out.rows);
  record_outputs(config, test_link, tests, out);
  return out;
}

void write_manifest(const ExperimentConfig& config, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "manifest.yaml");
  manifest << to_yaml(config);
  if (!manifest) throw std::runtime_error(fmt::format("cannot write {}", (dir / "manifest.yaml").string()));
}

void write_results(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const double ps = result.sample_period_ps;
  CsvWriter csv(dir / "result.csv",
                {"model", "sampling_index", "sampling_time_ps", "ber", "error_count", "total_bits",
                 "statistical_limit", "error_free", "best"});
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const auto& r = result.rows[i];
    csv.row(r.model, offset_cell(r.sampling_index), time_cell(r.sampling_index, ps), r.test.ber,
            r.test.error_count, r.test.total_bits, r.test.statistical_limit, r.test.is_error_free,
            i == result.best_row);
  }
}

void write_bundle(const ExperimentConfig& config, const ExperimentResult& result,
                  const std::filesystem::path& dir) {
  write_manifest(config, dir);
  write_results(result, dir);
  {
    CsvWriter csv(dir / "convergence.csv", {"model", "sampling_index", "iteration", "best_ber"});
    for (const auto& r : result.rows)
      for (std::size_t it = 0; it < r.convergence.size(); ++it)
        csv.row(r.model, offset_cell(r.sampling_index), it + 1, r.convergence[it]);
  }
  {
    CsvWriter csv(dir / "phases.csv", {"model", "sampling_index", "tap", "phase_rad"});
    for (const auto& r : result.rows)
      for (std::size_t k = 0; k < r.phases.size(); ++k)
        csv.row(r.model, offset_cell(r.sampling_index), k, r.phases[k]);
  }
  {
    CsvWriter csv(dir / "readout.csv", {"model", "sampling_index", "term", "value"});
    for (const auto& r : result.rows) {
      if (r.readout.weights.empty()) continue;
      for (std::size_t k = 0; k < r.readout.weights.size(); ++k)
        csv.row(r.model, offset_cell(r.sampling_index), fmt::format("w{}", k), r.readout.weights[k]);
      csv.row(r.model, offset_cell(r.sampling_index), "bias", r.readout.bias);
    }
  }
  {
    // levels grouped by the two most recent input bits of each slot
    CsvWriter csv(dir / "histograms.csv", {"trace", "symbol", "level"});
    for (std::size_t t = 0; t < result.test_outputs.size(); ++t) {
      const auto h = level_histograms(result.test_outputs[t], result.test_inputs[t], 1, 0);
      for (std::size_t s = 0; s < h.levels.size(); ++s)
        for (double v : h.levels[s]) csv.row(t, LevelHistograms::symbol(s), v);
    }
  }
  {
    CsvWriter csv(dir / "test_samples.csv", {"trace", "bit", "input_bit", "target", "output"});
    for (std::size_t t = 0; t < result.test_outputs.size(); ++t)
      for (std::size_t l = 0; l < result.test_outputs[t].size(); ++l)
        csv.row(t, l, static_cast<int>(result.test_inputs[t][l]), static_cast<int>(result.test_targets[t][l]),
                result.test_outputs[t][l]);
  }
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  auto result = execute(config);
  write_bundle(config, result, config.output_dir);
  return result;
}

}  // namespace cperc
