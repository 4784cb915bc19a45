#pragma once

// One configured run: train the chosen model, test it on fresh traces and
// write the result bundle.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cperc/config.hpp"
#include "cperc/eval.hpp"
#include "cperc/training.hpp"

namespace cperc {

struct ResultRow {
  std::string model;         // "complex", "real", "reservoir[3]", "reservoir-mean", ...
  int sampling_index = -1;   // -1 when the model reads the whole bit slot
  TestSummary test;
  std::vector<double> phases;
  std::vector<double> convergence;  // PSW global best per iteration
  RidgeFit readout;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::size_t best_row = 0;
  int samples_per_bit = 0;
  double sample_period_ps = 0.0;
  /// Per-bit decision variable and targets of the best row on each test trace.
  std::vector<std::vector<double>> test_outputs;
  std::vector<std::vector<std::uint8_t>> test_inputs;
  std::vector<std::vector<std::uint8_t>> test_targets;
};

/// Seeds of the test acquisitions, shared by every model of a config.
std::vector<std::uint64_t> test_seeds(const ExperimentConfig& config);
std::vector<std::uint64_t> train_seeds(const ExperimentConfig& config);

ExperimentResult execute(const ExperimentConfig& config);

/// Writes manifest.yaml, result.csv, convergence.csv, phases.csv,
/// histograms.csv and test_samples.csv into `dir`.
void write_bundle(const ExperimentConfig& config, const ExperimentResult& result,
                  const std::filesystem::path& dir);

void write_manifest(const ExperimentConfig& config, const std::filesystem::path& dir);
/// result.csv only.
void write_results(const ExperimentResult& result, const std::filesystem::path& dir);

/// execute + write_bundle into config.output_dir.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Plain CSV writer: '.' decimals, shortest round-trip number text.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  template <class... Ts>
  void row(const Ts&... values) {
    std::string line;
    bool first = true;
    ((line += (first ? "" : ","), line += cell(values), first = false), ...);
    write_line(line);
  }

 private:
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(std::string_view s) { return std::string(s); }
  static std::string cell(const char* s) { return s; }
  static std::string cell(double v);
  static std::string cell(bool v) { return v ? "1" : "0"; }
  template <class I>
    requires std::is_integral_v<I>
  static std::string cell(I v) {
    return std::to_string(v);
  }
  void write_line(const std::string& line);

  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
};

}  // namespace cperc
