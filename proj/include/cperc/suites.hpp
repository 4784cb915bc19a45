#pragma once

// Named batches of experiments, each emitting the plot data of one figure
// of the results.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cperc/config.hpp"
#include "cperc/core_model.hpp"

namespace cperc {

struct SuiteOptions {
  std::filesystem::path out_dir = "results";
  std::uint64_t seed = 1;
  /// Multiplies every trace length (1 = 2 us traces); small values give quick runs.
  double scale = 1.0;
  std::vector<double> attenuations_db{0.0, 2.0, 4.0, 6.0};
};

const std::vector<std::string>& suite_names();

/// Writes <out_dir>/<name>/ with the figure CSVs, a suite manifest and one
/// manifest + result.csv per experiment under runs/. Throws ConfigError for
/// an unknown name.
void run_suite(const std::string& name, const SuiteOptions& options);

/// Baseline experiment of the suites: complex perceptron with the nominal
/// amplitudes, SNR 14 dB, 1% phase noise, 10 test traces of 2 us * scale.
ExperimentConfig suite_config(const TaskSpec& task, double scale, std::uint64_t seed);

/// Trace length in bits for 2 us at the task's bit rate times `scale`, at least 64.
std::size_t suite_trace_bits(double bit_rate_hz, double scale);

/// Amplitudes of the toy model for a^2 = {1, 0.58, 0.34}.
ToyModelParams nominal_toy_params();

/// Best separation margin over phi_c for a two-bit task at one phi_r.
struct ToyMargin {
  std::string task;
  double phi_r_deg = 0.0;
  double best_phi_c_deg = 0.0;
  double margin = 0.0;
};

/// Tasks xor, pattern-10, pattern-01, pattern-11 over phi_r, phi_c on a 1 degree grid.
std::vector<ToyMargin> toy_margins();

/// |Pearson| between detected input intensity and the trained output at the
/// best sampling offset, pooled over the test traces of a phase-decode run.
double phase_decode_correlation(const ExperimentConfig& config, std::span<const double> phases,
                                int sampling_index);

}  // namespace cperc
