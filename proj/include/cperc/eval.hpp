#pragma once

// Decision stage: best threshold / best sampling search, BER, level
// statistics and the affine-classifier floor.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cperc/tasks.hpp"
#include "cperc/waveform.hpp"

namespace cperc {

/// Sampled output levels grouped by two-bit symbol, index = 2*previous + current.
struct LevelHistograms {
  std::array<std::vector<double>, 4> levels;

  static const char* symbol(std::size_t index);
};

struct EvalResult {
  double ber = 0.0;
  double best_threshold = 0.0;
  int best_threshold_index = 0;
  int best_sampling_index = 0;
  long long error_count = 0;
  long long total_bits = 0;
  bool is_error_free = false;
  double statistical_limit = 0.0;
  LevelHistograms level_histograms;
};

/// Bit l = 1 iff trace[l*B + B/2] > mean(trace).
std::vector<std::uint8_t> digitize_reference(const RealWaveform& trace, int samples_per_bit);

/// Candidate thresholds for one sampling offset: one level below lo (every
/// bit decided 1), then lo + i*(hi-lo)/steps for i = 0..steps.
std::vector<double> threshold_grid(double lo, double hi, int steps);

struct OffsetSweep {
  long long errors = 0;
  long long bits = 0;
  int threshold_index = 0;
  double threshold = 0.0;
};

/// Threshold search on one sample per bit. Decision is y > r; the grid spans
/// the range of the unmasked samples. Ties resolve to the lowest threshold.
OffsetSweep sweep_offset(std::span<const double> samples, const Targets& targets,
                         int threshold_steps = 64);

struct SweepOptions {
  int threshold_steps = 64;
  std::optional<int> fixed_offset;
};

/// Searches every sampling offset n in 0..B-1 (or only fixed_offset) and
/// every threshold; returns the minimum error count with ties resolved to
/// the smallest n, then the smallest threshold.
EvalResult sweep_eval(std::span<const double> trace, const Targets& targets, int samples_per_bit,
                      const SweepOptions& options = {});

/// Errors and bits pooled over independently swept test traces.
struct TestSummary {
  long long error_count = 0;
  long long total_bits = 0;
  double ber = 0.0;
  double statistical_limit = 0.0;
  bool is_error_free = false;
  int sampling_index = 0;  // most frequent best offset, ties to the smallest
  std::vector<EvalResult> traces;
};

TestSummary summarize(std::vector<EvalResult> traces);

double pearson(std::span<const double> x, std::span<const double> y);

/// Lowest fraction of the 2^window equiprobable input windows that any
/// threshold function of integer weights |w| <= 5 misclassifies. Exact for
/// window <= 4, where every threshold function has such a representation.
double linear_separability_floor(const TaskSpec& task, int window);

/// Number of distinct dichotomies of {0,1}^window realised by the search
/// above (14, 104, 1882 for windows 2, 3, 4).
std::size_t threshold_function_count(int window);

LevelHistograms level_histograms(std::span<const double> trace,
                                 std::span<const std::uint8_t> input_bits, int samples_per_bit,
                                 int sampling_index);

}  // namespace cperc
