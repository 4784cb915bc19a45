#include "cperc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

namespace cperc {

const char* LevelHistograms::symbol(std::size_t index) {
  static constexpr const char* kNames[4] = {"00", "01", "10", "11"};
  return kNames[index & 3u];
}

std::vector<std::uint8_t> digitize_reference(const RealWaveform& trace, int samples_per_bit) {
  if (samples_per_bit < 1) throw std::invalid_argument("samples per bit must be >= 1");
  const auto b = static_cast<std::size_t>(samples_per_bit);
  if (trace.samples.empty() || trace.size() % b != 0)
    throw std::invalid_argument(fmt::format(
        "trace of {} samples is not a whole number of {}-sample bits", trace.size(), b));
  const double mean = trace.mean();
  std::vector<std::uint8_t> bits(trace.size() / b);
  for (std::size_t l = 0; l < bits.size(); ++l) bits[l] = trace.samples[l * b + b / 2] > mean;
  return bits;
}

std::vector<double> threshold_grid(double lo, double hi, int steps) {
  if (steps < 1) throw std::invalid_argument("threshold grid needs at least one step");
  if (!(hi >= lo)) throw std::invalid_argument("threshold grid range is inverted");
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(steps) + 2);
  grid.push_back(lo - std::max(1.0, hi - lo));
  for (int i = 0; i <= steps; ++i) grid.push_back(lo + (hi - lo) * i / steps);
  return grid;
}

OffsetSweep sweep_offset(std::span<const double> samples, const Targets& targets,
                         int threshold_steps) {
  if (samples.size() != targets.size())
    throw std::invalid_argument(fmt::format("{} samples for {} targets", samples.size(),
                                            targets.size()));
  if (threshold_steps < 1) throw std::invalid_argument("threshold grid is empty");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  long long total = 0;
  for (std::size_t l = 0; l < samples.size(); ++l) {
    if (!targets.valid[l]) continue;
    lo = std::min(lo, samples[l]);
    hi = std::max(hi, samples[l]);
    ++total;
  }
  if (total == 0) throw std::invalid_argument("no valid targets to evaluate");
  const auto grid = threshold_grid(lo, hi, threshold_steps);
  const int levels = static_cast<int>(grid.size());

  // rank c = number of grid levels strictly below y; y is decided 1 at
  // threshold index i iff i < c
  std::vector<long long> ones(static_cast<std::size_t>(levels) + 1, 0);
  std::vector<long long> zeros(static_cast<std::size_t>(levels) + 1, 0);
  const double scale = hi > lo ? threshold_steps / (hi - lo) : 0.0;
  for (std::size_t l = 0; l < samples.size(); ++l) {
    if (!targets.valid[l]) continue;
    const double y = samples[l];
    int c = 1 + std::clamp(static_cast<int>(std::floor((y - lo) * scale)), 0, threshold_steps);
    while (c > 1 && !(y > grid[static_cast<std::size_t>(c - 1)])) --c;
    while (c < levels && y > grid[static_cast<std::size_t>(c)]) ++c;
    (targets.bits[l] ? ones : zeros)[static_cast<std::size_t>(c)]++;
  }

  // errors(i) = ones with c <= i + zeros with c > i
  long long ones_le = ones[0];
  long long zeros_gt = 0;
  for (int c = 1; c <= levels; ++c) zeros_gt += zeros[static_cast<std::size_t>(c)];
  OffsetSweep best{std::numeric_limits<long long>::max(), total, 0, grid.front()};
  for (int i = 0; i < levels; ++i) {
    const long long err = ones_le + zeros_gt;
    if (err < best.errors) {
      best.errors = err;
      best.threshold_index = i;
      best.threshold = grid[static_cast<std::size_t>(i)];
    }
    ones_le += ones[static_cast<std::size_t>(i) + 1];
    zeros_gt -= zeros[static_cast<std::size_t>(i) + 1];
  }
  return best;
}

EvalResult sweep_eval(std::span<const double> trace, const Targets& targets, int samples_per_bit,
                      const SweepOptions& options) {
  if (options.threshold_steps < 1) throw std::invalid_argument("threshold grid is empty");
  if (samples_per_bit < 1) throw std::invalid_argument("samples per bit must be >= 1");
  const auto b = static_cast<std::size_t>(samples_per_bit);
  if (trace.size() != targets.size() * b)
    throw std::invalid_argument(fmt::format("trace of {} samples does not hold {} bits of {} samples",
                                            trace.size(), targets.size(), b));
  int n0 = 0;
  int n1 = samples_per_bit - 1;
  if (options.fixed_offset) {
    if (*options.fixed_offset < 0 || *options.fixed_offset >= samples_per_bit)
      throw std::invalid_argument("fixed sampling offset outside the bit slot");
    n0 = n1 = *options.fixed_offset;
  }

  EvalResult res;
  res.error_count = std::numeric_limits<long long>::max();
  std::vector<double> column(targets.size());
  for (int n = n0; n <= n1; ++n) {
    for (std::size_t l = 0; l < column.size(); ++l)
      column[l] = trace[l * b + static_cast<std::size_t>(n)];
    const auto s = sweep_offset(column, targets, options.threshold_steps);
    if (s.errors < res.error_count) {
      res.error_count = s.errors;
      res.total_bits = s.bits;
      res.best_sampling_index = n;
      res.best_threshold_index = s.threshold_index;
      res.best_threshold = s.threshold;
    }
  }
  res.ber = static_cast<double>(res.error_count) / static_cast<double>(res.total_bits);
  res.is_error_free = res.error_count == 0;
  res.statistical_limit = statistical_ber_limit(res.total_bits);
  return res;
}

TestSummary summarize(std::vector<EvalResult> traces) {
  if (traces.empty()) throw std::invalid_argument("no test traces to summarise");
  TestSummary s;
  std::vector<int> votes;
  for (const auto& t : traces) {
    s.error_count += t.error_count;
    s.total_bits += t.total_bits;
    if (t.best_sampling_index >= static_cast<int>(votes.size()))
      votes.resize(static_cast<std::size_t>(t.best_sampling_index) + 1, 0);
    ++votes[static_cast<std::size_t>(t.best_sampling_index)];
  }
  s.ber = static_cast<double>(s.error_count) / static_cast<double>(s.total_bits);
  s.statistical_limit = statistical_ber_limit(s.total_bits);
  s.is_error_free = s.error_count == 0;
  s.sampling_index = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
  s.traces = std::move(traces);
  return s;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson inputs differ in length");
  if (x.size() < 2) throw std::invalid_argument("pearson needs at least two samples");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw std::invalid_argument("pearson input has zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace {

constexpr int kMaxWeight = 5;

// Calls f(outputs) with the 0/1 labelling of all 2^window points for every
// threshold function reachable with integer weights in [-kMaxWeight, kMaxWeight].
template <class F>
void for_each_threshold_function(int window, F&& f) {
  const int points = 1 << window;
  std::vector<int> w(static_cast<std::size_t>(window), -kMaxWeight);
  std::vector<int> dot(static_cast<std::size_t>(points));
  std::vector<std::uint8_t> labels(static_cast<std::size_t>(points));
  while (true) {
    for (int x = 0; x < points; ++x) {
      int s = 0;
      for (int i = 0; i < window; ++i)
        if ((x >> i) & 1) s += w[static_cast<std::size_t>(i)];
      dot[static_cast<std::size_t>(x)] = s;
    }
    std::vector<int> levels(dot);
    std::ranges::sort(levels);
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    // thresholds below every level, between neighbours, above every level
    for (std::size_t t = 0; t <= levels.size(); ++t) {
      const double r = t == 0 ? levels.front() - 0.5
                              : (t == levels.size() ? levels.back() + 0.5
                                                    : 0.5 * (levels[t - 1] + levels[t]));
      for (int x = 0; x < points; ++x) labels[static_cast<std::size_t>(x)] = dot[static_cast<std::size_t>(x)] > r;
      f(labels);
    }
    int i = 0;
    while (i < window && w[static_cast<std::size_t>(i)] == kMaxWeight) w[static_cast<std::size_t>(i++)] = -kMaxWeight;
    if (i == window) break;
    ++w[static_cast<std::size_t>(i)];
  }
}

}  // namespace

double linear_separability_floor(const TaskSpec& task, int window) {
  task.validate();
  if (window > 4) throw std::invalid_argument("exact enumeration is limited to windows <= 4");
  if (window < task.memory())
    throw std::invalid_argument(fmt::format("{} needs a window of at least {} bits", task.label(),
                                            task.memory()));
  const int points = 1 << window;
  // point x holds window bits b_{l-window+1} .. b_l with b_l in bit 0
  std::vector<std::uint8_t> target(static_cast<std::size_t>(points));
  for (int x = 0; x < points; ++x) {
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(window));
    for (int i = 0; i < window; ++i)
      bits[static_cast<std::size_t>(window - 1 - i)] = static_cast<std::uint8_t>((x >> i) & 1);
    const auto t = make_targets(task, bits);
    target[static_cast<std::size_t>(x)] = t.bits.back();
  }
  int best = points;
  for_each_threshold_function(window, [&](const std::vector<std::uint8_t>& labels) {
    int err = 0;
    for (int x = 0; x < points; ++x) err += labels[static_cast<std::size_t>(x)] != target[static_cast<std::size_t>(x)];
    best = std::min(best, err);
  });
  return static_cast<double>(best) / points;
}

std::size_t threshold_function_count(int window) {
  if (window < 1 || window > 4) throw std::invalid_argument("window must be in 1..4");
  std::set<std::vector<std::uint8_t>> seen;
  for_each_threshold_function(window, [&](const std::vector<std::uint8_t>& labels) { seen.insert(labels); });
  return seen.size();
}

LevelHistograms level_histograms(std::span<const double> trace,
                                 std::span<const std::uint8_t> input_bits, int samples_per_bit,
                                 int sampling_index) {
  if (samples_per_bit < 1) throw std::invalid_argument("samples per bit must be >= 1");
  const auto b = static_cast<std::size_t>(samples_per_bit);
  if (trace.size() != input_bits.size() * b)
    throw std::invalid_argument("trace length does not match the input bits");
  if (sampling_index < 0 || sampling_index >= samples_per_bit)
    throw std::invalid_argument("sampling index outside the bit slot");
  LevelHistograms h;
  for (std::size_t l = 1; l < input_bits.size(); ++l) {
    const std::size_t sym = 2u * input_bits[l - 1] + input_bits[l];
    h.levels[sym].push_back(trace[l * b + static_cast<std::size_t>(sampling_index)]);
  }
  return h;
}

}  // namespace cperc
