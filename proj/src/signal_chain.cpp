#include "cperc/signal_chain.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "cperc/seeds.hpp"

namespace cperc {

void BitSequence::validate() const {
  if (bits.empty()) throw std::invalid_argument("bit sequence is empty");
  if (!(bit_rate_hz > 0.0)) throw std::invalid_argument("bit rate must be positive");
  for (auto b : bits)
    if (b > 1) throw std::invalid_argument("bit sequence holds a value other than 0/1");
}

void ChannelParams::validate(double bit_rate_hz) const {
  if (!(sample_rate_hz > 0.0)) throw std::invalid_argument("sample rate must be positive");
  if (!(bit_rate_hz > 0.0)) throw std::invalid_argument("bit rate must be positive");
  if (sample_rate_hz < 2.0 * bit_rate_hz)
    throw std::invalid_argument(fmt::format(
        "sample rate {:g} Sa/s is below twice the bit rate {:g} b/s", sample_rate_hz, bit_rate_hz));
  if (!(analog_bandwidth_hz > 0.0)) throw std::invalid_argument("analog bandwidth must be positive");
  if (!(extinction_ratio_db >= 0.0)) throw std::invalid_argument("extinction ratio must be >= 0 dB");
  if (std::isnan(snr_db)) throw std::invalid_argument("snr is NaN");
  if (!(jitter_std_s >= 0.0)) throw std::invalid_argument("jitter must be >= 0");
}

std::vector<std::uint8_t> prbs8(std::size_t length_bits, unsigned seed) {
  if (seed == 0 || seed > 255)
    throw std::invalid_argument(fmt::format("PRBS-8 seed must be in 1..255, got {}", seed));
  std::vector<std::uint8_t> out(length_bits);
  unsigned s = seed;
  for (auto& bit : out) {
    bit = static_cast<std::uint8_t>((s >> 7) & 1u);
    const unsigned fb = ((s >> 7) ^ (s >> 5) ^ (s >> 4) ^ (s >> 3)) & 1u;
    s = ((s << 1) | fb) & 0xFFu;
  }
  return out;
}

int samples_per_bit(double sample_rate_hz, double bit_rate_hz) {
  if (!(sample_rate_hz > 0.0) || !(bit_rate_hz > 0.0))
    throw std::invalid_argument("sample rate and bit rate must be positive");
  const double ratio = sample_rate_hz / bit_rate_hz;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * ratio || rounded < 2.0)
    throw std::invalid_argument(fmt::format(
        "{:g} Sa/s over {:g} b/s gives {:g} samples per bit; an integer >= 2 is required",
        sample_rate_hz, bit_rate_hz, ratio));
  return static_cast<int>(rounded);
}

std::vector<double> gaussian_lowpass(std::span<const double> x, double sample_rate_hz,
                                     double cutoff_hz) {
  std::vector<double> out(x.begin(), x.end());
  if (x.empty() || std::isinf(cutoff_hz)) return out;
  if (!(cutoff_hz > 0.0)) throw std::invalid_argument("cutoff must be positive");
  const double sigma = std::sqrt(std::log(2.0)) / (kTwoPi * cutoff_hz) * sample_rate_hz;
  if (sigma < 1e-6) return out;

  const int half = static_cast<int>(std::ceil(6.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
  double norm = 0.0;
  for (int t = -half; t <= half; ++t) {
    const double v = std::exp(-0.5 * t * t / (sigma * sigma));
    kernel[static_cast<std::size_t>(t + half)] = v;
    norm += v;
  }
  for (auto& v : kernel) v /= norm;

  const auto n = static_cast<std::ptrdiff_t>(x.size());
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (int t = -half; t <= half; ++t) {
      const std::ptrdiff_t i = std::clamp<std::ptrdiff_t>(j - t, 0, n - 1);
      acc += kernel[static_cast<std::size_t>(t + half)] * x[static_cast<std::size_t>(i)];
    }
    out[static_cast<std::size_t>(j)] = acc;
  }
  return out;
}

namespace {

std::vector<double> hold_levels(const BitSequence& bits, int b, double low, double high) {
  std::vector<double> levels(bits.size() * static_cast<std::size_t>(b));
  for (std::size_t l = 0; l < bits.size(); ++l)
    std::fill_n(levels.begin() + static_cast<std::ptrdiff_t>(l * static_cast<std::size_t>(b)), b,
                bits.bits[l] ? high : low);
  return levels;
}

}  // namespace

ComplexWaveform modulate_nrz(const BitSequence& bits, const ChannelParams& params) {
  bits.validate();
  params.validate(bits.bit_rate_hz);
  const int b = samples_per_bit(params.sample_rate_hz, bits.bit_rate_hz);
  const double low = std::pow(10.0, -params.extinction_ratio_db / 10.0);
  const auto power = gaussian_lowpass(hold_levels(bits, b, low, 1.0), params.sample_rate_hz,
                                      params.analog_bandwidth_hz);
  ComplexWaveform field{std::vector<cplx>(power.size()), params.sample_rate_hz};
  for (std::size_t j = 0; j < power.size(); ++j)
    field.samples[j] = cplx{std::sqrt(std::max(power[j], 0.0)), 0.0};
  return field;
}

ComplexWaveform modulate_bpsk(const BitSequence& bits, const ChannelParams& params) {
  bits.validate();
  params.validate(bits.bit_rate_hz);
  const int b = samples_per_bit(params.sample_rate_hz, bits.bit_rate_hz);
  const auto phase = gaussian_lowpass(hold_levels(bits, b, 0.0, kPi), params.sample_rate_hz,
                                      params.analog_bandwidth_hz);
  ComplexWaveform field{std::vector<cplx>(phase.size()), params.sample_rate_hz};
  for (std::size_t j = 0; j < phase.size(); ++j) field.samples[j] = std::polar(1.0, phase[j]);
  return field;
}

RealWaveform detect(const RealWaveform& power, double snr_db, std::uint64_t rng_seed,
                    std::optional<double> reference_power) {
  RealWaveform out = power;
  if (std::isinf(snr_db) && snr_db > 0.0) return out;
  const double p = reference_power ? *reference_power : power.mean();
  const double sd = std::sqrt(std::max(p, 0.0) / std::pow(10.0, snr_db / 10.0));
  for (std::size_t j = 0; j < out.samples.size(); ++j)
    out.samples[j] += sd * counter_normal(rng_seed, j);
  return out;
}

int draw_jitter_shift(double jitter_std_s, double sample_rate_hz, std::uint64_t rng_seed) {
  if (!(jitter_std_s >= 0.0)) throw std::invalid_argument("jitter must be >= 0");
  if (jitter_std_s == 0.0) return 0;
  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> dist(0.0, jitter_std_s * sample_rate_hz);
  return static_cast<int>(std::lround(dist(rng)));
}

namespace {

template <class W>
W shift_impl(const W& trace, int shift) {
  W out{decltype(trace.samples)(trace.size()), trace.sample_rate_hz};
  const auto n = static_cast<std::ptrdiff_t>(trace.size());
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    const std::ptrdiff_t src = j - shift;
    if (src >= 0 && src < n)
      out.samples[static_cast<std::size_t>(j)] = trace.samples[static_cast<std::size_t>(src)];
  }
  return out;
}

}  // namespace

RealWaveform shift_trace(const RealWaveform& trace, int shift) { return shift_impl(trace, shift); }
ComplexWaveform shift_trace(const ComplexWaveform& trace, int shift) {
  return shift_impl(trace, shift);
}

RealWaveform apply_jitter(const RealWaveform& trace, double jitter_std_s, std::uint64_t rng_seed) {
  return shift_trace(trace, draw_jitter_shift(jitter_std_s, trace.sample_rate_hz, rng_seed));
}

ComplexWaveform apply_jitter(const ComplexWaveform& trace, double jitter_std_s,
                             std::uint64_t rng_seed) {
  return shift_trace(trace, draw_jitter_shift(jitter_std_s, trace.sample_rate_hz, rng_seed));
}

int align_traces(std::span<const double> reference, std::span<const double> measured,
                 std::optional<int> max_lag) {
  if (reference.empty() || measured.empty()) throw std::invalid_argument("cannot align empty traces");
  auto centered = [](std::span<const double> x) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    std::vector<double> c(x.size());
    double energy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      c[i] = x[i] - m;
      energy += c[i] * c[i];
    }
    if (!(energy > 0.0))
      throw std::invalid_argument("cannot align a constant or all-zero trace");
    return c;
  };
  const auto r = centered(reference);
  const auto m = centered(measured);
  const auto nr = static_cast<std::ptrdiff_t>(r.size());
  const auto nm = static_cast<std::ptrdiff_t>(m.size());

  std::ptrdiff_t lo = -(nr - 1);
  std::ptrdiff_t hi = nm - 1;
  if (max_lag) {
    if (*max_lag < 0) throw std::invalid_argument("max_lag must be >= 0");
    lo = std::max<std::ptrdiff_t>(lo, -*max_lag);
    hi = std::min<std::ptrdiff_t>(hi, *max_lag);
  }

  std::ptrdiff_t best_d = lo;
  double best = -std::numeric_limits<double>::infinity();
  for (std::ptrdiff_t d = lo; d <= hi; ++d) {
    const std::ptrdiff_t j0 = std::max<std::ptrdiff_t>(0, -d);
    const std::ptrdiff_t j1 = std::min(nr, nm - d);
    double acc = 0.0;
    for (std::ptrdiff_t j = j0; j < j1; ++j)
      acc += r[static_cast<std::size_t>(j)] * m[static_cast<std::size_t>(j + d)];
    if (acc > best) {
      best = acc;
      best_d = d;
    }
  }
  return static_cast<int>(best_d);
}

}  // namespace cperc
