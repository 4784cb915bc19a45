#include "cperc/link.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include <fmt/format.h>

#include "cperc/seeds.hpp"

namespace cperc {

namespace {

constexpr std::size_t kPeriod = 255;
constexpr std::size_t kTailBits = 16;

bool noise_enabled(double snr_db) { return !(std::isinf(snr_db) && snr_db > 0.0); }

}  // namespace

void LinkSetup::validate() const {
  channel.validate(bit_rate_hz);
  perceptron.validate();
  if (trace_bits < 1) throw std::invalid_argument("trace must hold at least one bit");
  if (prbs_seed == 0 || prbs_seed > 255) throw std::invalid_argument("PRBS seed must be in 1..255");
  samples_per_bit(channel.sample_rate_hz, bit_rate_hz);
  if (perceptron.n_taps > 1) delay_in_samples(perceptron.delta_t_s, channel.sample_rate_hz);
}

Link::Link(LinkSetup setup) : setup_(std::move(setup)) {
  setup_.validate();
  bsa_ = cperc::samples_per_bit(setup_.channel.sample_rate_hz, setup_.bit_rate_hz);
  delay_ = setup_.perceptron.n_taps > 1
               ? delay_in_samples(setup_.perceptron.delta_t_s, setup_.channel.sample_rate_hz)
               : 0;

  stream_bits_ = prbs8(kHistoryBits + kPeriod + setup_.trace_bits + kTailBits, setup_.prbs_seed);
  const BitSequence seq{stream_bits_, setup_.bit_rate_hz};
  stream_ = setup_.modulation == Modulation::Nrz ? modulate_nrz(seq, setup_.channel)
                                                 : modulate_bpsk(seq, setup_.channel);

  const auto& u = stream_.samples;
  lag_prefix_.resize(static_cast<std::size_t>(setup_.perceptron.n_taps));
  for (std::size_t m = 0; m < lag_prefix_.size(); ++m) {
    const std::size_t lag = m * static_cast<std::size_t>(delay_);
    auto& p = lag_prefix_[m];
    const std::size_t n = u.size() > lag ? u.size() - lag : 0;
    p.assign(n + 1, cplx{});
    for (std::size_t q = 0; q < n; ++q) p[q + 1] = p[q] + u[q + lag] * std::conj(u[q]);
  }
  latency_ = calibrate_latency();
}

Acquisition Link::acquire(std::uint64_t seed) const {
  Acquisition a = acquire_clean(derive_seed(seed, "start-phase") % kPeriod);
  a.seed = seed;
  a.phase_noise_seed = derive_seed(seed, "phase-noise");
  a.noise_seed = derive_seed(seed, "detector");
  a.jitter_shift = draw_jitter_shift(setup_.channel.jitter_std_s, setup_.channel.sample_rate_hz,
                                     derive_seed(seed, "jitter"));
  a.snr_db = setup_.channel.snr_db;
  a.phase_noise_frac = setup_.perceptron.phase_noise_frac;
  const auto head = static_cast<std::ptrdiff_t>(kHistoryBits) * bsa_ -
                    (setup_.perceptron.n_taps - 1) * delay_;
  const int shift = effective_shift(a);
  if (shift >= head || -shift >= static_cast<std::ptrdiff_t>(kTailBits) * bsa_)
    throw std::runtime_error(
        fmt::format("trigger offset of {} samples exceeds the stream margin", shift));
  return a;
}

Acquisition Link::acquire_clean(std::size_t start_phase) const {
  if (start_phase >= kPeriod) throw std::invalid_argument("PRBS phase must be < 255");
  Acquisition a;
  a.start_phase = start_phase;
  const auto first = static_cast<std::ptrdiff_t>(start_phase);
  const auto h = static_cast<std::ptrdiff_t>(kHistoryBits);
  a.history.assign(stream_bits_.begin() + first, stream_bits_.begin() + first + h);
  a.bits.assign(stream_bits_.begin() + first + h,
                stream_bits_.begin() + first + h + static_cast<std::ptrdiff_t>(setup_.trace_bits));
  return a;
}

Targets Link::targets(const TaskSpec& task, const Acquisition& acq) const {
  if (static_cast<std::size_t>(task.memory()) > kHistoryBits + 1)
    throw std::invalid_argument(fmt::format("{} needs more history than the link keeps", task.label()));
  std::vector<std::uint8_t> all(acq.history);
  all.insert(all.end(), acq.bits.begin(), acq.bits.end());
  return make_targets(task, all).tail(acq.history.size());
}

std::size_t Link::trace_start_sample(const Acquisition& acq) const {
  return (kHistoryBits + acq.start_phase) * static_cast<std::size_t>(bsa_);
}

int Link::effective_shift(const Acquisition& acq) const {
  return acq.jitter_shift + setup_.output_delay_samples - latency_;
}

std::vector<cplx> Link::tap_weights(std::span<const double> phases, const Acquisition& acq) const {
  const auto& cfg = setup_.perceptron;
  if (phases.size() != static_cast<std::size_t>(cfg.n_taps))
    throw std::invalid_argument(fmt::format("{} phases for {} taps", phases.size(), cfg.n_taps));
  const auto eps = draw_phase_noise(phases, acq.phase_noise_frac, cfg.phase_noise_mode,
                                    acq.phase_noise_seed);
  std::vector<cplx> c(phases.size());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = cfg.amplitudes[k] * std::polar(1.0, phases[k] + eps[k]);
  return c;
}

double Link::window_mean_power(std::span<const cplx> weights, std::ptrdiff_t first,
                               std::size_t count) const {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(weights.size());
  double total = 0.0;
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    for (std::ptrdiff_t m = k; m < n; ++m) {
      const auto& p = lag_prefix_[static_cast<std::size_t>(m - k)];
      const std::ptrdiff_t q0 = first - m * delay_;
      const cplx g = p[static_cast<std::size_t>(q0) + count] - p[static_cast<std::size_t>(q0)];
      const cplx term = weights[static_cast<std::size_t>(k)] *
                        std::conj(weights[static_cast<std::size_t>(m)]) * g;
      total += (m == k ? 1.0 : 2.0) * term.real();
    }
  }
  return total / static_cast<double>(count);
}

RealWaveform Link::input_trace(const Acquisition& acq) const {
  const std::size_t s = trace_start_sample(acq);
  const std::size_t w = setup_.trace_bits * static_cast<std::size_t>(bsa_);
  RealWaveform p{std::vector<double>(w), stream_.sample_rate_hz};
  for (std::size_t j = 0; j < w; ++j) p.samples[j] = std::norm(stream_.samples[s + j]);
  return detect(p, acq.snr_db, derive_seed(acq.noise_seed, "input"));
}

RealWaveform Link::output_trace(std::span<const double> phases, const Acquisition& acq) const {
  auto cfg = setup_.perceptron;
  const int shift = effective_shift(acq);
  const std::size_t margin = static_cast<std::size_t>(std::abs(shift));
  const std::size_t head = static_cast<std::size_t>((cfg.n_taps - 1) * delay_) + margin;
  const std::size_t w = setup_.trace_bits * static_cast<std::size_t>(bsa_);
  const std::size_t s = trace_start_sample(acq);

  ComplexWaveform seg{{stream_.samples.begin() + static_cast<std::ptrdiff_t>(s - head),
                       stream_.samples.begin() + static_cast<std::ptrdiff_t>(s + w + margin)},
                      stream_.sample_rate_hz};
  const auto taps = delay_taps(seg, cfg);
  RealWaveform y = perceptron_output(taps, phases, acq.phase_noise_frac, acq.phase_noise_seed,
                                     cfg.phase_noise_mode);
  y.samples.resize(seg.size());
  y = shift_trace(y, shift);
  RealWaveform trace{{y.samples.begin() + static_cast<std::ptrdiff_t>(head),
                      y.samples.begin() + static_cast<std::ptrdiff_t>(head + w)},
                     y.sample_rate_hz};
  return detect(trace, acq.snr_db, acq.noise_seed);
}

std::vector<double> Link::sampled_output(std::span<const double> phases, const Acquisition& acq,
                                         std::span<const int> offsets) const {
  for (int n : offsets)
    if (n < 0 || n >= bsa_) throw std::invalid_argument("sampling offset outside the bit slot");
  const auto c = tap_weights(phases, acq);
  const std::size_t b = static_cast<std::size_t>(bsa_);
  const std::size_t w = setup_.trace_bits * b;
  const std::ptrdiff_t i0 = static_cast<std::ptrdiff_t>(trace_start_sample(acq)) - effective_shift(acq);

  double sd = 0.0;
  if (noise_enabled(acq.snr_db)) {
    const double mean = window_mean_power(c, i0, w);
    sd = std::sqrt(std::max(mean, 0.0) / std::pow(10.0, acq.snr_db / 10.0));
  }

  const cplx* u = stream_.samples.data();
  const std::size_t no = offsets.size();
  std::vector<double> out(setup_.trace_bits * no);
  for (std::size_t l = 0; l < setup_.trace_bits; ++l) {
    for (std::size_t o = 0; o < no; ++o) {
      const std::size_t j = l * b + static_cast<std::size_t>(offsets[o]);
      const std::ptrdiff_t i = i0 + static_cast<std::ptrdiff_t>(j);
      cplx v{};
      for (std::size_t k = 0; k < c.size(); ++k)
        v += c[k] * u[i - static_cast<std::ptrdiff_t>(k) * delay_];
      double y = std::norm(v);
      if (sd > 0.0) y += sd * counter_normal(acq.noise_seed, j);
      out[l * no + o] = y;
    }
  }
  return out;
}

Eigen::MatrixXd Link::tap_power_features(const Acquisition& acq, int offset) const {
  if (offset < 0 || offset >= bsa_) throw std::invalid_argument("sampling offset outside the bit slot");
  const auto& cfg = setup_.perceptron;
  const std::size_t b = static_cast<std::size_t>(bsa_);
  const std::size_t w = setup_.trace_bits * b;
  const std::ptrdiff_t i0 = static_cast<std::ptrdiff_t>(trace_start_sample(acq)) - effective_shift(acq);
  const bool noisy = noise_enabled(acq.snr_db);
  const auto& p0 = lag_prefix_[0];

  Eigen::MatrixXd f(static_cast<Eigen::Index>(setup_.trace_bits), cfg.n_taps);
  for (int k = 0; k < cfg.n_taps; ++k) {
    const double a2 = cfg.amplitudes[static_cast<std::size_t>(k)] * cfg.amplitudes[static_cast<std::size_t>(k)];
    const std::ptrdiff_t first = i0 - k * delay_;
    double sd = 0.0;
    if (noisy) {
      const double mean =
          a2 * (p0[static_cast<std::size_t>(first) + w] - p0[static_cast<std::size_t>(first)]).real() /
          static_cast<double>(w);
      sd = std::sqrt(std::max(mean, 0.0) / std::pow(10.0, acq.snr_db / 10.0));
    }
    const auto seed = derive_seed(acq.noise_seed, "tap", static_cast<std::uint64_t>(k));
    for (std::size_t l = 0; l < setup_.trace_bits; ++l) {
      const std::size_t j = l * b + static_cast<std::size_t>(offset);
      double v = a2 * std::norm(stream_.samples[static_cast<std::size_t>(first + static_cast<std::ptrdiff_t>(j))]);
      if (sd > 0.0) v += sd * counter_normal(seed, j);
      f(static_cast<Eigen::Index>(l), k) = v;
    }
  }
  return f;
}

int Link::calibrate_latency() const {
  // back-to-back: both detectors see an intensity-modulated copy of the
  // stream, the output one through the bench path
  const auto probe = intensity(modulate_nrz(BitSequence{stream_bits_, setup_.bit_rate_hz}, setup_.channel));
  const std::size_t b = static_cast<std::size_t>(bsa_);
  const std::size_t margin = static_cast<std::size_t>(std::abs(setup_.output_delay_samples)) + b;
  const std::size_t w = std::min(kPeriod, setup_.trace_bits + kTailBits / 2) * b;
  const std::size_t s = kHistoryBits * b;
  if (margin > s) throw std::invalid_argument("output delay exceeds the stream margin");
  RealWaveform seg{std::vector<double>(w + 2 * margin), stream_.sample_rate_hz};
  for (std::size_t j = 0; j < seg.size(); ++j)
    seg.samples[j] = probe.samples[s - margin + j];
  const auto through = shift_trace(seg, setup_.output_delay_samples);
  const std::span<const double> ref(seg.samples.data() + margin, w);
  const std::span<const double> meas(through.samples.data() + margin, w);
  return align_traces(ref, meas, static_cast<int>(margin));
}

}  // namespace cperc
