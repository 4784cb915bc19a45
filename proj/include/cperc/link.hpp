#pragma once

// End-to-end acquisition: PRBS stream -> modulator -> delay taps ->
// interference -> trigger jitter -> detector. The PRBS is periodic, so the
// modulated stream is built once and every acquisition is a window into it
// starting at a random phase.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cperc/core_model.hpp"
#include "cperc/signal_chain.hpp"
#include "cperc/tasks.hpp"

namespace cperc {

enum class Modulation { Nrz, Bpsk };

struct LinkSetup {
  double bit_rate_hz = 16e9;
  ChannelParams channel;
  Modulation modulation = Modulation::Nrz;
  PerceptronConfig perceptron = PerceptronConfig::nominal();
  std::size_t trace_bits = 1000;
  unsigned prbs_seed = 1;
  int output_delay_samples = 0;  // path difference between the input and output detectors

  void validate() const;
};

struct Acquisition {
  std::uint64_t seed = 0;
  std::size_t start_phase = 0;  // PRBS phase of the first trace bit
  int jitter_shift = 0;
  std::uint64_t phase_noise_seed = 0;
  std::uint64_t noise_seed = 0;
  double snr_db = kNoiseOff;
  double phase_noise_frac = 0.0;
  std::vector<std::uint8_t> history;  // bits preceding the trace, oldest first
  std::vector<std::uint8_t> bits;
};

class Link {
 public:
  static constexpr std::size_t kHistoryBits = 16;

  explicit Link(LinkSetup setup);

  const LinkSetup& setup() const { return setup_; }
  int samples_per_bit() const { return bsa_; }
  int tap_delay() const { return delay_; }
  /// Output-versus-input delay found by cross-correlating a back-to-back trace.
  int latency() const { return latency_; }

  /// Draws start phase, phase noise, jitter and detector noise from `seed`.
  Acquisition acquire(std::uint64_t seed) const;
  /// A noiseless acquisition at a given PRBS phase.
  Acquisition acquire_clean(std::size_t start_phase) const;

  /// Targets for the trace bits; the history supplies the task's memory, so
  /// every position is valid.
  Targets targets(const TaskSpec& task, const Acquisition& acq) const;

  /// Detected input intensity over the trace (input reference detector).
  RealWaveform input_trace(const Acquisition& acq) const;

  /// Full-length aligned output trace, built from the waveform operations.
  RealWaveform output_trace(std::span<const double> phases, const Acquisition& acq) const;

  /// Only the samples at the given offsets of every bit, laid out as
  /// out[l * offsets.size() + i]. Equal to the matching entries of
  /// output_trace up to rounding.
  std::vector<double> sampled_output(std::span<const double> phases, const Acquisition& acq,
                                     std::span<const int> offsets) const;

  /// Detected |u_k|^2 of every tap at one sampling offset, one detector per
  /// tap; rows are bits.
  Eigen::MatrixXd tap_power_features(const Acquisition& acq, int offset) const;

  /// Field of the whole precomputed stream.
  const ComplexWaveform& stream() const { return stream_; }

 private:
  std::size_t trace_start_sample(const Acquisition& acq) const;
  int effective_shift(const Acquisition& acq) const;
  std::vector<cplx> tap_weights(std::span<const double> phases, const Acquisition& acq) const;
  double window_mean_power(std::span<const cplx> weights, std::ptrdiff_t first, std::size_t count) const;
  int calibrate_latency() const;

  LinkSetup setup_;
  int bsa_ = 0;
  int delay_ = 0;
  int latency_ = 0;
  std::vector<std::uint8_t> stream_bits_;
  ComplexWaveform stream_;
  // lag_prefix_[m][q] = sum_{q' < q} u[q' + m*delay] conj(u[q'])
  std::vector<std::vector<cplx>> lag_prefix_;
};

}  // namespace cperc
