#pragma once

// Transmitter and receiver abstraction: PRBS source, NRZ / binary phase
// modulation through a finite-bandwidth chain, detector noise, trigger
// jitter and cross-correlation alignment.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "cperc/waveform.hpp"

namespace cperc {

struct BitSequence {
  std::vector<std::uint8_t> bits;
  double bit_rate_hz = 0.0;

  std::size_t size() const { return bits.size(); }
  void validate() const;
};

inline constexpr double kNoiseOff = std::numeric_limits<double>::infinity();

struct ChannelParams {
  double sample_rate_hz = 80e9;
  double analog_bandwidth_hz = 16e9;
  double extinction_ratio_db = 7.0;  // +inf for an ideal zero level
  double snr_db = 14.0;              // kNoiseOff disables detector noise
  double jitter_std_s = 2e-12;
  std::uint64_t rng_seed = 1;

  void validate(double bit_rate_hz) const;
};

/// Fibonacci LFSR for x^8 + x^6 + x^5 + x^4 + 1, output taken from the top
/// bit of the register. Period 255 for every nonzero seed.
std::vector<std::uint8_t> prbs8(std::size_t length_bits, unsigned seed);

/// sample_rate / bit_rate; throws unless it is an integer >= 2.
int samples_per_bit(double sample_rate_hz, double bit_rate_hz);

/// Gaussian impulse response with -3 dB at cutoff_hz, edges extended with
/// the boundary value. An infinite cutoff returns the input.
std::vector<double> gaussian_lowpass(std::span<const double> x, double sample_rate_hz,
                                     double cutoff_hz);

/// Power levels 1 and 10^(-ER/10) per bit, low-passed, field = sqrt(power).
ComplexWaveform modulate_nrz(const BitSequence& bits, const ChannelParams& params);

/// Unit-magnitude field with phase pi * lowpass(bits).
ComplexWaveform modulate_bpsk(const BitSequence& bits, const ChannelParams& params);

/// Adds white Gaussian noise of variance P / 10^(snr/10). P is the mean of
/// the trace unless reference_power is given. Sample j of the noise depends
/// only on (seed, j).
RealWaveform detect(const RealWaveform& power, double snr_db, std::uint64_t rng_seed,
                    std::optional<double> reference_power = std::nullopt);

/// Integer trigger offset for one acquisition: round(N(0, (std * fs)^2)).
int draw_jitter_shift(double jitter_std_s, double sample_rate_hz, std::uint64_t rng_seed);

/// Delays the whole trace by `shift` samples (negative advances it),
/// zero-filling the vacated end.
RealWaveform shift_trace(const RealWaveform& trace, int shift);
ComplexWaveform shift_trace(const ComplexWaveform& trace, int shift);

RealWaveform apply_jitter(const RealWaveform& trace, double jitter_std_s, std::uint64_t rng_seed);
ComplexWaveform apply_jitter(const ComplexWaveform& trace, double jitter_std_s,
                             std::uint64_t rng_seed);

/// Delay d maximising sum_j (ref_j - mean)(meas_{j+d} - mean) over
/// |d| <= max_lag (default: full overlap). Ties resolve to the smallest d.
int align_traces(std::span<const double> reference, std::span<const double> measured,
                 std::optional<int> max_lag = std::nullopt);

}  // namespace cperc
