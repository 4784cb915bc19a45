#pragma once

// Complex perceptron transfer function: N delayed, attenuated copies of the
// input field, each rotated by a trainable phase, summed coherently and
// square-law detected.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "cperc/waveform.hpp"

namespace cperc {

/// How the per-trace phase fluctuation scales.
enum class PhaseNoiseMode {
  FullTurn,  ///< std = frac * 2*pi for every tap
  Relative,  ///< std = frac * |phi_k|
};

/// Nominal per-spiral power transmissions of the fabricated device.
inline constexpr double kNominalAmplitudeSq[4] = {1.0, 0.58, 0.34, 0.2};
inline constexpr double kNominalDeltaT = 50e-12;
inline constexpr double kNominalLossDbPerCm = 6.0;
/// Spiral length that makes a 6 dB/cm loss give a^2_2 = 0.58.
inline const double kNominalSpiralLengthCm = 10.0 * std::log10(1.0 / 0.58) / kNominalLossDbPerCm;

struct PerceptronConfig {
  int n_taps = 4;
  double delta_t_s = kNominalDeltaT;
  std::vector<double> amplitudes;  // field amplitudes a_k, a_0 == 1
  std::vector<double> phases;      // phi_k in radians
  double phase_noise_frac = 0.0;
  PhaseNoiseMode phase_noise_mode = PhaseNoiseMode::FullTurn;

  /// Four taps, 50 ps, a^2 = {1, 0.58, 0.34, 0.2}, zero phases, no noise.
  static PerceptronConfig nominal();

  void validate() const;
};

/// a_k = sqrt(10^(-loss * k * length / 10)), k = 0..n_taps-1.
std::vector<double> amplitudes_from_loss(double loss_db_per_cm, double spiral_length_cm,
                                         int n_taps);

/// Delay of one spiral in samples. Throws unless delta_t * fs is an integer;
/// the message names the nearest compliant sample rate.
int delay_in_samples(double delta_t_s, double sample_rate_hz);

/// Copies of the input, tap k delayed by k*delta_t (head zero-padded) and
/// scaled by a_k. Every copy has input.size() + (N-1)*delay samples.
std::vector<ComplexWaveform> delay_taps(const ComplexWaveform& input,
                                        const PerceptronConfig& config);

/// Per-tap phase fluctuations for one acquisition. Deterministic in seed;
/// all zeros when frac == 0.
std::vector<double> draw_phase_noise(std::span<const double> phases, double phase_noise_frac,
                                     PhaseNoiseMode mode, std::uint64_t seed);

/// y(t) = |sum_k tap_k(t) exp(i(phi_k + eps_k))|^2 with eps drawn once per call.
RealWaveform perceptron_output(std::span<const ComplexWaveform> taps,
                               std::span<const double> phases, double phase_noise_frac,
                               std::uint64_t rng_seed,
                               PhaseNoiseMode mode = PhaseNoiseMode::FullTurn);

// ---------------------------------------------------------------------------
// Three-signal toy model.

struct ToyModelParams {
  double phi_c = 0.0;  // common phase of taps 2 and 3
  double phi_r = 0.0;  // phase of tap 3 relative to tap 2
  double a2 = 1.0;
  double gamma = 1.0;  // a3 / a2

  void validate() const;
  /// a_2 (1 + gamma e^{i phi_r}); the complex weight seen by u2 when u2 == u3.
  cplx eta() const;
};

struct ToyInput {
  double u1 = 0.0;
  double u2 = 0.0;
  double u3 = 0.0;
};

/// |u1 + a2 u2 e^{i phi_c} + a2 gamma u3 e^{i(phi_c + phi_r)}|^2
double toy_model_output(double u1, double u2, double u3, const ToyModelParams& params);

/// Toy model outputs over phi_r x phi_c x inputs, stored row-major in that
/// order.
struct PhaseSweepTable {
  std::vector<double> phi_c;
  std::vector<double> phi_r;
  std::vector<ToyInput> inputs;
  std::vector<double> values;

  double at(std::size_t ir, std::size_t ic, std::size_t ii) const {
    return values[(ir * phi_c.size() + ic) * inputs.size() + ii];
  }
};

PhaseSweepTable phase_sweep(std::span<const double> phi_c_grid, std::span<const double> phi_r_set,
                            std::span<const ToyInput> inputs, double a2, double gamma);

/// min(high class) - max(low class) at one grid point; positive means the
/// classes separate. `high` flags entries of table.inputs.
double separation_margin(const PhaseSweepTable& table, std::size_t ir, std::size_t ic,
                         std::span<const bool> high);

/// The toy-model input for a two-bit symbol written oldest bit first: the
/// newest bit drives u1, the older bit drives the two delayed signals.
ToyInput toy_input_for_symbol(int older, int newer);

}  // namespace cperc
