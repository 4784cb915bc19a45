#include "cperc/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

namespace cperc {

void ComplexWaveform::validate() const {
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz))
    throw std::invalid_argument("waveform sample rate must be positive");
  if (samples.empty()) throw std::invalid_argument("waveform is empty");
}

double ComplexWaveform::mean_power() const {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& s : samples) acc += std::norm(s);
  return acc / static_cast<double>(samples.size());
}

void RealWaveform::validate() const {
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz))
    throw std::invalid_argument("waveform sample rate must be positive");
  if (samples.empty()) throw std::invalid_argument("waveform is empty");
}

double RealWaveform::mean() const {
  if (samples.empty()) return 0.0;
  return std::accumulate(samples.begin(), samples.end(), 0.0) /
         static_cast<double>(samples.size());
}

RealWaveform intensity(const ComplexWaveform& field) {
  RealWaveform out{std::vector<double>(field.size()), field.sample_rate_hz};
  std::transform(field.samples.begin(), field.samples.end(), out.samples.begin(),
                 [](const cplx& s) { return std::norm(s); });
  return out;
}

PerceptronConfig PerceptronConfig::nominal() {
  PerceptronConfig cfg;
  cfg.n_taps = 4;
  cfg.delta_t_s = kNominalDeltaT;
  for (double a2 : kNominalAmplitudeSq) cfg.amplitudes.push_back(std::sqrt(a2));
  cfg.phases.assign(4, 0.0);
  return cfg;
}

void PerceptronConfig::validate() const {
  if (n_taps < 1) throw std::invalid_argument("perceptron needs at least one tap");
  if (!(delta_t_s > 0.0)) throw std::invalid_argument("delta_t must be positive");
  if (amplitudes.size() != static_cast<std::size_t>(n_taps))
    throw std::invalid_argument(
        fmt::format("expected {} amplitudes, got {}", n_taps, amplitudes.size()));
  if (phases.size() != static_cast<std::size_t>(n_taps))
    throw std::invalid_argument(
        fmt::format("expected {} phases, got {}", n_taps, phases.size()));
  if (std::abs(amplitudes[0] - 1.0) > 1e-12)
    throw std::invalid_argument("first tap amplitude must be 1 (lossless reference)");
  for (std::size_t k = 0; k < amplitudes.size(); ++k) {
    if (!(amplitudes[k] >= 0.0) || !std::isfinite(amplitudes[k]))
      throw std::invalid_argument("tap amplitudes must be finite and nonnegative");
    if (k > 0 && amplitudes[k] > amplitudes[k - 1] + 1e-12)
      throw std::invalid_argument("tap amplitudes must be non-increasing");
  }
  if (!(phase_noise_frac >= 0.0)) throw std::invalid_argument("phase noise must be >= 0");
}

std::vector<double> amplitudes_from_loss(double loss_db_per_cm, double spiral_length_cm,
                                         int n_taps) {
  if (!(loss_db_per_cm >= 0.0)) throw std::invalid_argument("loss must be >= 0 dB/cm");
  if (!(spiral_length_cm > 0.0)) throw std::invalid_argument("spiral length must be > 0");
  if (n_taps < 1) throw std::invalid_argument("n_taps must be >= 1");
  std::vector<double> a(static_cast<std::size_t>(n_taps));
  for (int k = 0; k < n_taps; ++k) {
    const double power = std::pow(10.0, -loss_db_per_cm * k * spiral_length_cm / 10.0);
    a[static_cast<std::size_t>(k)] = std::sqrt(power);
  }
  return a;
}

int delay_in_samples(double delta_t_s, double sample_rate_hz) {
  if (!(sample_rate_hz > 0.0)) throw std::invalid_argument("sample rate must be positive");
  const double samples = delta_t_s * sample_rate_hz;
  const double rounded = std::round(samples);
  if (rounded < 1.0 || std::abs(samples - rounded) > 1e-6 * std::max(1.0, samples)) {
    const double steps = std::max(1.0, std::ceil(samples - 1e-9));
    throw std::invalid_argument(fmt::format(
        "delay of {:g} s is {:g} samples at {:g} Sa/s; an integer is required "
        "(nearest compliant sample rate: {:g} Sa/s)",
        delta_t_s, samples, sample_rate_hz, steps / delta_t_s));
  }
  return static_cast<int>(rounded);
}

std::vector<ComplexWaveform> delay_taps(const ComplexWaveform& input,
                                        const PerceptronConfig& config) {
  input.validate();
  if (config.n_taps < 1 || config.amplitudes.size() != static_cast<std::size_t>(config.n_taps))
    throw std::invalid_argument("perceptron config has inconsistent tap count");
  const int d = config.n_taps > 1 ? delay_in_samples(config.delta_t_s, input.sample_rate_hz) : 0;
  const std::size_t len = input.size() + static_cast<std::size_t>((config.n_taps - 1) * d);

  std::vector<ComplexWaveform> taps;
  taps.reserve(static_cast<std::size_t>(config.n_taps));
  for (int k = 0; k < config.n_taps; ++k) {
    ComplexWaveform tap{std::vector<cplx>(len, cplx{}), input.sample_rate_hz};
    const double a = config.amplitudes[static_cast<std::size_t>(k)];
    const std::size_t shift = static_cast<std::size_t>(k * d);
    for (std::size_t j = 0; j < input.size(); ++j) tap.samples[j + shift] = a * input.samples[j];
    taps.push_back(std::move(tap));
  }
  return taps;
}

std::vector<double> draw_phase_noise(std::span<const double> phases, double phase_noise_frac,
                                     PhaseNoiseMode mode, std::uint64_t seed) {
  std::vector<double> eps(phases.size(), 0.0);
  if (phase_noise_frac <= 0.0) return eps;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  for (std::size_t k = 0; k < phases.size(); ++k) {
    const double sd = mode == PhaseNoiseMode::FullTurn ? phase_noise_frac * kTwoPi
                                                       : phase_noise_frac * std::abs(phases[k]);
    eps[k] = sd * unit(rng);
  }
  return eps;
}

RealWaveform perceptron_output(std::span<const ComplexWaveform> taps,
                               std::span<const double> phases, double phase_noise_frac,
                               std::uint64_t rng_seed, PhaseNoiseMode mode) {
  if (taps.empty()) throw std::invalid_argument("no taps given");
  if (phases.size() != taps.size())
    throw std::invalid_argument(
        fmt::format("{} phases for {} taps", phases.size(), taps.size()));
  const std::size_t len = taps.front().size();
  const double fs = taps.front().sample_rate_hz;
  for (const auto& t : taps) {
    if (t.size() != len) throw std::invalid_argument("taps differ in length");
    if (t.sample_rate_hz != fs) throw std::invalid_argument("taps differ in sample rate");
  }

  const auto eps = draw_phase_noise(phases, phase_noise_frac, mode, rng_seed);
  std::vector<cplx> w(taps.size());
  for (std::size_t k = 0; k < taps.size(); ++k) w[k] = std::polar(1.0, phases[k] + eps[k]);

  RealWaveform y{std::vector<double>(len), fs};
  for (std::size_t j = 0; j < len; ++j) {
    cplx acc{};
    for (std::size_t k = 0; k < taps.size(); ++k) acc += taps[k].samples[j] * w[k];
    y.samples[j] = std::norm(acc);
  }
  return y;
}

// ---------------------------------------------------------------------------

void ToyModelParams::validate() const {
  if (!(a2 > 0.0)) throw std::invalid_argument("a2 must be positive");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
}

cplx ToyModelParams::eta() const { return a2 * (1.0 + gamma * std::polar(1.0, phi_r)); }

double toy_model_output(double u1, double u2, double u3, const ToyModelParams& p) {
  const cplx w2 = p.a2 * std::polar(1.0, p.phi_c);
  const cplx w3 = p.a2 * p.gamma * std::polar(1.0, p.phi_c + p.phi_r);
  return std::norm(u1 + u2 * w2 + u3 * w3);
}

PhaseSweepTable phase_sweep(std::span<const double> phi_c_grid, std::span<const double> phi_r_set,
                            std::span<const ToyInput> inputs, double a2, double gamma) {
  if (phi_c_grid.empty() || phi_r_set.empty() || inputs.empty())
    throw std::invalid_argument("phase sweep grids must be non-empty");
  PhaseSweepTable t;
  t.phi_c.assign(phi_c_grid.begin(), phi_c_grid.end());
  t.phi_r.assign(phi_r_set.begin(), phi_r_set.end());
  t.inputs.assign(inputs.begin(), inputs.end());
  t.values.reserve(t.phi_c.size() * t.phi_r.size() * t.inputs.size());
  ToyModelParams p{0.0, 0.0, a2, gamma};
  p.validate();
  for (double pr : t.phi_r) {
    p.phi_r = pr;
    for (double pc : t.phi_c) {
      p.phi_c = pc;
      for (const auto& in : t.inputs) t.values.push_back(toy_model_output(in.u1, in.u2, in.u3, p));
    }
  }
  return t;
}

double separation_margin(const PhaseSweepTable& table, std::size_t ir, std::size_t ic,
                         std::span<const bool> high) {
  if (high.size() != table.inputs.size())
    throw std::invalid_argument("class flags must match the sweep inputs");
  double lo_max = -std::numeric_limits<double>::infinity();
  double hi_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < high.size(); ++i) {
    const double v = table.at(ir, ic, i);
    if (high[i])
      hi_min = std::min(hi_min, v);
    else
      lo_max = std::max(lo_max, v);
  }
  return hi_min - lo_max;
}

ToyInput toy_input_for_symbol(int older, int newer) {
  const double o = older ? 1.0 : 0.0;
  return ToyInput{newer ? 1.0 : 0.0, o, o};
}

}  // namespace cperc
