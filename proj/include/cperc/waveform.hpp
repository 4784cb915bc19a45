#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace cperc {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Uniformly sampled complex field envelope. |sample|^2 is optical power in
/// linear units.
struct ComplexWaveform {
  std::vector<cplx> samples;
  double sample_rate_hz = 0.0;

  std::size_t size() const { return samples.size(); }
  void validate() const;
  double mean_power() const;
};

/// Uniformly sampled real trace (optical power or detected photocurrent).
struct RealWaveform {
  std::vector<double> samples;
  double sample_rate_hz = 0.0;

  std::size_t size() const { return samples.size(); }
  void validate() const;
  double mean() const;
};

RealWaveform intensity(const ComplexWaveform& field);

}  // namespace cperc
