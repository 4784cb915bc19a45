#pragma once

// Brute-force reference implementations, written without the library's
// fast paths, used to check it.

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "cperc/waveform.hpp"

namespace cperc::oracle {

/// y[t] = |sum_k a_k e^{i phi_k} u[t - k*d]|^2 with u = 0 before the start,
/// evaluated term by term for t in 0 .. M + (N-1)d - 1.
std::vector<double> naive_perceptron_output(std::span<const cplx> u, std::span<const double> amplitudes,
                                            std::span<const double> phases, int delay);

/// Largest relative deviation of perceptron_output (noise off) from the
/// naive evaluator over `trials` random 4-tap waveforms of `samples` samples.
double perceptron_max_rel_error(int trials, std::size_t samples, std::uint64_t seed);

/// Best min(high) - max(low) margin of a two-bit task on a 1 degree
/// (phi_c, phi_r) grid, from the toy formula written out directly. `high`
/// flags symbols 00, 01, 10, 11 (oldest bit first).
struct GridOptimum {
  double margin = 0.0;
  int phi_c_deg = 0;
  int phi_r_deg = 0;
};
GridOptimum toy_grid_search(const bool (&high)[4], double a2_sq, double a3_sq,
                            std::optional<int> fixed_phi_r_deg = std::nullopt);

/// Dichotomies of {0,1}^window that a perceptron learning rule separates.
/// Bit j of the returned mask is the class of point j (bit 0 of j = newest).
std::vector<std::uint32_t> separable_dichotomies(int window);

/// Lowest fraction of points any separable dichotomy gets wrong for
/// target(point).
double separability_floor(int window, const std::vector<std::uint8_t>& target);

/// Delayed-XOR target over a window: newest bit XOR the bit `delay` back.
std::vector<std::uint8_t> xor_target(int window, int delay);

/// Pattern target: the newest pattern.size() bits equal the pattern
/// (written oldest first).
std::vector<std::uint8_t> pattern_target(int window, const std::string& pattern);

const std::vector<std::string>& names();

/// Runs one named oracle against the library and prints a report; true when
/// they agree.
bool run(const std::string& name, std::ostream& out);

}  // namespace cperc::oracle
