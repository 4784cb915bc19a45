#pragma once

// Logical tasks and their causal target sequences.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cperc {

struct PatternTask {
  std::vector<std::uint8_t> pattern;  // oldest bit first
};

struct DelayedXorTask {
  int delay = 1;
};

struct PhaseDecodeTask {};

struct TaskSpec {
  std::variant<PatternTask, DelayedXorTask, PhaseDecodeTask> kind;
  double bit_rate_hz = 0.0;

  static TaskSpec pattern(std::string_view bits, double bit_rate_hz);
  static TaskSpec delayed_xor(int delay, double bit_rate_hz);
  static TaskSpec phase_decode(double bit_rate_hz);

  void validate() const;
  /// Bits of history (including the current bit) a target depends on.
  int memory() const;
  /// "pattern-10", "xor-1", "phase-decode".
  std::string label() const;
};

/// Target bits with a validity mask; invalid positions lack the history the
/// task needs and are excluded from loss and BER.
struct Targets {
  std::vector<std::uint8_t> bits;
  std::vector<std::uint8_t> valid;

  std::size_t size() const { return bits.size(); }
  std::size_t valid_count() const;
  /// Drops the first `count` positions.
  Targets tail(std::size_t count) const;
};

std::vector<std::uint8_t> parse_bit_string(std::string_view text);
std::string bit_string(std::span<const std::uint8_t> bits);

/// T_l = 1 iff bits[l-p+1..l] == pattern; first p-1 positions invalid.
Targets target_pattern(std::span<const std::uint8_t> bits, std::span<const std::uint8_t> pattern);

/// T_l = bits[l] xor bits[l-n]; first n positions invalid.
Targets target_delayed_xor(std::span<const std::uint8_t> bits, int n);

/// T_l = bits[l].
Targets target_phase_decode(std::span<const std::uint8_t> bits);

Targets make_targets(const TaskSpec& task, std::span<const std::uint8_t> bits);

/// 1 / total_test_bits.
double statistical_ber_limit(long long total_test_bits);

}  // namespace cperc
