#include "cperc/tasks.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace cperc {

TaskSpec TaskSpec::pattern(std::string_view bits, double bit_rate_hz) {
  TaskSpec t{PatternTask{parse_bit_string(bits)}, bit_rate_hz};
  t.validate();
  return t;
}

TaskSpec TaskSpec::delayed_xor(int delay, double bit_rate_hz) {
  TaskSpec t{DelayedXorTask{delay}, bit_rate_hz};
  t.validate();
  return t;
}

TaskSpec TaskSpec::phase_decode(double bit_rate_hz) {
  TaskSpec t{PhaseDecodeTask{}, bit_rate_hz};
  t.validate();
  return t;
}

void TaskSpec::validate() const {
  if (!(bit_rate_hz > 0.0)) throw std::invalid_argument("task bit rate must be positive");
  if (const auto* p = std::get_if<PatternTask>(&kind)) {
    if (p->pattern.size() < 2 || p->pattern.size() > 3)
      throw std::invalid_argument(
          fmt::format("pattern must have 2 or 3 bits, got {}", p->pattern.size()));
    if (std::ranges::all_of(p->pattern, [](auto b) { return b == 0; }))
      throw std::invalid_argument("the all-zero pattern cannot be recognised from intensity");
  } else if (const auto* x = std::get_if<DelayedXorTask>(&kind)) {
    if (x->delay < 1) throw std::invalid_argument("xor delay must be >= 1");
  }
}

int TaskSpec::memory() const {
  if (const auto* p = std::get_if<PatternTask>(&kind)) return static_cast<int>(p->pattern.size());
  if (const auto* x = std::get_if<DelayedXorTask>(&kind)) return x->delay + 1;
  return 1;
}

std::string TaskSpec::label() const {
  if (const auto* p = std::get_if<PatternTask>(&kind)) return "pattern-" + bit_string(p->pattern);
  if (const auto* x = std::get_if<DelayedXorTask>(&kind)) return fmt::format("xor-{}", x->delay);
  return "phase-decode";
}

std::size_t Targets::valid_count() const {
  return static_cast<std::size_t>(std::ranges::count(valid, std::uint8_t{1}));
}

Targets Targets::tail(std::size_t count) const {
  if (count > bits.size()) throw std::invalid_argument("cannot drop more targets than exist");
  const auto off = static_cast<std::ptrdiff_t>(count);
  return Targets{{bits.begin() + off, bits.end()}, {valid.begin() + off, valid.end()}};
}

std::vector<std::uint8_t> parse_bit_string(std::string_view text) {
  std::vector<std::uint8_t> out;
  out.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1')
      throw std::invalid_argument(fmt::format("'{}' is not a bit string", text));
    out.push_back(c == '1');
  }
  if (out.empty()) throw std::invalid_argument("empty bit string");
  return out;
}

std::string bit_string(std::span<const std::uint8_t> bits) {
  std::string s;
  for (auto b : bits) s.push_back(b ? '1' : '0');
  return s;
}

Targets target_pattern(std::span<const std::uint8_t> bits, std::span<const std::uint8_t> pattern) {
  const std::size_t p = pattern.size();
  if (p < 2 || p > 3) throw std::invalid_argument("pattern must have 2 or 3 bits");
  if (p > bits.size())
    throw std::invalid_argument(
        fmt::format("pattern of {} bits is longer than the {}-bit input", p, bits.size()));
  Targets t{std::vector<std::uint8_t>(bits.size(), 0), std::vector<std::uint8_t>(bits.size(), 0)};
  for (std::size_t l = p - 1; l < bits.size(); ++l) {
    t.valid[l] = 1;
    t.bits[l] = std::equal(pattern.begin(), pattern.end(), bits.begin() + static_cast<std::ptrdiff_t>(l + 1 - p));
  }
  return t;
}

Targets target_delayed_xor(std::span<const std::uint8_t> bits, int n) {
  if (n < 1) throw std::invalid_argument("xor delay must be >= 1");
  const auto d = static_cast<std::size_t>(n);
  if (d >= bits.size())
    throw std::invalid_argument(
        fmt::format("xor delay {} needs more than {} input bits", n, bits.size()));
  Targets t{std::vector<std::uint8_t>(bits.size(), 0), std::vector<std::uint8_t>(bits.size(), 0)};
  for (std::size_t l = d; l < bits.size(); ++l) {
    t.valid[l] = 1;
    t.bits[l] = bits[l] ^ bits[l - d];
  }
  return t;
}

Targets target_phase_decode(std::span<const std::uint8_t> bits) {
  return Targets{{bits.begin(), bits.end()}, std::vector<std::uint8_t>(bits.size(), 1)};
}

Targets make_targets(const TaskSpec& task, std::span<const std::uint8_t> bits) {
  if (const auto* p = std::get_if<PatternTask>(&task.kind)) return target_pattern(bits, p->pattern);
  if (const auto* x = std::get_if<DelayedXorTask>(&task.kind))
    return target_delayed_xor(bits, x->delay);
  return target_phase_decode(bits);
}

double statistical_ber_limit(long long total_test_bits) {
  if (total_test_bits <= 0) throw std::invalid_argument("total test bits must be positive");
  return 1.0 / static_cast<double>(total_test_bits);
}

}  // namespace cperc
