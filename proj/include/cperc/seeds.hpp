#pragma once

#include <cstdint>
#include <string_view>

namespace cperc {

std::uint64_t splitmix64(std::uint64_t x);

/// Sub-seed for a named component: splitmix64 over FNV-1a(name) mixed with
/// the master seed and the index.
std::uint64_t derive_seed(std::uint64_t master, std::string_view component,
                          std::uint64_t index = 0);

/// Standard normal deviate addressed by (seed, index), so any subset of a
/// noise sequence can be regenerated without drawing the rest.
double counter_normal(std::uint64_t seed, std::uint64_t index);

}  // namespace cperc
