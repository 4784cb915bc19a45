#include "oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "cperc/core_model.hpp"
#include "cperc/eval.hpp"
#include "cperc/signal_chain.hpp"
#include "cperc/suites.hpp"
#include "cperc/tasks.hpp"

namespace cperc::oracle {

std::vector<double> naive_perceptron_output(std::span<const cplx> u, std::span<const double> amplitudes,
                                            std::span<const double> phases, int delay) {
  const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(u.size());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(amplitudes.size());
  std::vector<double> y(static_cast<std::size_t>(m + (n - 1) * delay));
  for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(y.size()); ++t) {
    double re = 0.0, im = 0.0;
    for (std::ptrdiff_t k = 0; k < n; ++k) {
      const std::ptrdiff_t s = t - k * delay;
      if (s < 0 || s >= m) continue;
      const double c = amplitudes[static_cast<std::size_t>(k)] * std::cos(phases[static_cast<std::size_t>(k)]);
      const double d = amplitudes[static_cast<std::size_t>(k)] * std::sin(phases[static_cast<std::size_t>(k)]);
      const double ur = u[static_cast<std::size_t>(s)].real(), ui = u[static_cast<std::size_t>(s)].imag();
      re += c * ur - d * ui;
      im += c * ui + d * ur;
    }
    y[static_cast<std::size_t>(t)] = re * re + im * im;
  }
  return y;
}

double perceptron_max_rel_error(int trials, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    ComplexWaveform u{std::vector<cplx>(samples), 80e9};
    for (auto& s : u.samples) s = {normal(rng), normal(rng)};
    auto cfg = PerceptronConfig::nominal();
    std::vector<double> phases(4);
    for (auto& p : phases) p = angle(rng);
    cfg.phases = phases;
    const int d = delay_in_samples(cfg.delta_t_s, u.sample_rate_hz);
    const auto fast = perceptron_output(delay_taps(u, cfg), phases, 0.0, 0);
    const auto slow = naive_perceptron_output(u.samples, cfg.amplitudes, phases, d);
    if (fast.size() != slow.size())
      throw std::runtime_error(fmt::format("length {} vs {}", fast.size(), slow.size()));
    double scale = 0.0;
    for (double v : slow) scale = std::max(scale, std::abs(v));
    for (std::size_t j = 0; j < slow.size(); ++j)
      worst = std::max(worst, std::abs(fast.samples[j] - slow[j]) / scale);
  }
  return worst;
}

GridOptimum toy_grid_search(const bool (&high)[4], double a2_sq, double a3_sq,
                            std::optional<int> fixed_phi_r_deg) {
  const double a2 = std::sqrt(a2_sq), a3 = std::sqrt(a3_sq);
  GridOptimum best{-HUGE_VAL, 0, 0};
  for (int r = 0; r < 360; ++r) {
    if (fixed_phi_r_deg && r != *fixed_phi_r_deg) continue;
    for (int c = 0; c < 360; ++c) {
      const double pc = c * kPi / 180.0, pr = r * kPi / 180.0;
      double lo_high = HUGE_VAL, hi_low = -HUGE_VAL;
      for (int s = 0; s < 4; ++s) {
        // newest bit on the direct arm, the older bit on both delayed arms
        const double newer = s & 1, older = s >> 1;
        const double re = newer + older * (a2 * std::cos(pc) + a3 * std::cos(pc + pr));
        const double im = older * (a2 * std::sin(pc) + a3 * std::sin(pc + pr));
        const double y = re * re + im * im;
        if (high[s])
          lo_high = std::min(lo_high, y);
        else
          hi_low = std::max(hi_low, y);
      }
      if (lo_high - hi_low > best.margin) best = {lo_high - hi_low, c, r};
    }
  }
  return best;
}

std::vector<std::uint32_t> separable_dichotomies(int window) {
  if (window < 1 || window > 4) throw std::invalid_argument("window must be in 1..4");
  const int points = 1 << window;
  const std::uint64_t functions = 1ULL << points;
  std::vector<std::uint32_t> out;
  for (std::uint64_t f = 0; f < functions; ++f) {
    // Rosenblatt rule on +-1 coordinates plus a bias input
    std::vector<long> w(static_cast<std::size_t>(window) + 1, 0);
    bool converged = false;
    for (int epoch = 0; epoch < 400 && !converged; ++epoch) {
      converged = true;
      for (int x = 0; x < points; ++x) {
        const long label = (f >> x) & 1 ? 1 : -1;
        long dot = w[static_cast<std::size_t>(window)];
        for (int i = 0; i < window; ++i) dot += w[static_cast<std::size_t>(i)] * ((x >> i) & 1 ? 1 : -1);
        if (dot * label > 0) continue;
        converged = false;
        for (int i = 0; i < window; ++i) w[static_cast<std::size_t>(i)] += label * ((x >> i) & 1 ? 1 : -1);
        w[static_cast<std::size_t>(window)] += label;
      }
    }
    if (converged) out.push_back(static_cast<std::uint32_t>(f));
  }
  return out;
}

double separability_floor(int window, const std::vector<std::uint8_t>& target) {
  const int points = 1 << window;
  int best = points;
  for (auto f : separable_dichotomies(window)) {
    int err = 0;
    for (int x = 0; x < points; ++x) err += static_cast<int>((f >> x) & 1u) != target[static_cast<std::size_t>(x)];
    best = std::min(best, err);
  }
  return static_cast<double>(best) / points;
}

std::vector<std::uint8_t> xor_target(int window, int delay) {
  std::vector<std::uint8_t> t(static_cast<std::size_t>(1 << window));
  for (int x = 0; x < (1 << window); ++x) t[static_cast<std::size_t>(x)] = ((x ^ (x >> delay)) & 1);
  return t;
}

std::vector<std::uint8_t> pattern_target(int window, const std::string& pattern) {
  const int p = static_cast<int>(pattern.size());
  std::vector<std::uint8_t> t(static_cast<std::size_t>(1 << window));
  for (int x = 0; x < (1 << window); ++x) {
    bool match = true;
    // pattern[p-1] is the newest bit, bit 0 of x
    for (int i = 0; i < p; ++i) match = match && (((x >> i) & 1) == pattern[static_cast<std::size_t>(p - 1 - i)] - '0');
    t[static_cast<std::size_t>(x)] = match;
  }
  return t;
}

namespace {

bool check(std::ostream& out, bool ok, const std::string& what) {
  fmt::print(out, "  {} {}\n", ok ? "ok  " : "FAIL", what);
  return ok;
}

bool naive_output(std::ostream& out) {
  const double err = perceptron_max_rel_error(100, 1000, 7);
  return check(out, err <= 1e-12,
               fmt::format("perceptron_output vs naive sum, 100 waveforms x 1000 samples: max rel err {:.3g}", err));
}

bool phase_grid(std::ostream& out) {
  const bool tasks[4][4] = {{false, true, true, false},
                            {false, false, true, false},
                            {false, true, false, false},
                            {false, false, false, true}};
  const char* names[4] = {"xor", "pattern-10", "pattern-01", "pattern-11"};
  const auto lib = toy_margins();
  bool ok = true;
  for (int t = 0; t < 4; ++t) {
    const auto g = toy_grid_search(tasks[t], kNominalAmplitudeSq[1], kNominalAmplitudeSq[2]);
    double lib_best = -HUGE_VAL, lib_zero = -HUGE_VAL;
    for (const auto& m : lib) {
      if (m.task != names[t]) continue;
      lib_best = std::max(lib_best, m.margin);
      if (m.phi_r_deg == 0.0) lib_zero = m.margin;
    }
    const auto z = toy_grid_search(tasks[t], kNominalAmplitudeSq[1], kNominalAmplitudeSq[2], 0);
    ok &= check(out, std::abs(g.margin - lib_best) <= 1e-12 && std::abs(z.margin - lib_zero) <= 1e-12,
                fmt::format("{}: best margin {:.6f} at phi_c {} deg, phi_r {} deg; at phi_r 0: {:.6f}",
                            names[t], g.margin, g.phi_c_deg, g.phi_r_deg, z.margin));
  }
  return ok;
}

bool linear_separability(std::ostream& out) {
  bool ok = true;
  for (int w = 2; w <= 4; ++w) {
    const auto n = separable_dichotomies(w).size();
    ok &= check(out, n == threshold_function_count(w),
                fmt::format("window {}: {} separable dichotomies (library {})", w, n, threshold_function_count(w)));
  }
  for (int d = 1; d <= 3; ++d) {
    const double f = separability_floor(d + 1, xor_target(d + 1, d));
    const double lib = linear_separability_floor(TaskSpec::delayed_xor(d, 1e9), d + 1);
    ok &= check(out, f == lib, fmt::format("xor-{} floor {} (library {})", d, f, lib));
  }
  for (std::string p : {"01", "10", "11", "001", "010", "011", "100", "101", "110", "111"}) {
    const int w = static_cast<int>(p.size());
    const double f = separability_floor(w, pattern_target(w, p));
    const double lib = linear_separability_floor(TaskSpec::pattern(p, 1e9), w);
    ok &= check(out, f == lib, fmt::format("pattern-{} floor {} (library {})", p, f, lib));
  }
  return ok;
}

bool prbs(std::ostream& out) {
  bool ok = true;
  for (unsigned seed : {1u, 0x5Au, 255u}) {
    // shift register written out bit by bit, taps 8, 6, 5, 4
    std::array<int, 8> reg{};
    for (int i = 0; i < 8; ++i) reg[static_cast<std::size_t>(i)] = (seed >> i) & 1;
    std::vector<std::uint8_t> ref;
    for (int n = 0; n < 510; ++n) {
      ref.push_back(static_cast<std::uint8_t>(reg[7]));
      const int fb = reg[7] ^ reg[5] ^ reg[4] ^ reg[3];
      for (int i = 7; i > 0; --i) reg[static_cast<std::size_t>(i)] = reg[static_cast<std::size_t>(i - 1)];
      reg[0] = fb;
    }
    const auto lib = prbs8(510, seed);
    ok &= check(out, lib == ref, fmt::format("prbs8 seed {} matches the bitwise register over 510 bits", seed));
    std::set<int> words;
    int ones = 0;
    for (int i = 0; i < 255; ++i) {
      ones += ref[static_cast<std::size_t>(i)];
      int w = 0;
      for (int j = 0; j < 8; ++j) w = (w << 1) | ref[static_cast<std::size_t>(i + j)];
      words.insert(w);
    }
    bool periodic = std::equal(ref.begin(), ref.begin() + 255, ref.begin() + 255);
    ok &= check(out, periodic && ones == 128 && words.size() == 255 && !words.contains(0),
                fmt::format("period 255, {} ones, {} distinct nonzero 8-bit words", ones, words.size()));
  }
  return ok;
}

}  // namespace

const std::vector<std::string>& names() {
  static const std::vector<std::string> n{"naive-output", "phase-grid", "linear-separability", "prbs8"};
  return n;
}

bool run(const std::string& name, std::ostream& out) {
  fmt::print(out, "oracle {}\n", name);
  if (name == "naive-output") return naive_output(out);
  if (name == "phase-grid") return phase_grid(out);
  if (name == "linear-separability") return linear_separability(out);
  if (name == "prbs8") return prbs(out);
  std::string valid;
  for (const auto& n : names()) valid += (valid.empty() ? "" : ", ") + n;
  throw std::invalid_argument(fmt::format("unknown oracle '{}'; valid oracles: {}", name, valid));
}

}  // namespace cperc::oracle
