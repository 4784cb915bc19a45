#include <doctest.h>

#include <cmath>
#include <random>

#include "cperc/eval.hpp"
#include "cperc/link.hpp"
#include "cperc/pipeline.hpp"
#include "cperc/signal_chain.hpp"

using namespace cperc;

namespace {

std::vector<double> render(std::span<const std::uint8_t> bits, int b, double lo = 0.0, double hi = 1.0) {
  std::vector<double> y;
  for (auto v : bits)
    for (int j = 0; j < b; ++j) y.push_back(v ? hi : lo);
  return y;
}

Targets all_valid(std::vector<std::uint8_t> bits) {
  std::vector<std::uint8_t> valid(bits.size(), 1);
  return {std::move(bits), std::move(valid)};
}

double min_class_fraction(const Targets& t) {
  double ones = 0.0, n = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t.valid[i]) {
      ones += t.bits[i];
      n += 1.0;
    }
  return std::min(ones, n - ones) / n;
}

RealWaveform noisy_nrz(std::span<const std::uint8_t> bits, double snr_db, std::uint64_t seed) {
  ChannelParams p;
  const auto field = modulate_nrz({{bits.begin(), bits.end()}, 5e9}, p);
  return detect(intensity(field), snr_db, seed);
}

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("digitize reference") {
    const std::vector<std::uint8_t> b{1, 0, 1};
    CHECK(digitize_reference({render(b, 16), 80e9}, 16) == b);
    CHECK(digitize_reference({std::vector<double>(48, 0.3), 80e9}, 16) == std::vector<std::uint8_t>(3, 0));
  }

  TEST_CASE("digitize reference under detector noise") {
    const auto bits = prbs8(10000, 1);
    // high SNR: exact recovery
    CHECK(digitize_reference(noisy_nrz(bits, 30.0, 4), 16) == bits);
    // 14 dB, 7 dB extinction: Q is about 2.6, so a few errors per thousand
    const auto got = digitize_reference(noisy_nrz(bits, 14.0, 4), 16);
    int errors = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) errors += got[i] != bits[i];
    const double hi = 1.0, lo = std::pow(10.0, -0.7), mean = (hi + lo) / 2;
    const double sigma = std::sqrt(mean * std::pow(10.0, -1.4));
    const double q_rate = 0.5 * std::erfc((hi - lo) / 2 / sigma / std::sqrt(2.0));
    CHECK(errors > 0);
    CHECK(static_cast<double>(errors) / 1e4 < 3 * q_rate);
  }

  TEST_CASE("perfect predictor") {
    const auto bits = prbs8(300, 2);
    const auto t = all_valid(bits);
    const auto r = sweep_eval(render(bits, 8), t, 8);
    CHECK(r.error_count == 0);
    CHECK(r.ber == 0.0);
    CHECK(r.is_error_free);
    CHECK(r.best_sampling_index == 0);
    CHECK(r.best_threshold >= 0.0);
    CHECK(r.best_threshold < 1.0);
  }

  TEST_CASE("constant output gives the best constant classifier") {
    const auto bits = prbs8(301, 3);
    auto t = all_valid(bits);
    t.valid[0] = 0;
    const auto r = sweep_eval(std::vector<double>(301 * 5, 0.4), t, 5);
    CHECK(r.ber == doctest::Approx(min_class_fraction(t)));
  }

  TEST_CASE("thresholding cannot invert polarity") {
    const auto bits = prbs8(255, 9);
    const auto y = render(bits, 4);
    const auto direct = sweep_eval(y, all_valid(bits), 4);
    REQUIRE(direct.ber == 0.0);
    std::vector<std::uint8_t> inv(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) inv[i] = 1 - bits[i];
    // at the direct optimum every inverted target is wrong
    long long wrong = 0;
    for (std::size_t l = 0; l < bits.size(); ++l)
      wrong += (y[l * 4 + static_cast<std::size_t>(direct.best_sampling_index)] > direct.best_threshold) != inv[l];
    CHECK(static_cast<double>(wrong) / 255.0 == doctest::Approx(1.0 - direct.ber));
    // and the full search falls back to a constant decision
    CHECK(sweep_eval(y, all_valid(inv), 4).ber == doctest::Approx(min_class_fraction(all_valid(inv))));
  }

  TEST_CASE("sweep properties on random traces") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 30; ++trial) {
      const auto bits = prbs8(200, static_cast<unsigned>(1 + trial));
      const auto t = target_delayed_xor(bits, 1);
      std::vector<double> y(200 * 6);
      for (std::size_t j = 0; j < y.size(); ++j) y[j] = bits[j / 6] + (trial % 3 + 0.2) * g(rng);
      const auto coarse = sweep_eval(y, t, 6, {16, std::nullopt});
      const auto fine = sweep_eval(y, t, 6, {32, std::nullopt});
      CHECK(coarse.ber <= min_class_fraction(t) + 1e-15);
      CHECK(fine.error_count <= coarse.error_count);
      CHECK(coarse.total_bits == 199);

      // a per-bit brute force over the same grid
      long long best = 1 << 30;
      for (int n = 0; n < 6; ++n) {
        double lo = HUGE_VAL, hi = -HUGE_VAL;
        for (std::size_t l = 1; l < 200; ++l) {
          lo = std::min(lo, y[l * 6 + static_cast<std::size_t>(n)]);
          hi = std::max(hi, y[l * 6 + static_cast<std::size_t>(n)]);
        }
        for (double r : threshold_grid(lo, hi, 16)) {
          long long e = 0;
          for (std::size_t l = 1; l < 200; ++l) e += (y[l * 6 + static_cast<std::size_t>(n)] > r) != t.bits[l];
          best = std::min(best, e);
        }
      }
      CHECK(coarse.error_count == best);
    }
  }

  TEST_CASE("pooling an error-free trace never raises the BER") {
    const auto bits = prbs8(200, 4);
    const auto t = target_delayed_xor(bits, 1);
    const auto noisy = sweep_eval(std::vector<double>(200 * 4, 1.0), t, 4);
    const auto clean = sweep_eval(render(t.bits, 4), t, 4);
    REQUIRE(clean.error_count == 0);
    const auto one = summarize({noisy});
    const auto both = summarize({noisy, clean});
    CHECK(both.ber <= one.ber);
    CHECK(both.total_bits == 2 * one.total_bits);
  }

  TEST_CASE("pearson") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g;
    std::vector<double> x(10000), y(10000), neg(10000), aff(10000);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = g(rng);
      y[i] = g(rng);
      neg[i] = -x[i];
      aff[i] = 3.0 * y[i] - 7.0;
    }
    CHECK(pearson(x, x) == doctest::Approx(1.0));
    CHECK(pearson(x, neg) == doctest::Approx(-1.0));
    CHECK(std::abs(pearson(x, y)) < 0.05);
    CHECK(pearson(x, aff) == doctest::Approx(pearson(x, y)).epsilon(1e-10));
    CHECK_THROWS(pearson(x, std::vector<double>(10000, 2.0)));
  }

  TEST_CASE("linear separability floor") {
    CHECK(linear_separability_floor(TaskSpec::delayed_xor(1, 5e9), 2) == 0.25);
    CHECK(linear_separability_floor(TaskSpec::delayed_xor(2, 5e9), 3) == 0.25);
    CHECK(linear_separability_floor(TaskSpec::delayed_xor(3, 5e9), 4) == 0.25);
    for (std::string_view p : {"01", "10", "11"})
      CHECK(linear_separability_floor(TaskSpec::pattern(p, 5e9), 2) == 0.0);
    CHECK(threshold_function_count(2) == 14);
    CHECK(threshold_function_count(3) == 104);
    CHECK(threshold_function_count(4) == 1882);
    CHECK_THROWS(linear_separability_floor(TaskSpec::delayed_xor(3, 5e9), 2));
  }

  TEST_CASE("level histograms") {
    const auto bits = prbs8(255, 1);
    const auto t = target_pattern(bits, parse_bit_string("10"));
    const auto h = level_histograms(render(t.bits, 5), bits, 5, 2);
    double top_other = -1.0;
    for (std::size_t s : {0u, 1u, 3u})
      for (double v : h.levels[s]) top_other = std::max(top_other, v);
    REQUIRE_FALSE(h.levels[2].empty());
    for (double v : h.levels[2]) CHECK(v > top_other);
    CHECK(std::string(LevelHistograms::symbol(2)) == "10");

    const auto flat = level_histograms(std::vector<double>(255 * 5, 0.5), bits, 5, 0);
    for (const auto& l : flat.levels)
      for (double v : l) CHECK(v == 0.5);
  }

  TEST_CASE("untrained noiseless levels are reproducible") {
    LinkSetup s;
    s.bit_rate_hz = 16e9;
    s.channel.snr_db = kNoiseOff;
    s.trace_bits = 300;
    const Link link(s);
    const std::vector<double> zero(4, 0.0);
    auto run = [&] {
      const auto acq = link.acquire(3);
      return level_histograms(link.output_trace(zero, acq).samples, acq.bits, 5, 2).levels;
    };
    CHECK(run() == run());
  }
}
