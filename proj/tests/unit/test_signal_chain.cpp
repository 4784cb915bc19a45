#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "cperc/link.hpp"
#include "cperc/signal_chain.hpp"

using namespace cperc;

namespace {

ChannelParams ideal() {
  ChannelParams p;
  p.analog_bandwidth_hz = HUGE_VAL;
  p.extinction_ratio_db = HUGE_VAL;
  p.snr_db = kNoiseOff;
  p.jitter_std_s = 0.0;
  return p;
}

double variance(std::span<const double> x) {
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size());
}

}  // namespace

TEST_SUITE("signal_chain") {
  TEST_CASE("prbs8 is a maximal-length sequence") {
    for (unsigned seed : {1u, 77u, 200u, 255u}) {
      const auto b = prbs8(510, seed);
      CHECK(std::equal(b.begin(), b.begin() + 255, b.begin() + 255));
      CHECK(std::count(b.begin(), b.begin() + 255, 1) == 128);
      std::set<int> words;
      for (int i = 0; i < 255; ++i) {
        int w = 0;
        for (int j = 0; j < 8; ++j) w = (w << 1) | b[static_cast<std::size_t>(i + j)];
        words.insert(w);
      }
      CHECK(words.size() == 255);
      CHECK_FALSE(words.contains(0));
    }
    CHECK_THROWS(prbs8(10, 0));
    CHECK_THROWS(prbs8(10, 256));
  }

  TEST_CASE("samples per bit") {
    CHECK(samples_per_bit(80e9, 5e9) == 16);
    CHECK(samples_per_bit(80e9, 8e9) == 10);
    CHECK(samples_per_bit(80e9, 10e9) == 8);
    CHECK(samples_per_bit(80e9, 16e9) == 5);
    CHECK_THROWS(samples_per_bit(80e9, 7e9));
  }

  TEST_CASE("NRZ levels") {
    auto p = ideal();
    const auto ones = modulate_nrz({{1, 1, 1}, 16e9}, p);
    for (auto s : ones.samples) CHECK(s == cplx(1.0));

    p.extinction_ratio_db = 7.0;
    const auto w = modulate_nrz({{1, 0}, 16e9}, p);
    CHECK(std::norm(w.samples[7]) == doctest::Approx(0.1995).epsilon(1e-3));

    // a higher extinction ratio lowers the zero level
    double prev = 2.0;
    for (double er : {1.0, 3.0, 7.0, 12.0, 20.0}) {
      p.extinction_ratio_db = er;
      const double low = std::norm(modulate_nrz({{0, 1}, 16e9}, p).samples[2]);
      CHECK(low < prev);
      prev = low;
    }
  }

  TEST_CASE("finite bandwidth leaves memory of the previous bit") {
    ChannelParams p;
    std::vector<std::uint8_t> bits;
    for (int i = 0; i < 64; ++i) bits.push_back(static_cast<std::uint8_t>(i % 4 == 1));  // 0 1 0 0 ...
    const auto w = modulate_nrz({bits, 16e9}, p);
    const int b = samples_per_bit(p.sample_rate_hz, 16e9);
    // bit 2 is a 0 after a 1, bit 3 a 0 after a 0
    for (int k = 2; k < 60; k += 4) {
      const double after_one = std::norm(w.samples[static_cast<std::size_t>(k * b + b / 2)]);
      const double after_zero = std::norm(w.samples[static_cast<std::size_t>((k + 1) * b + b / 2)]);
      CHECK(after_one > after_zero);
    }
  }

  TEST_CASE("BPSK field") {
    auto p = ideal();
    const auto z = modulate_bpsk({{0, 0, 0, 0}, 10e9}, p);
    for (auto s : z.samples) CHECK(std::abs(s - cplx(1.0)) < 1e-12);
    const auto w = modulate_bpsk({{0, 1}, 10e9}, p);
    CHECK(w.samples[4].real() == doctest::Approx(1.0));
    CHECK(w.samples[12].real() == doctest::Approx(-1.0));
    const auto prbs = modulate_bpsk({prbs8(300, 9), 10e9}, p);
    for (auto s : prbs.samples) CHECK(std::abs(std::norm(s) - 1.0) < 1e-9);
    // with finite bandwidth the phase moves but the intensity does not
    const auto band = modulate_bpsk({prbs8(300, 9), 10e9}, ChannelParams{});
    for (auto s : band.samples) CHECK(std::abs(std::norm(s) - 1.0) < 1e-9);
  }

  TEST_CASE("detector noise") {
    RealWaveform ones{std::vector<double>(200000, 1.0), 80e9};
    CHECK(detect(ones, kNoiseOff, 1).samples == ones.samples);
    const auto noisy = detect(ones, 14.0, 1);
    CHECK(variance(noisy.samples) == doctest::Approx(std::pow(10.0, -1.4)).epsilon(0.05));
    const double snr = 10 * std::log10(1.0 / variance(noisy.samples));
    CHECK(std::abs(snr - 14.0) < 0.2);
    CHECK(detect(ones, 14.0, 1).samples == noisy.samples);

    RealWaveform zero{std::vector<double>(100000, 0.0), 80e9};
    const auto z = detect(zero, 14.0, 2, 1.0);
    const double mean = std::accumulate(z.samples.begin(), z.samples.end(), 0.0) / 1e5;
    CHECK(std::abs(mean) < 5 * std::sqrt(std::pow(10.0, -1.4) / 1e5));
  }

  TEST_CASE("jitter") {
    RealWaveform imp{std::vector<double>(64, 0.0), 80e9};
    imp.samples[30] = 1.0;
    CHECK(apply_jitter(imp, 0.0, 5).samples == imp.samples);
    int nonzero = 0;
    for (std::uint64_t s = 0; s < 4000; ++s) {
      const int k = draw_jitter_shift(2e-12, 80e9, s);
      nonzero += k != 0;
      CHECK(std::abs(k) <= 2);
    }
    CHECK(nonzero > 0);
    CHECK(nonzero < 400);
    for (std::uint64_t s = 0; s < 50; ++s) {
      const auto j = apply_jitter(imp, 6e-12, s);
      CHECK(std::accumulate(j.samples.begin(), j.samples.end(), 0.0) == 1.0);
    }
  }

  TEST_CASE("align_traces recovers constructed shifts") {
    RealWaveform x{std::vector<double>(400), 80e9};
    const auto bits = prbs8(50, 3);
    for (std::size_t j = 0; j < x.size(); ++j) x.samples[j] = bits[j / 8];
    CHECK(align_traces(x.samples, x.samples) == 0);
    CHECK(align_traces(x.samples, shift_trace(x, 7).samples) == 7);
    CHECK(align_traces(x.samples, shift_trace(x, -5).samples) == -5);
    CHECK_THROWS(align_traces(std::vector<double>(10, 1.0), x.samples));
  }

  TEST_CASE("output detector is aligned to the input detector") {
    LinkSetup s;
    s.bit_rate_hz = 16e9;
    s.channel.snr_db = kNoiseOff;
    s.channel.jitter_std_s = 0.0;
    s.perceptron.phase_noise_frac = 0.0;
    s.perceptron.amplitudes = {1.0, 0.0, 0.0, 0.0};
    s.trace_bits = 200;
    const Link link(s);
    CHECK(link.latency() >= 0);
    CHECK(link.latency() <= 3 * link.tap_delay());
    // with only the undelayed tap lit, the two detectors line up
    const auto acq = link.acquire_clean(17);
    const std::vector<double> phases{0, 0, 0, 0};
    CHECK(align_traces(link.input_trace(acq).samples, link.output_trace(phases, acq).samples, 20) == 0);
  }

  TEST_CASE("fast sampled output matches the full waveform path") {
    for (auto mod : {Modulation::Nrz, Modulation::Bpsk}) {
      LinkSetup s;
      s.bit_rate_hz = 10e9;
      s.modulation = mod;
      s.perceptron.phase_noise_frac = 0.01;
      s.trace_bits = 300;
      const Link link(s);
      const std::vector<double> phases{0.0, 1.1, -2.0, 0.4};
      for (std::uint64_t seed : {1u, 2u, 3u, 99u}) {
        const auto acq = link.acquire(seed);
        const auto full = link.output_trace(phases, acq);
        const std::vector<int> offsets{0, 3, 7};
        const auto fast = link.sampled_output(phases, acq, offsets);
        for (std::size_t l = 0; l < acq.bits.size(); ++l)
          for (std::size_t i = 0; i < offsets.size(); ++i)
            CHECK(fast[l * 3 + i] ==
                  doctest::Approx(full.samples[l * 8 + static_cast<std::size_t>(offsets[i])]).epsilon(1e-9).scale(1.0));
      }
    }
  }

  TEST_CASE("acquisitions are reproducible") {
    LinkSetup s;
    s.bit_rate_hz = 5e9;
    s.trace_bits = 100;
    const Link link(s);
    const std::vector<double> phases{0.0, 0.5, 1.0, 1.5};
    const auto a = link.acquire(42), b = link.acquire(42);
    CHECK(a.bits == b.bits);
    CHECK(link.output_trace(phases, a).samples == link.output_trace(phases, b).samples);
    CHECK(link.output_trace(phases, a).samples != link.output_trace(phases, link.acquire(43)).samples);
  }
}
