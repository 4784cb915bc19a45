#include <doctest.h>

#include <cmath>
#include <random>

#include "cperc/link.hpp"
#include "cperc/pipeline.hpp"
#include "cperc/training.hpp"

using namespace cperc;

namespace {

PswConfig swarm(std::uint64_t seed, int iters = 100) {
  PswConfig c;
  c.rng_seed = seed;
  c.max_iters = iters;
  return c;
}

}  // namespace

TEST_SUITE("training") {
  TEST_CASE("PSW finds the minimum of a cosine well") {
    const LossFn loss = [](std::span<const double> x, std::uint64_t) { return 1.0 - std::cos(x[0] - 1.0); };
    int hits = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
      const auto r = psw_minimize(loss, 1, swarm(s));
      CHECK(r.history.size() <= 100);
      hits += std::abs(angular_difference(r.best_position[0], 1.0)) < 0.05;
    }
    CHECK(hits >= 95);
  }

  TEST_CASE("PSW stops at once on a zero loss") {
    const LossFn zero = [](std::span<const double>, std::uint64_t) { return 0.0; };
    const auto r = psw_minimize(zero, 3, swarm(1));
    CHECK(r.history.size() == 1);
    CHECK(r.best_loss == 0.0);
  }

  TEST_CASE("PSW is deterministic and its record never rises") {
    const LossFn noisy = [](std::span<const double> x, std::uint64_t seed) {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> g(0.0, 0.05);
      return 2.0 - std::cos(x[0]) - std::cos(x[1] - 2.0) + g(rng);
    };
    const auto a = psw_minimize(noisy, 2, swarm(9, 60));
    const auto b = psw_minimize(noisy, 2, swarm(9, 60));
    CHECK(a.history == b.history);
    CHECK(a.best_position == b.best_position);
    for (std::size_t i = 1; i < a.history.size(); ++i) CHECK(a.history[i] <= a.history[i - 1]);
    for (double p : a.best_position) {
      CHECK(p >= 0.0);
      CHECK(p < kTwoPi);
    }
  }

  TEST_CASE("PSW trajectory is unchanged by a 2pi translation of the loss") {
    const LossFn loss = [](std::span<const double> x, std::uint64_t) {
      return 3.0 - std::cos(x[0] - 0.3) - std::cos(x[1] + 1.0) - std::cos(x[0] - x[1]);
    };
    const LossFn moved = [&](std::span<const double> x, std::uint64_t s) {
      const std::vector<double> y{x[0] + kTwoPi, x[1] - kTwoPi};
      return loss(y, s);
    };
    auto cfg = swarm(4, 40);
    cfg.stop_on_error_free = false;
    const auto a = psw_minimize(loss, 2, cfg);
    const auto b = psw_minimize(moved, 2, cfg);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i)
      CHECK(a.history[i] == doctest::Approx(b.history[i]).epsilon(1e-9));
  }

  TEST_CASE("PSW with threads gives the same result") {
    const LossFn loss = [](std::span<const double> x, std::uint64_t) { return 1.0 - std::cos(x[0] - 2.0); };
    auto cfg = swarm(3, 30);
    const auto serial = psw_minimize(loss, 1, cfg);
    cfg.threads = 3;
    const auto parallel = psw_minimize(loss, 1, cfg);
    CHECK(serial.history == parallel.history);
    CHECK(serial.best_position == parallel.best_position);
  }

  TEST_CASE("phase helpers") {
    CHECK(wrap_phase(-0.5) == doctest::Approx(kTwoPi - 0.5));
    CHECK(wrap_phase(7.0) == doctest::Approx(7.0 - kTwoPi));
    CHECK(angular_difference(0.1, kTwoPi - 0.1) == doctest::Approx(0.2));
  }

  TEST_CASE("ridge on the identity") {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Identity(3, 3);
    const std::vector<double> t{1, 2, 3};
    const auto fit = ridge_fit(x, t, 0.0, false);
    CHECK(fit.weights[0] == doctest::Approx(1.0));
    CHECK(fit.weights[1] == doctest::Approx(2.0));
    CHECK(fit.weights[2] == doctest::Approx(3.0));
    CHECK(fit.bias == 0.0);
  }

  TEST_CASE("ridge with a huge penalty predicts the mean") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    Eigen::MatrixXd x(40, 3);
    std::vector<double> t(40);
    for (int i = 0; i < 40; ++i) {
      for (int j = 0; j < 3; ++j) x(i, j) = g(rng);
      t[static_cast<std::size_t>(i)] = g(rng) + 5.0;
    }
    const auto fit = ridge_fit(x, t, 1e12);
    for (double w : fit.weights) CHECK(std::abs(w) < 1e-9);
    CHECK(fit.bias == doctest::Approx(std::accumulate(t.begin(), t.end(), 0.0) / 40).epsilon(1e-9));
  }

  TEST_CASE("ridge matches gradient descent") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    Eigen::MatrixXd x(50, 4);
    std::vector<double> t(50);
    for (int i = 0; i < 50; ++i) {
      for (int j = 0; j < 4; ++j) x(i, j) = g(rng);
      t[static_cast<std::size_t>(i)] = 1.5 * x(i, 0) - x(i, 2) + 0.3 + 0.1 * g(rng);
    }
    const double lambda = 0.1;
    const auto fit = ridge_fit(x, t, lambda);

    // minimise |Xw + b - t|^2 + lambda |w|^2 by plain gradient steps
    Eigen::VectorXd w = Eigen::VectorXd::Zero(4);
    double b = 0.0;
    const Eigen::Map<const Eigen::VectorXd> tv(t.data(), 50);
    const double step = 0.5 / (x.squaredNorm() + 50.0 + lambda);
    for (int it = 0; it < 200000; ++it) {
      const Eigen::VectorXd r = (x * w).array() + b - tv.array();
      w -= step * 2.0 * (x.transpose() * r + lambda * w);
      b -= step * 2.0 * r.sum();
    }
    for (int j = 0; j < 4; ++j) CHECK(fit.weights[static_cast<std::size_t>(j)] == doctest::Approx(w(j)).epsilon(1e-8).scale(1.0));
    CHECK(fit.bias == doctest::Approx(b).epsilon(1e-8).scale(1.0));
  }

  TEST_CASE("ridge residual is orthogonal to the features") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    Eigen::MatrixXd x(30, 5);
    std::vector<double> t(30);
    for (int i = 0; i < 30; ++i) {
      for (int j = 0; j < 5; ++j) x(i, j) = g(rng);
      t[static_cast<std::size_t>(i)] = g(rng);
    }
    const auto fit = ridge_fit(x, t, 0.0);
    const Eigen::Map<const Eigen::VectorXd> w(fit.weights.data(), 5);
    const Eigen::VectorXd r = (x * w).array() + fit.bias - Eigen::Map<const Eigen::VectorXd>(t.data(), 30).array();
    CHECK((x.transpose() * r).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(std::abs(r.sum()) < 1e-10);
  }

  TEST_CASE("ridge rejects a degenerate system") {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(20, 3, 0.7);
    const std::vector<double> t(20, 1.0);
    CHECK_THROWS_AS(ridge_fit(x, t, 0.0), std::runtime_error);
    CHECK_THROWS_AS(ridge_fit(x, t, ridge_lambda(x, 1e-4)), std::runtime_error);
    CHECK_THROWS(ridge_fit(x, std::vector<double>(3, 1.0), 0.0));
  }

  TEST_CASE("noiseless pattern 10 at 16 Gbps trains to zero errors") {
    LinkSetup s;
    s.bit_rate_hz = 16e9;
    s.channel.snr_db = kNoiseOff;
    s.channel.jitter_std_s = 0.0;
    s.trace_bits = 1020;
    const Link link(s);
    const auto task = TaskSpec::pattern("10", 16e9);
    const auto trained = train_complex(link, task, swarm(5, 300), {});
    CHECK(trained.swarm.best_loss == 0.0);
    const std::vector<std::uint64_t> tests{101, 102, 103};
    CHECK(test_complex(link, task, trained.phases, tests, {}).error_count == 0);
  }
}
