#include "cperc/training.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "cperc/seeds.hpp"

namespace cperc {

void PswConfig::validate() const {
  if (particles < 2) throw std::invalid_argument("swarm needs at least 2 particles");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (!(inertia > 0.0) || !(cognitive > 0.0) || !(social > 0.0))
    throw std::invalid_argument("inertia and acceleration coefficients must be positive");
  if (!(velocity_clamp > 0.0)) throw std::invalid_argument("velocity clamp must be positive");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

double wrap_phase(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return r >= kTwoPi ? 0.0 : r;
}

double angular_difference(double to, double from) {
  double d = std::fmod(to - from + kPi, kTwoPi);
  if (d < 0.0) d += kTwoPi;
  return d - kPi;
}

namespace {

void evaluate_all(const LossFn& loss, const std::vector<std::vector<double>>& positions,
                  std::vector<double>& out, std::uint64_t seed, int iteration, int threads) {
  const std::size_t p = positions.size();
  auto work = [&](std::size_t i) {
    const double v = loss(positions[i], derive_seed(seed, "psw-eval",
                                                    static_cast<std::uint64_t>(iteration) * p + i));
    if (!std::isfinite(v))
      throw std::runtime_error(
          fmt::format("loss is not finite at iteration {}, particle {}", iteration, i));
    out[i] = v;
  };
  if (threads <= 1) {
    for (std::size_t i = 0; i < p; ++i) work(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = static_cast<std::size_t>(t); i < p; i += static_cast<std::size_t>(threads))
          work(i);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

PswResult psw_minimize(const LossFn& loss, int dim, const PswConfig& config) {
  config.validate();
  if (dim < 1) throw std::invalid_argument("search space dimension must be >= 1");
  const auto p = static_cast<std::size_t>(config.particles);
  const auto d = static_cast<std::size_t>(dim);

  std::mt19937_64 rng(derive_seed(config.rng_seed, "psw"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SwarmState s;
  s.positions.assign(p, std::vector<double>(d));
  s.velocities.assign(p, std::vector<double>(d));
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t k = 0; k < d; ++k) {
      s.positions[i][k] = wrap_phase(kTwoPi * unit(rng));
      s.velocities[i][k] = config.velocity_clamp * (2.0 * unit(rng) - 1.0);
    }

  std::vector<double> losses(p);
  evaluate_all(loss, s.positions, losses, config.rng_seed, 0, config.threads);
  s.iteration = 1;
  s.personal_best = s.positions;
  s.personal_best_loss = losses;
  const auto first = static_cast<std::size_t>(
      std::min_element(losses.begin(), losses.end()) - losses.begin());
  s.global_best = s.positions[first];
  s.global_best_loss = losses[first];

  PswResult res;
  res.history.push_back(s.global_best_loss);

  while (s.iteration < config.max_iters &&
         !(config.stop_on_error_free && s.global_best_loss <= 0.0)) {
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t k = 0; k < d; ++k) {
        const double r1 = unit(rng);
        const double r2 = unit(rng);
        const double x = s.positions[i][k];
        double v = config.inertia * s.velocities[i][k] +
                   config.cognitive * r1 * angular_difference(s.personal_best[i][k], x) +
                   config.social * r2 * angular_difference(s.global_best[k], x);
        v = std::clamp(v, -config.velocity_clamp, config.velocity_clamp);
        s.velocities[i][k] = v;
        s.positions[i][k] = wrap_phase(x + v);
      }
    }
    evaluate_all(loss, s.positions, losses, config.rng_seed, s.iteration, config.threads);
    ++s.iteration;
    for (std::size_t i = 0; i < p; ++i) {
      if (losses[i] < s.personal_best_loss[i]) {
        s.personal_best_loss[i] = losses[i];
        s.personal_best[i] = s.positions[i];
      }
    }
    for (std::size_t i = 0; i < p; ++i) {
      if (s.personal_best_loss[i] < s.global_best_loss) {
        s.global_best_loss = s.personal_best_loss[i];
        s.global_best = s.personal_best[i];
      }
    }
    res.history.push_back(s.global_best_loss);
  }

  res.best_position = s.global_best;
  res.best_loss = s.global_best_loss;
  res.state = std::move(s);
  return res;
}

double RidgeFit::predict(std::span<const double> features) const {
  if (features.size() != weights.size())
    throw std::invalid_argument("feature count does not match the readout");
  double y = bias;
  for (std::size_t i = 0; i < weights.size(); ++i) y += weights[i] * features[i];
  return y;
}

RidgeFit ridge_fit(const Eigen::MatrixXd& features, std::span<const double> targets, double lambda,
                   bool fit_bias) {
  const auto rows = features.rows();
  const auto cols = features.cols();
  if (rows < 1 || cols < 1) throw std::invalid_argument("ridge needs at least one row and column");
  if (static_cast<std::size_t>(rows) != targets.size())
    throw std::invalid_argument(
        fmt::format("{} feature rows for {} targets", rows, targets.size()));
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be >= 0");

  const Eigen::Map<const Eigen::VectorXd> t(targets.data(), rows);
  Eigen::RowVectorXd x_mean = Eigen::RowVectorXd::Zero(cols);
  double t_mean = 0.0;
  if (fit_bias) {
    x_mean = features.colwise().mean();
    t_mean = t.mean();
  }
  const Eigen::MatrixXd xc = features.rowwise() - x_mean;
  const Eigen::VectorXd tc = t.array() - t_mean;

  Eigen::MatrixXd gram = xc.transpose() * xc;
  gram.diagonal().array() += lambda;
  const Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (!(gram.trace() > 0.0) || llt.info() != Eigen::Success || llt.rcond() < 1e-13)
    throw std::runtime_error(fmt::format(
        "ridge normal equations are singular at lambda = {:g}; use lambda > 0", lambda));
  const Eigen::VectorXd w = llt.solve(xc.transpose() * tc);

  RidgeFit fit;
  fit.weights.assign(w.data(), w.data() + w.size());
  fit.bias = fit_bias ? t_mean - x_mean.dot(w) : 0.0;
  return fit;
}

double ridge_lambda(const Eigen::MatrixXd& features, double lambda_rel) {
  if (!(lambda_rel >= 0.0)) throw std::invalid_argument("relative lambda must be >= 0");
  const Eigen::MatrixXd xc = features.rowwise() - features.colwise().mean();
  return lambda_rel * xc.squaredNorm() / static_cast<double>(features.cols());
}

}  // namespace cperc
