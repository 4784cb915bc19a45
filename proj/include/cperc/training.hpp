#pragma once

// Particle swarm over a periodic phase space, and ridge regression readouts.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cperc/waveform.hpp"

namespace cperc {

struct PswConfig {
  int particles = 20;
  int max_iters = 300;
  double inertia = 0.729;
  double cognitive = 1.49445;
  double social = 1.49445;
  double velocity_clamp = kPi;
  bool stop_on_error_free = true;
  std::uint64_t rng_seed = 1;
  int threads = 1;

  void validate() const;
};

struct SwarmState {
  std::vector<std::vector<double>> positions;
  std::vector<std::vector<double>> velocities;
  std::vector<std::vector<double>> personal_best;
  std::vector<double> personal_best_loss;
  std::vector<double> global_best;
  double global_best_loss = 0.0;
  int iteration = 0;
};

struct PswResult {
  std::vector<double> best_position;
  double best_loss = 0.0;
  std::vector<double> history;  // global best loss after each iteration
  SwarmState state;
};

/// Loss of a position; eval_seed is unique per (iteration, particle) so a
/// stochastic loss can draw fresh data for every evaluation.
using LossFn = std::function<double(std::span<const double> position, std::uint64_t eval_seed)>;

/// Wraps an angle to [0, 2pi).
double wrap_phase(double x);

/// Shortest signed angular displacement from `from` to `to`, in [-pi, pi).
double angular_difference(double to, double from);

/// Minimises `loss` over [0, 2pi)^dim. The initial evaluation counts as
/// iteration 1; stops once the best loss is 0 if stop_on_error_free is set.
PswResult psw_minimize(const LossFn& loss, int dim, const PswConfig& config);

struct RidgeFit {
  std::vector<double> weights;
  double bias = 0.0;

  double predict(std::span<const double> features) const;
};

/// Minimises ||Xw + b - t||^2 + lambda ||w||^2 with b unpenalised (fit on
/// centred data). Without fit_bias, b = 0 and X is used as is.
RidgeFit ridge_fit(const Eigen::MatrixXd& features, std::span<const double> targets, double lambda,
                   bool fit_bias = true);

/// lambda_rel times the mean power of the centred features, tr(Xc^T Xc) / F.
double ridge_lambda(const Eigen::MatrixXd& features, double lambda_rel);

}  // namespace cperc
