#pragma once

// Comparison models: the real-valued perceptron (intensities of the delayed
// copies, real weights) and the perceptron used as a reservoir whose
// in-bit output samples feed a linear readout.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cperc/eval.hpp"
#include "cperc/link.hpp"
#include "cperc/tasks.hpp"
#include "cperc/training.hpp"

namespace cperc {

/// y(t) = sum_k v_k |u_k(t)|^2 + b.
RealWaveform real_perceptron_predict(const ComplexWaveform& input, const PerceptronConfig& config,
                                     std::span<const double> weights, double bias);

struct ReadoutOptions {
  double lambda_rel = 1e-4;
  int threshold_steps = 64;
};

/// Ridge readout on the detected tap intensities at one sampling offset,
/// fitted over the training acquisitions.
RidgeFit train_real_perceptron(const Link& link, const TaskSpec& task, int offset,
                               std::span<const std::uint64_t> train_seeds,
                               const ReadoutOptions& options);

TestSummary test_real_perceptron(const Link& link, const TaskSpec& task, int offset,
                                 const RidgeFit& readout, std::span<const std::uint64_t> test_seeds,
                                 const ReadoutOptions& options);

/// One row per bit: the output samples at offsets 0..virtual_nodes-1 of the slot.
Eigen::MatrixXd virtual_node_features(const Link& link, std::span<const double> phases,
                                      const Acquisition& acq, int virtual_nodes);

struct ReservoirRepeat {
  std::vector<double> phases;
  RidgeFit readout;
  TestSummary test;
};

struct ReservoirResult {
  std::vector<ReservoirRepeat> repeats;
  double mean_ber = 0.0;
  double best_ber = 0.0;
  std::size_t best_repeat = 0;
};

struct ReservoirOptions {
  int repeats = 10;
  int virtual_nodes = 16;
  std::uint64_t rng_seed = 1;
  ReadoutOptions readout;
};

/// Test BER of a fixed-phase reservoir with a given readout.
TestSummary test_reservoir_readout(const Link& link, const TaskSpec& task,
                                   std::span<const double> phases, const RidgeFit& readout,
                                   int virtual_nodes, std::span<const std::uint64_t> test_seeds,
                                   int threshold_steps);

/// Per repeat: uniform random phases on every tap, ridge readout on the
/// virtual nodes of the training acquisitions, pooled test BER.
ReservoirResult reservoir_predict(const Link& link, const TaskSpec& task,
                                  const ReservoirOptions& options,
                                  std::span<const std::uint64_t> train_seeds,
                                  std::span<const std::uint64_t> test_seeds);

/// As above, with training and test traces of different lengths.
ReservoirResult reservoir_predict(const Link& link, const Link& test_link, const TaskSpec& task,
                                  const ReservoirOptions& options,
                                  std::span<const std::uint64_t> train_seeds,
                                  std::span<const std::uint64_t> test_seeds);

}  // namespace cperc
