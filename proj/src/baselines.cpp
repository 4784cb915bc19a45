#include "cperc/baselines.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "cperc/seeds.hpp"

namespace cperc {

RealWaveform real_perceptron_predict(const ComplexWaveform& input, const PerceptronConfig& config,
                                     std::span<const double> weights, double bias) {
  if (weights.size() != static_cast<std::size_t>(config.n_taps))
    throw std::invalid_argument(
        fmt::format("{} weights for {} taps", weights.size(), config.n_taps));
  const auto taps = delay_taps(input, config);
  RealWaveform y{std::vector<double>(taps.front().size(), bias), input.sample_rate_hz};
  for (std::size_t k = 0; k < taps.size(); ++k)
    for (std::size_t j = 0; j < y.size(); ++j) y.samples[j] += weights[k] * std::norm(taps[k].samples[j]);
  return y;
}

namespace {

std::vector<double> as_doubles(const Targets& t) { return {t.bits.begin(), t.bits.end()}; }

Eigen::MatrixXd stack(const std::vector<Eigen::MatrixXd>& blocks) {
  Eigen::Index rows = 0;
  for (const auto& b : blocks) rows += b.rows();
  Eigen::MatrixXd out(rows, blocks.front().cols());
  Eigen::Index r = 0;
  for (const auto& b : blocks) {
    out.middleRows(r, b.rows()) = b;
    r += b.rows();
  }
  return out;
}

RidgeFit fit_readout(const std::vector<Eigen::MatrixXd>& blocks, const std::vector<double>& targets,
                     double lambda_rel) {
  const auto x = stack(blocks);
  return ridge_fit(x, targets, ridge_lambda(x, lambda_rel));
}

EvalResult score(const Eigen::MatrixXd& features, const RidgeFit& readout, const Targets& targets,
                 int offset, int threshold_steps) {
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(readout.weights.data(),
                                                              static_cast<Eigen::Index>(readout.weights.size()));
  const Eigen::VectorXd y = (features * w).array() + readout.bias;
  const auto s = sweep_offset(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())),
                              targets, threshold_steps);
  EvalResult r;
  r.error_count = s.errors;
  r.total_bits = s.bits;
  r.best_threshold = s.threshold;
  r.best_threshold_index = s.threshold_index;
  r.best_sampling_index = offset;
  r.ber = static_cast<double>(s.errors) / static_cast<double>(s.bits);
  r.is_error_free = s.errors == 0;
  r.statistical_limit = statistical_ber_limit(s.bits);
  return r;
}

}  // namespace

RidgeFit train_real_perceptron(const Link& link, const TaskSpec& task, int offset,
                               std::span<const std::uint64_t> train_seeds,
                               const ReadoutOptions& options) {
  if (train_seeds.empty()) throw std::invalid_argument("no training acquisitions");
  std::vector<Eigen::MatrixXd> blocks;
  std::vector<double> targets;
  for (auto seed : train_seeds) {
    const auto acq = link.acquire(seed);
    blocks.push_back(link.tap_power_features(acq, offset));
    const auto t = as_doubles(link.targets(task, acq));
    targets.insert(targets.end(), t.begin(), t.end());
  }
  return fit_readout(blocks, targets, options.lambda_rel);
}

TestSummary test_real_perceptron(const Link& link, const TaskSpec& task, int offset,
                                 const RidgeFit& readout, std::span<const std::uint64_t> test_seeds,
                                 const ReadoutOptions& options) {
  std::vector<EvalResult> traces;
  for (auto seed : test_seeds) {
    const auto acq = link.acquire(seed);
    traces.push_back(score(link.tap_power_features(acq, offset), readout, link.targets(task, acq),
                           offset, options.threshold_steps));
  }
  return summarize(std::move(traces));
}

Eigen::MatrixXd virtual_node_features(const Link& link, std::span<const double> phases,
                                      const Acquisition& acq, int virtual_nodes) {
  if (virtual_nodes != link.samples_per_bit())
    throw std::invalid_argument(fmt::format("{} virtual nodes but {} samples per bit",
                                            virtual_nodes, link.samples_per_bit()));
  std::vector<int> offsets(static_cast<std::size_t>(virtual_nodes));
  std::iota(offsets.begin(), offsets.end(), 0);
  const auto y = link.sampled_output(phases, acq, offsets);
  const auto rows = static_cast<Eigen::Index>(acq.bits.size());
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      y.data(), rows, virtual_nodes);
}

TestSummary test_reservoir_readout(const Link& link, const TaskSpec& task,
                                   std::span<const double> phases, const RidgeFit& readout,
                                   int virtual_nodes, std::span<const std::uint64_t> test_seeds,
                                   int threshold_steps) {
  std::vector<EvalResult> traces;
  for (auto seed : test_seeds) {
    const auto acq = link.acquire(seed);
    traces.push_back(score(virtual_node_features(link, phases, acq, virtual_nodes), readout,
                           link.targets(task, acq), 0, threshold_steps));
  }
  return summarize(std::move(traces));
}

ReservoirResult reservoir_predict(const Link& link, const TaskSpec& task,
                                  const ReservoirOptions& options,
                                  std::span<const std::uint64_t> train_seeds,
                                  std::span<const std::uint64_t> test_seeds) {
  return reservoir_predict(link, link, task, options, train_seeds, test_seeds);
}

ReservoirResult reservoir_predict(const Link& link, const Link& test_link, const TaskSpec& task,
                                  const ReservoirOptions& options,
                                  std::span<const std::uint64_t> train_seeds,
                                  std::span<const std::uint64_t> test_seeds) {
  if (options.repeats < 1) throw std::invalid_argument("reservoir needs at least one repeat");
  if (options.virtual_nodes < 1) throw std::invalid_argument("reservoir needs at least one node");
  if (train_seeds.empty()) throw std::invalid_argument("no training acquisitions");
  const auto n = static_cast<std::size_t>(link.setup().perceptron.n_taps);

  ReservoirResult res;
  for (int r = 0; r < options.repeats; ++r) {
    std::mt19937_64 rng(derive_seed(options.rng_seed, "reservoir-phases", static_cast<std::uint64_t>(r)));
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);
    ReservoirRepeat rep;
    rep.phases.resize(n);
    for (auto& p : rep.phases) p = angle(rng);

    std::vector<Eigen::MatrixXd> blocks;
    std::vector<double> targets;
    for (auto seed : train_seeds) {
      const auto acq = link.acquire(seed);
      blocks.push_back(virtual_node_features(link, rep.phases, acq, options.virtual_nodes));
      const auto t = as_doubles(link.targets(task, acq));
      targets.insert(targets.end(), t.begin(), t.end());
    }
    rep.readout = fit_readout(blocks, targets, options.readout.lambda_rel);
    rep.test = test_reservoir_readout(test_link, task, rep.phases, rep.readout, options.virtual_nodes,
                                      test_seeds, options.readout.threshold_steps);
    res.repeats.push_back(std::move(rep));
  }
  double total = 0.0;
  res.best_ber = res.repeats.front().test.ber;
  for (std::size_t i = 0; i < res.repeats.size(); ++i) {
    const double b = res.repeats[i].test.ber;
    total += b;
    if (b < res.best_ber) {
      res.best_ber = b;
      res.best_repeat = i;
    }
  }
  res.mean_ber = total / static_cast<double>(res.repeats.size());
  return res;
}

}  // namespace cperc
