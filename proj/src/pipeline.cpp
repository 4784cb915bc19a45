#include "cperc/pipeline.hpp"

#include <numeric>

namespace cperc {

std::vector<double> full_phases(std::span<const double> trained) {
  std::vector<double> phases{0.0};
  phases.insert(phases.end(), trained.begin(), trained.end());
  return phases;
}

EvalResult evaluate_acquisition(const Link& link, const TaskSpec& task,
                                std::span<const double> phases, const Acquisition& acq,
                                const DecisionOptions& decision) {
  const auto targets = link.targets(task, acq);
  if (decision.sampling_offset) {
    const int n = *decision.sampling_offset;
    const auto y = link.sampled_output(phases, acq, std::span<const int>(&n, 1));
    const auto s = sweep_offset(y, targets, decision.threshold_steps);
    EvalResult r;
    r.error_count = s.errors;
    r.total_bits = s.bits;
    r.best_threshold = s.threshold;
    r.best_threshold_index = s.threshold_index;
    r.best_sampling_index = n;
    r.ber = static_cast<double>(s.errors) / static_cast<double>(s.bits);
    r.is_error_free = s.errors == 0;
    r.statistical_limit = statistical_ber_limit(s.bits);
    return r;
  }
  std::vector<int> offsets(static_cast<std::size_t>(link.samples_per_bit()));
  std::iota(offsets.begin(), offsets.end(), 0);
  const auto y = link.sampled_output(phases, acq, offsets);
  return sweep_eval(y, targets, link.samples_per_bit(), {decision.threshold_steps, std::nullopt});
}

ComplexTraining train_complex(const Link& link, const TaskSpec& task, const PswConfig& psw,
                              const DecisionOptions& decision) {
  const int dim = link.setup().perceptron.n_taps - 1;
  if (dim < 1) throw std::invalid_argument("a single-tap perceptron has no phase to train");
  auto loss = [&](std::span<const double> x, std::uint64_t seed) {
    const auto phases = full_phases(x);
    return evaluate_acquisition(link, task, phases, link.acquire(seed), decision).ber;
  };
  ComplexTraining out;
  out.swarm = psw_minimize(loss, dim, psw);
  out.phases = full_phases(out.swarm.best_position);
  return out;
}

TestSummary test_complex(const Link& link, const TaskSpec& task, std::span<const double> phases,
                         std::span<const std::uint64_t> test_seeds, const DecisionOptions& decision) {
  std::vector<EvalResult> traces;
  traces.reserve(test_seeds.size());
  for (auto seed : test_seeds)
    traces.push_back(evaluate_acquisition(link, task, phases, link.acquire(seed), decision));
  return summarize(std::move(traces));
}

}  // namespace cperc
