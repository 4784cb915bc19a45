#pragma once

// Training and testing of the complex perceptron on a simulated link.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cperc/eval.hpp"
#include "cperc/link.hpp"
#include "cperc/tasks.hpp"
#include "cperc/training.hpp"

namespace cperc {

struct DecisionOptions {
  int threshold_steps = 64;
  /// Sample only this offset; otherwise every offset of the bit slot is searched.
  std::optional<int> sampling_offset;
};

struct ComplexTraining {
  std::vector<double> phases;  // all N taps, the first fixed at 0
  PswResult swarm;
};

/// Full tap phase vector from the N-1 trained phases.
std::vector<double> full_phases(std::span<const double> trained);

/// BER of one freshly acquired trace with threshold (and offset) search.
EvalResult evaluate_acquisition(const Link& link, const TaskSpec& task,
                                std::span<const double> phases, const Acquisition& acq,
                                const DecisionOptions& decision);

/// PSW over the N-1 relative phases. Every evaluation draws a new trace.
ComplexTraining train_complex(const Link& link, const TaskSpec& task, const PswConfig& psw,
                              const DecisionOptions& decision);

/// Each test trace gets its own threshold and offset search; errors are pooled.
TestSummary test_complex(const Link& link, const TaskSpec& task, std::span<const double> phases,
                         std::span<const std::uint64_t> test_seeds, const DecisionOptions& decision);

}  // namespace cperc
