#pragma once

// Experiment configuration: a YAML file with units in the key names.
// docs/config.md lists every key.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "cperc/core_model.hpp"
#include "cperc/link.hpp"
#include "cperc/signal_chain.hpp"
#include "cperc/tasks.hpp"
#include "cperc/training.hpp"

namespace YAML {
class Node;
}

namespace cperc {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ModelKind { Complex, RealPerceptron, Reservoir };

enum class SamplingMode {
  Best,   // every test trace searches all offsets
  Sweep,  // train and test each offset on its own
  Fixed,  // a single configured offset
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 1;
  std::string output_dir = "results";

  TaskSpec task = TaskSpec::delayed_xor(1, 5e9);
  Modulation modulation = Modulation::Nrz;
  ChannelParams channel;
  double attenuation_db = 0.0;
  unsigned prbs_seed = 1;

  PerceptronConfig perceptron = PerceptronConfig::nominal();
  std::optional<double> loss_db_per_cm;  // set when amplitudes come from the loss model
  double spiral_length_cm = kNominalSpiralLengthCm;

  ModelKind model = ModelKind::Complex;
  double ridge_lambda_rel = 1e-4;
  int train_traces = 1;
  int reservoir_repeats = 10;
  int virtual_nodes = 16;

  PswConfig psw;
  std::size_t train_bits = 10000;

  SamplingMode sampling = SamplingMode::Best;
  int sampling_offset = 0;
  int threshold_steps = 64;
  int test_traces = 10;
  std::size_t test_bits = 10000;

  /// Link for traces of `bits` bits; the detector SNR is lowered by the
  /// attenuation.
  LinkSetup link_setup(std::size_t bits) const;
  int samples_per_bit() const;
  void validate() const;
};

const char* model_name(ModelKind kind);

ExperimentConfig parse_config(const YAML::Node& root);
ExperimentConfig load_config(const std::string& path);

/// Fully resolved config; parse_config(to_yaml(c)) reproduces c.
std::string to_yaml(const ExperimentConfig& config);

}  // namespace cperc
