#include "cperc/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace cperc {

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void check_keys(const YAML::Node& node, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!node || node.IsNull()) return;
  if (!node.IsMap()) throw ConfigError(fmt::format("{}: expected a mapping", path.empty() ? "<root>" : path));
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!ok.contains(key)) throw ConfigError(fmt::format("{}: unknown key", join(path, key)));
  }
}

bool has(const YAML::Node& node, const char* key) { return node && node.IsMap() && node[key]; }

template <class T>
T read(const YAML::Node& node, const std::string& path, const char* key, T fallback) {
  if (!has(node, key)) return fallback;
  try {
    return node[key].as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("{}: cannot parse '{}'", join(path, key), YAML::Dump(node[key])));
  }
}

template <class T>
T require(const YAML::Node& node, const std::string& path, const char* key) {
  if (!has(node, key)) throw ConfigError(fmt::format("{}: missing", join(path, key)));
  return read<T>(node, path, key, T{});
}

double read_snr(const YAML::Node& node, const std::string& path, double fallback) {
  if (!has(node, "snr_db")) return fallback;
  const auto text = node["snr_db"].as<std::string>();
  if (text == "off" || text == ".inf" || text == "inf") return kNoiseOff;
  return read<double>(node, path, "snr_db", fallback);
}

std::size_t trace_bits(const YAML::Node& node, const std::string& path, double bit_rate_hz,
                       std::size_t fallback) {
  if (has(node, "trace_bits") && has(node, "trace_us"))
    throw ConfigError(fmt::format("{}: give trace_bits or trace_us, not both", path));
  if (has(node, "trace_us")) {
    const double us = read<double>(node, path, "trace_us", 0.0);
    if (!(us > 0.0)) throw ConfigError(fmt::format("{}.trace_us: must be positive", path));
    return static_cast<std::size_t>(std::llround(us * 1e-6 * bit_rate_hz));
  }
  const long long bits = read<long long>(node, path, "trace_bits", static_cast<long long>(fallback));
  if (bits < 1) throw ConfigError(fmt::format("{}.trace_bits: must be >= 1", path));
  return static_cast<std::size_t>(bits);
}

template <class F>
void checked(const std::string& path, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
}

}  // namespace

const char* model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::Complex: return "complex";
    case ModelKind::RealPerceptron: return "real";
    case ModelKind::Reservoir: return "reservoir";
  }
  return "?";
}

LinkSetup ExperimentConfig::link_setup(std::size_t bits) const {
  LinkSetup s;
  s.bit_rate_hz = task.bit_rate_hz;
  s.channel = channel;
  s.channel.snr_db = channel.snr_db - attenuation_db;
  s.modulation = modulation;
  s.perceptron = perceptron;
  s.trace_bits = bits;
  s.prbs_seed = prbs_seed;
  return s;
}

int ExperimentConfig::samples_per_bit() const {
  return cperc::samples_per_bit(channel.sample_rate_hz, task.bit_rate_hz);
}

void ExperimentConfig::validate() const {
  checked("task", [&] { task.validate(); });
  checked("channel", [&] { channel.validate(task.bit_rate_hz); });
  checked("channel", [&] { cperc::samples_per_bit(channel.sample_rate_hz, task.bit_rate_hz); });
  if (!(attenuation_db >= 0.0)) throw ConfigError("channel.attenuation_db: must be >= 0");
  if (prbs_seed < 1 || prbs_seed > 255) throw ConfigError("channel.prbs_seed: must be in 1..255");
  checked("perceptron", [&] { perceptron.validate(); });
  checked("perceptron.delta_t_ps",
          [&] { delay_in_samples(perceptron.delta_t_s, channel.sample_rate_hz); });
  if (std::holds_alternative<PhaseDecodeTask>(task.kind) && modulation != Modulation::Bpsk)
    throw ConfigError("task.kind: phase_decode needs channel.modulation: bpsk");
  checked("training.psw", [&] { psw.validate(); });
  if (ridge_lambda_rel < 0.0) throw ConfigError("model.ridge_lambda_rel: must be >= 0");
  if (train_traces < 1) throw ConfigError("model.train_traces: must be >= 1");
  if (reservoir_repeats < 1) throw ConfigError("model.reservoir_repeats: must be >= 1");
  if (model == ModelKind::Reservoir && virtual_nodes != samples_per_bit())
    throw ConfigError(fmt::format("model.virtual_nodes: must equal the {} samples per bit",
                                  samples_per_bit()));
  if (threshold_steps < 1) throw ConfigError("evaluation.threshold_steps: must be >= 1");
  if (test_traces < 1) throw ConfigError("evaluation.test_traces: must be >= 1");
  if (sampling == SamplingMode::Fixed && (sampling_offset < 0 || sampling_offset >= samples_per_bit()))
    throw ConfigError(fmt::format("evaluation.sampling_offset: must be in 0..{}", samples_per_bit() - 1));
  if (static_cast<std::size_t>(task.memory()) > Link::kHistoryBits)
    throw ConfigError("task: memory exceeds the link history");
}

ExperimentConfig parse_config(const YAML::Node& root) {
  if (!root || !root.IsMap()) throw ConfigError("<root>: expected a mapping");
  check_keys(root, "", {"name", "seed", "output_dir", "task", "channel", "perceptron", "model",
                        "training", "evaluation"});
  ExperimentConfig c;
  c.name = read<std::string>(root, "", "name", c.name);
  c.seed = read<std::uint64_t>(root, "", "seed", c.seed);
  c.output_dir = read<std::string>(root, "", "output_dir", c.output_dir);

  const auto task = root["task"];
  if (!task) throw ConfigError("task: missing");
  check_keys(task, "task", {"kind", "pattern", "delay_bits", "bit_rate_gbps"});
  const auto kind = require<std::string>(task, "task", "kind");
  const double rate = require<double>(task, "task", "bit_rate_gbps") * 1e9;
  checked("task", [&] {
    if (kind == "pattern")
      c.task = TaskSpec::pattern(require<std::string>(task, "task", "pattern"), rate);
    else if (kind == "delayed_xor")
      c.task = TaskSpec::delayed_xor(read<int>(task, "task", "delay_bits", 1), rate);
    else if (kind == "phase_decode")
      c.task = TaskSpec::phase_decode(rate);
    else
      throw ConfigError(fmt::format(
          "task.kind: '{}' is not one of pattern, delayed_xor, phase_decode", kind));
  });

  const auto ch = root["channel"];
  check_keys(ch, "channel", {"modulation", "sample_rate_gsps", "analog_bandwidth_ghz",
                             "extinction_ratio_db", "snr_db", "attenuation_db", "jitter_ps",
                             "prbs_seed"});
  const auto mod = read<std::string>(ch, "channel", "modulation",
                                     std::holds_alternative<PhaseDecodeTask>(c.task.kind) ? "bpsk" : "nrz");
  if (mod == "nrz")
    c.modulation = Modulation::Nrz;
  else if (mod == "bpsk")
    c.modulation = Modulation::Bpsk;
  else
    throw ConfigError(fmt::format("channel.modulation: '{}' is not one of nrz, bpsk", mod));
  c.channel.sample_rate_hz = read<double>(ch, "channel", "sample_rate_gsps", 80.0) * 1e9;
  c.channel.analog_bandwidth_hz = read<double>(ch, "channel", "analog_bandwidth_ghz", 16.0) * 1e9;
  c.channel.extinction_ratio_db = read<double>(ch, "channel", "extinction_ratio_db", 7.0);
  c.channel.snr_db = read_snr(ch, "channel", 14.0);
  c.attenuation_db = read<double>(ch, "channel", "attenuation_db", 0.0);
  c.channel.jitter_std_s = read<double>(ch, "channel", "jitter_ps", 2.0) * 1e-12;
  c.prbs_seed = read<unsigned>(ch, "channel", "prbs_seed", 1);

  const auto pc = root["perceptron"];
  check_keys(pc, "perceptron", {"n_taps", "delta_t_ps", "amplitudes_sq", "loss_db_per_cm",
                                "spiral_length_cm", "phase_noise_frac", "phase_noise_mode"});
  auto& p = c.perceptron;
  p.n_taps = read<int>(pc, "perceptron", "n_taps", 4);
  if (p.n_taps < 1) throw ConfigError("perceptron.n_taps: must be >= 1");
  p.delta_t_s = read<double>(pc, "perceptron", "delta_t_ps", 50.0) * 1e-12;
  c.spiral_length_cm = read<double>(pc, "perceptron", "spiral_length_cm", kNominalSpiralLengthCm);
  if (has(pc, "amplitudes_sq") && has(pc, "loss_db_per_cm"))
    throw ConfigError("perceptron: give amplitudes_sq or loss_db_per_cm, not both");
  if (has(pc, "loss_db_per_cm")) {
    c.loss_db_per_cm = read<double>(pc, "perceptron", "loss_db_per_cm", 0.0);
    checked("perceptron.loss_db_per_cm",
            [&] { p.amplitudes = amplitudes_from_loss(*c.loss_db_per_cm, c.spiral_length_cm, p.n_taps); });
  } else if (has(pc, "amplitudes_sq")) {
    const auto a2 = read<std::vector<double>>(pc, "perceptron", "amplitudes_sq", {});
    p.amplitudes.clear();
    for (double v : a2) {
      if (!(v >= 0.0)) throw ConfigError("perceptron.amplitudes_sq: entries must be >= 0");
      p.amplitudes.push_back(std::sqrt(v));
    }
  } else if (p.n_taps != 4) {
    throw ConfigError("perceptron.amplitudes_sq: required when n_taps != 4");
  }
  p.phases.assign(static_cast<std::size_t>(p.n_taps), 0.0);
  p.phase_noise_frac = read<double>(pc, "perceptron", "phase_noise_frac", 0.01);
  const auto pmode = read<std::string>(pc, "perceptron", "phase_noise_mode", "full_turn");
  if (pmode == "full_turn")
    p.phase_noise_mode = PhaseNoiseMode::FullTurn;
  else if (pmode == "relative")
    p.phase_noise_mode = PhaseNoiseMode::Relative;
  else
    throw ConfigError(fmt::format("perceptron.phase_noise_mode: '{}' is not one of full_turn, relative", pmode));

  const auto m = root["model"];
  check_keys(m, "model", {"kind", "ridge_lambda_rel", "train_traces", "reservoir_repeats", "virtual_nodes"});
  const auto mk = read<std::string>(m, "model", "kind", "complex");
  if (mk == "complex")
    c.model = ModelKind::Complex;
  else if (mk == "real")
    c.model = ModelKind::RealPerceptron;
  else if (mk == "reservoir")
    c.model = ModelKind::Reservoir;
  else
    throw ConfigError(fmt::format("model.kind: '{}' is not one of complex, real, reservoir", mk));
  c.ridge_lambda_rel = read<double>(m, "model", "ridge_lambda_rel", c.ridge_lambda_rel);
  c.train_traces = read<int>(m, "model", "train_traces", c.train_traces);
  c.reservoir_repeats = read<int>(m, "model", "reservoir_repeats", c.reservoir_repeats);
  c.virtual_nodes = read<int>(m, "model", "virtual_nodes", 0);
  if (c.virtual_nodes == 0) checked("channel", [&] { c.virtual_nodes = c.samples_per_bit(); });

  const auto tr = root["training"];
  check_keys(tr, "training", {"trace_bits", "trace_us", "psw"});
  c.train_bits = trace_bits(tr, "training", c.task.bit_rate_hz,
                            static_cast<std::size_t>(std::llround(2e-6 * c.task.bit_rate_hz)));
  const auto psw = has(tr, "psw") ? tr["psw"] : YAML::Node();
  check_keys(psw, "training.psw", {"particles", "max_iters", "inertia", "cognitive", "social",
                                   "velocity_clamp_rad", "stop_on_error_free", "threads"});
  c.psw.particles = read<int>(psw, "training.psw", "particles", c.psw.particles);
  c.psw.max_iters = read<int>(psw, "training.psw", "max_iters", c.psw.max_iters);
  c.psw.inertia = read<double>(psw, "training.psw", "inertia", c.psw.inertia);
  c.psw.cognitive = read<double>(psw, "training.psw", "cognitive", c.psw.cognitive);
  c.psw.social = read<double>(psw, "training.psw", "social", c.psw.social);
  c.psw.velocity_clamp = read<double>(psw, "training.psw", "velocity_clamp_rad", c.psw.velocity_clamp);
  c.psw.stop_on_error_free = read<bool>(psw, "training.psw", "stop_on_error_free", c.psw.stop_on_error_free);
  c.psw.threads = read<int>(psw, "training.psw", "threads", c.psw.threads);

  const auto ev = root["evaluation"];
  check_keys(ev, "evaluation", {"sampling", "sampling_offset", "threshold_steps", "test_traces",
                                "trace_bits", "trace_us"});
  const auto sm = read<std::string>(ev, "evaluation", "sampling", "best");
  if (sm == "best")
    c.sampling = SamplingMode::Best;
  else if (sm == "sweep")
    c.sampling = SamplingMode::Sweep;
  else if (sm == "fixed")
    c.sampling = SamplingMode::Fixed;
  else
    throw ConfigError(fmt::format("evaluation.sampling: '{}' is not one of best, sweep, fixed", sm));
  if (c.sampling == SamplingMode::Fixed && !(has(ev, "sampling_offset")))
    throw ConfigError("evaluation.sampling_offset: missing");
  c.sampling_offset = read<int>(ev, "evaluation", "sampling_offset", 0);
  c.threshold_steps = read<int>(ev, "evaluation", "threshold_steps", c.threshold_steps);
  c.test_traces = read<int>(ev, "evaluation", "test_traces", c.test_traces);
  c.test_bits = trace_bits(ev, "evaluation", c.task.bit_rate_hz,
                           static_cast<std::size_t>(std::llround(2e-6 * c.task.bit_rate_hz)));

  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("{}: cannot open", path));
  YAML::Node root;
  try {
    root = YAML::Load(in);
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
  return parse_config(root);
}

namespace {

// shortest text that parses back to the same double
std::string num(double x) { return fmt::format("{}", x); }

// shortest text v with decode(v) == stored, for values kept in other units
template <class Decode>
std::string exact(double stored, double guess, Decode decode) {
  for (int digits = 1; digits <= 17; ++digits) {
    double up = guess, down = guess;
    for (int step = 0; step < 8; ++step) {
      for (double cand : {up, down}) {
        const auto text = fmt::format("{:.{}g}", cand, digits);
        const double v = std::stod(text);
        if (decode(v) == stored) return num(v);
      }
      up = std::nextafter(up, HUGE_VAL);
      down = std::nextafter(down, -HUGE_VAL);
    }
  }
  throw std::logic_error(fmt::format("no exact text for {}", stored));
}

std::string scaled(double stored, double unit) {
  return exact(stored, stored / unit, [unit](double v) { return v * unit; });
}

}  // namespace

std::string to_yaml(const ExperimentConfig& c) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << c.name;
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::Key << "output_dir" << YAML::Value << c.output_dir;

  out << YAML::Key << "task" << YAML::Value << YAML::BeginMap;
  if (const auto* pt = std::get_if<PatternTask>(&c.task.kind)) {
    out << YAML::Key << "kind" << YAML::Value << "pattern";
    out << YAML::Key << "pattern" << YAML::Value << YAML::DoubleQuoted << bit_string(pt->pattern);
  } else if (const auto* x = std::get_if<DelayedXorTask>(&c.task.kind)) {
    out << YAML::Key << "kind" << YAML::Value << "delayed_xor";
    out << YAML::Key << "delay_bits" << YAML::Value << x->delay;
  } else {
    out << YAML::Key << "kind" << YAML::Value << "phase_decode";
  }
  out << YAML::Key << "bit_rate_gbps" << YAML::Value << scaled(c.task.bit_rate_hz, 1e9);
  out << YAML::EndMap;

  out << YAML::Key << "channel" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "modulation" << YAML::Value << (c.modulation == Modulation::Nrz ? "nrz" : "bpsk");
  out << YAML::Key << "sample_rate_gsps" << YAML::Value << scaled(c.channel.sample_rate_hz, 1e9);
  out << YAML::Key << "analog_bandwidth_ghz" << YAML::Value << scaled(c.channel.analog_bandwidth_hz, 1e9);
  out << YAML::Key << "extinction_ratio_db" << YAML::Value << num(c.channel.extinction_ratio_db);
  out << YAML::Key << "snr_db" << YAML::Value;
  if (std::isinf(c.channel.snr_db))
    out << "off";
  else
    out << num(c.channel.snr_db);
  out << YAML::Key << "attenuation_db" << YAML::Value << num(c.attenuation_db);
  out << YAML::Key << "jitter_ps" << YAML::Value << scaled(c.channel.jitter_std_s, 1e-12);
  out << YAML::Key << "prbs_seed" << YAML::Value << c.prbs_seed;
  out << YAML::EndMap;

  out << YAML::Key << "perceptron" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "n_taps" << YAML::Value << c.perceptron.n_taps;
  out << YAML::Key << "delta_t_ps" << YAML::Value << scaled(c.perceptron.delta_t_s, 1e-12);
  if (c.loss_db_per_cm) {
    out << YAML::Key << "loss_db_per_cm" << YAML::Value << num(*c.loss_db_per_cm);
  } else {
    out << YAML::Key << "amplitudes_sq" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (double a : c.perceptron.amplitudes)
      out << exact(a, a * a, [](double v) { return std::sqrt(v); });
    out << YAML::EndSeq;
  }
  out << YAML::Key << "spiral_length_cm" << YAML::Value << num(c.spiral_length_cm);
  out << YAML::Key << "phase_noise_frac" << YAML::Value << num(c.perceptron.phase_noise_frac);
  out << YAML::Key << "phase_noise_mode" << YAML::Value
      << (c.perceptron.phase_noise_mode == PhaseNoiseMode::FullTurn ? "full_turn" : "relative");
  out << YAML::EndMap;

  out << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << model_name(c.model);
  out << YAML::Key << "ridge_lambda_rel" << YAML::Value << num(c.ridge_lambda_rel);
  out << YAML::Key << "train_traces" << YAML::Value << c.train_traces;
  out << YAML::Key << "reservoir_repeats" << YAML::Value << c.reservoir_repeats;
  out << YAML::Key << "virtual_nodes" << YAML::Value << c.virtual_nodes;
  out << YAML::EndMap;

  out << YAML::Key << "training" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "trace_bits" << YAML::Value << c.train_bits;
  out << YAML::Key << "psw" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "particles" << YAML::Value << c.psw.particles;
  out << YAML::Key << "max_iters" << YAML::Value << c.psw.max_iters;
  out << YAML::Key << "inertia" << YAML::Value << num(c.psw.inertia);
  out << YAML::Key << "cognitive" << YAML::Value << num(c.psw.cognitive);
  out << YAML::Key << "social" << YAML::Value << num(c.psw.social);
  out << YAML::Key << "velocity_clamp_rad" << YAML::Value << num(c.psw.velocity_clamp);
  out << YAML::Key << "stop_on_error_free" << YAML::Value << c.psw.stop_on_error_free;
  out << YAML::Key << "threads" << YAML::Value << c.psw.threads;
  out << YAML::EndMap << YAML::EndMap;

  out << YAML::Key << "evaluation" << YAML::Value << YAML::BeginMap;
  const char* sm = c.sampling == SamplingMode::Best ? "best" : (c.sampling == SamplingMode::Sweep ? "sweep" : "fixed");
  out << YAML::Key << "sampling" << YAML::Value << sm;
  if (c.sampling == SamplingMode::Fixed)
    out << YAML::Key << "sampling_offset" << YAML::Value << c.sampling_offset;
  out << YAML::Key << "threshold_steps" << YAML::Value << c.threshold_steps;
  out << YAML::Key << "test_traces" << YAML::Value << c.test_traces;
  out << YAML::Key << "trace_bits" << YAML::Value << c.test_bits;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace cperc
