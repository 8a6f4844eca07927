#include "tcnlab/train/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace tcnlab::train {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
}

struct Key {
  const char* section;
  const char* name;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string& full, const std::string&)> set;
};

template <typename T>
Key size_key(const char* sec, const char* name, T ExperimentConfig::*group, std::size_t T::*field) {
  return {sec, name, [=](const ExperimentConfig& c) { return std::to_string((c.*group).*field); },
          [=](ExperimentConfig& c, const std::string& k, const std::string& v) {
            (c.*group).*field = static_cast<std::size_t>(parse_uint(k, v));
          }};
}

template <typename T>
Key u64_key(const char* sec, const char* name, T ExperimentConfig::*group, std::uint64_t T::*field) {
  return {sec, name, [=](const ExperimentConfig& c) { return std::to_string((c.*group).*field); },
          [=](ExperimentConfig& c, const std::string& k, const std::string& v) {
            (c.*group).*field = parse_uint(k, v);
          }};
}

template <typename T>
Key double_key(const char* sec, const char* name, T ExperimentConfig::*group, double T::*field) {
  return {sec, name, [=](const ExperimentConfig& c) { return fmt_double((c.*group).*field); },
          [=](ExperimentConfig& c, const std::string& k, const std::string& v) {
            (c.*group).*field = parse_double(k, v);
          }};
}

template <typename T>
Key bool_key(const char* sec, const char* name, T ExperimentConfig::*group, bool T::*field) {
  return {sec, name, [=](const ExperimentConfig& c) { return (c.*group).*field ? "true" : "false"; },
          [=](ExperimentConfig& c, const std::string& k, const std::string& v) {
            (c.*group).*field = parse_bool(k, v);
          }};
}

template <typename T>
Key string_key(const char* sec, const char* name, T ExperimentConfig::*group, std::string T::*field) {
  return {sec, name, [=](const ExperimentConfig& c) { return (c.*group).*field; },
          [=](ExperimentConfig& c, const std::string&, const std::string& v) { (c.*group).*field = v; }};
}

const std::vector<Key>& keys() {
  using EC = ExperimentConfig;
  static const std::vector<Key> table = {
      {"run", "name", [](const EC& c) { return c.name; },
       [](EC& c, const std::string&, const std::string& v) { c.name = v; }},

      {"task", "name", [](const EC& c) { return tasks::to_string(c.task.kind); },
       [](EC& c, const std::string&, const std::string& v) { c.task.kind = tasks::parse_task_kind(v); }},
      size_key("task", "seq_len", &EC::task, &TaskConfig::seq_len),
      size_key("task", "train_size", &EC::task, &TaskConfig::train_size),
      size_key("task", "test_size", &EC::task, &TaskConfig::test_size),
      u64_key("task", "perm_seed", &EC::task, &TaskConfig::perm_seed),
      string_key("task", "data_dir", &EC::task, &TaskConfig::data_dir),
      string_key("task", "train_path", &EC::task, &TaskConfig::train_path),
      string_key("task", "valid_path", &EC::task, &TaskConfig::valid_path),
      string_key("task", "test_path", &EC::task, &TaskConfig::test_path),
      string_key("task", "corpus_path", &EC::task, &TaskConfig::corpus_path),
      double_key("task", "train_frac", &EC::task, &TaskConfig::train_frac),
      double_key("task", "valid_frac", &EC::task, &TaskConfig::valid_frac),
      size_key("task", "unroll", &EC::task, &TaskConfig::unroll),

      {"model", "kind", [](const EC& c) { return nn::to_string(c.model.kind); },
       [](EC& c, const std::string&, const std::string& v) { c.model.kind = nn::parse_model_kind(v); }},
      {"model", "encoding", [](const EC& c) { return nn::to_string(c.model.encoding); },
       [](EC& c, const std::string&, const std::string& v) { c.model.encoding = nn::parse_encoding(v); }},
      size_key("model", "embed_dim", &EC::model, &nn::ModelSpec::embed_dim),
      size_key("model", "kernel_size", &EC::model, &nn::ModelSpec::kernel_size),
      size_key("model", "levels", &EC::model, &nn::ModelSpec::levels),
      size_key("model", "hidden", &EC::model, &nn::ModelSpec::hidden),
      double_key("model", "dropout", &EC::model, &nn::ModelSpec::dropout),
      bool_key("model", "use_residual", &EC::model, &nn::ModelSpec::use_residual),
      bool_key("model", "use_gating", &EC::model, &nn::ModelSpec::use_gating),
      size_key("model", "dilation_base", &EC::model, &nn::ModelSpec::dilation_base),
      size_key("model", "num_layers", &EC::model, &nn::ModelSpec::num_layers),
      double_key("model", "forget_gate_bias", &EC::model, &nn::ModelSpec::forget_gate_bias),

      {"optim", "kind", [](const EC& c) { return to_string(c.optim.kind); },
       [](EC& c, const std::string&, const std::string& v) { c.optim.kind = parse_optimizer_kind(v); }},
      double_key("optim", "lr", &EC::optim, &OptimizerConfig::lr),
      double_key("optim", "beta1", &EC::optim, &OptimizerConfig::beta1),
      double_key("optim", "beta2", &EC::optim, &OptimizerConfig::beta2),
      double_key("optim", "eps", &EC::optim, &OptimizerConfig::eps),
      double_key("optim", "alpha", &EC::optim, &OptimizerConfig::alpha),
      double_key("optim", "momentum", &EC::optim, &OptimizerConfig::momentum),
      double_key("optim", "weight_decay", &EC::optim, &OptimizerConfig::weight_decay),

      size_key("train", "batch_size", &EC::train, &TrainConfig::batch_size),
      size_key("train", "epochs", &EC::train, &TrainConfig::epochs),
      size_key("train", "max_steps", &EC::train, &TrainConfig::max_steps),
      size_key("train", "eval_every", &EC::train, &TrainConfig::eval_every),
      size_key("train", "eval_batch_size", &EC::train, &TrainConfig::eval_batch_size),
      double_key("train", "grad_clip", &EC::train, &TrainConfig::grad_clip),
      size_key("train", "plateau_patience", &EC::train, &TrainConfig::plateau_patience),
      double_key("train", "plateau_factor", &EC::train, &TrainConfig::plateau_factor),
      u64_key("train", "seed", &EC::train, &TrainConfig::seed),
      bool_key("train", "record_wall_ms", &EC::train, &TrainConfig::record_wall_ms),
      string_key("train", "out_dir", &EC::train, &TrainConfig::out_dir),
  };
  return table;
}

const Key* find_key(const std::string& section, const std::string& name) {
  for (const auto& k : keys())
    if (section == k.section && name == k.name) return &k;
  return nullptr;
}

void set_key(ExperimentConfig& cfg, const std::string& section, const std::string& name, const std::string& value) {
  const Key* k = find_key(section, name);
  const std::string full = section + "." + name;
  if (!k) throw ConfigError("unknown config key '" + full + "'");
  k->set(cfg, full, value);
}

std::string canonical(const ExperimentConfig& cfg, bool with_out_dir) {
  std::ostringstream out;
  std::string section;
  for (const auto& k : keys()) {
    if (!with_out_dir && std::string(k.section) == "train" && std::string(k.name) == "out_dir") continue;
    if (section != k.section) {
      if (!section.empty()) out << '\n';
      section = k.section;
      out << '[' << section << "]\n";
    }
    out << k.name << " = " << k.get(cfg) << '\n';
  }
  return out.str();
}

}  // namespace

std::string to_ini(const ExperimentConfig& cfg) { return canonical(cfg, true); }

ExperimentConfig parse_ini(const std::string& text, ExperimentConfig base) {
  std::istringstream in(text);
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("config line " + std::to_string(lineno) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    if (section.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": key outside a section");
    set_key(base, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_ini(ss.str());
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
  }
  set_key(cfg, trim(assignment.substr(0, dot)), trim(assignment.substr(dot + 1, eq - dot - 1)),
          trim(assignment.substr(eq + 1)));
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& k : keys()) out.push_back(std::string(k.section) + "." + k.name);
  return out;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical(cfg, false)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nn::ModelIo model_io(const ExperimentConfig& cfg, std::size_t vocab_size) {
  nn::ModelIo io;
  switch (cfg.task.kind) {
    case tasks::TaskKind::kAdding:
      io.input_size = 2;
      io.output_size = 1;
      io.output = nn::OutputMode::kLastStep;
      break;
    case tasks::TaskKind::kCopy:
      io.token_input = true;
      io.input_size = tasks::kCopyClasses;
      io.output_size = tasks::kCopyClasses;
      io.output = nn::OutputMode::kPerStep;
      break;
    case tasks::TaskKind::kSeqMnist:
    case tasks::TaskKind::kPermutedMnist:
      io.input_size = 1;
      io.output_size = 10;
      io.output = nn::OutputMode::kLastStep;
      break;
    case tasks::TaskKind::kMusic:
      io.input_size = tasks::kPianoKeys;
      io.output_size = tasks::kPianoKeys;
      io.output = nn::OutputMode::kPerStep;
      break;
    case tasks::TaskKind::kChar:
      if (vocab_size == 0) throw ConfigError("character task needs the corpus vocabulary size");
      io.token_input = true;
      io.input_size = vocab_size;
      io.output_size = vocab_size;
      io.output = nn::OutputMode::kPerStep;
      break;
  }
  return io;
}

}  // namespace tcnlab::train
