#include <algorithm>

#include "tcnlab/train/config.hpp"

namespace tcnlab::train {

namespace {

struct Preset {
  const char* name;
  const char* ini;
};

// Shared task and training defaults; each preset overlays its own block.
constexpr const char* kAddingBase = R"(
[task]
name = adding
train_size = 20000
test_size = 1000
[train]
batch_size = 32
eval_batch_size = 250
)";

constexpr const char* kCopyBase = R"(
[task]
name = copy
train_size = 10000
test_size = 1000
[train]
batch_size = 32
eval_batch_size = 250
)";

constexpr const char* kMnistBase = R"(
[task]
name = seq_mnist
data_dir = data/mnist
train_size = 0
test_size = 0
[train]
batch_size = 64
epochs = 10
eval_batch_size = 500
)";

constexpr const char* kMusicBase = R"(
[task]
name = music
[model]
encoding = raw
[train]
batch_size = 1
epochs = 100
plateau_patience = 5
)";

constexpr const char* kCharBase = R"(
[task]
name = char
train_frac = 0.9
valid_frac = 0.05
[model]
encoding = embedding
[train]
batch_size = 32
eval_batch_size = 64
plateau_patience = 5
)";

const std::vector<std::pair<const char*, std::vector<const char*>>>& presets() {
  static const std::vector<std::pair<const char*, std::vector<const char*>>> table = {
      // Adding problem.
      {"adding-t50-tcn-tiny", {kAddingBase, R"(
[task]
seq_len = 50
train_size = 10000
test_size = 500
[model]
kind = tcn
kernel_size = 3
levels = 4
hidden = 16
[optim]
kind = adam
lr = 0.002
[train]
epochs = 16
eval_every = 500
)"}},
      {"adding-t200-tcn", {kAddingBase, R"(
[task]
seq_len = 200
[model]
kind = tcn
kernel_size = 6
levels = 7
hidden = 27
[optim]
kind = adam
lr = 0.002
[train]
epochs = 10
eval_every = 250
)"}},
      {"adding-t400-tcn", {kAddingBase, R"(
[task]
seq_len = 400
[model]
kind = tcn
kernel_size = 7
levels = 7
hidden = 27
[optim]
kind = adam
lr = 0.002
[train]
epochs = 10
eval_every = 250
)"}},
      {"adding-t600-tcn", {kAddingBase, R"(
[task]
seq_len = 600
[model]
kind = tcn
kernel_size = 8
levels = 8
hidden = 24
[optim]
kind = adam
lr = 0.002
[train]
epochs = 10
eval_every = 250
)"}},
      {"adding-t200-lstm", {kAddingBase, R"(
[task]
seq_len = 200
[model]
kind = lstm
num_layers = 2
hidden = 77
forget_gate_bias = 5
[optim]
kind = sgd
lr = 0.001
[train]
grad_clip = 50
epochs = 10
eval_every = 250
)"}},
      {"adding-t400-lstm", {kAddingBase, R"(
[task]
seq_len = 400
[model]
kind = lstm
num_layers = 2
hidden = 77
forget_gate_bias = 10
[optim]
kind = adam
lr = 0.002
[train]
grad_clip = 50
epochs = 10
eval_every = 250
)"}},
      {"adding-t600-lstm", {kAddingBase, R"(
[task]
seq_len = 600
[model]
kind = lstm
num_layers = 1
hidden = 130
forget_gate_bias = 1
[optim]
kind = adam
lr = 0.002
[train]
grad_clip = 5
epochs = 10
eval_every = 250
)"}},

      // Copy memory.
      {"copy-t50-tcn", {kCopyBase, R"(
[task]
seq_len = 50
[model]
kind = tcn
encoding = embedding
kernel_size = 8
levels = 4
hidden = 12
dropout = 0.0
[optim]
kind = rmsprop
lr = 0.001
[train]
grad_clip = 1.0
epochs = 12
eval_every = 500
)"}},
      {"copy-t50-lstm", {kCopyBase, R"(
[task]
seq_len = 50
[model]
kind = lstm
encoding = onehot
num_layers = 1
hidden = 43
forget_gate_bias = 1
[optim]
kind = rmsprop
lr = 0.001
[train]
grad_clip = 1.0
epochs = 12
eval_every = 500
)"}},
      {"copy-t500-tcn", {kCopyBase, R"(
[task]
seq_len = 500
[model]
kind = tcn
encoding = embedding
kernel_size = 6
levels = 9
hidden = 10
dropout = 0.05
[optim]
kind = rmsprop
lr = 0.0005
[train]
grad_clip = 1.0
epochs = 10
eval_every = 250
)"}},
      {"copy-t1000-tcn", {kCopyBase, R"(
[task]
seq_len = 1000
[model]
kind = tcn
encoding = embedding
kernel_size = 8
levels = 8
hidden = 10
dropout = 0.05
[optim]
kind = rmsprop
lr = 0.0005
[train]
grad_clip = 1.0
epochs = 10
eval_every = 250
)"}},
      {"copy-t2000-tcn", {kCopyBase, R"(
[task]
seq_len = 2000
[model]
kind = tcn
encoding = embedding
kernel_size = 8
levels = 9
hidden = 10
dropout = 0.05
[optim]
kind = rmsprop
lr = 0.0005
[train]
grad_clip = 1.0
epochs = 10
eval_every = 250
)"}},
      {"copy-t500-lstm", {kCopyBase, R"(
[task]
seq_len = 500
[model]
kind = lstm
encoding = onehot
num_layers = 1
hidden = 50
dropout = 0.05
[optim]
kind = rmsprop
lr = 0.0005
[train]
grad_clip = 0.25
epochs = 10
eval_every = 250
)"}},
      {"copy-t1000-lstm", {kCopyBase, R"(
[task]
seq_len = 1000
[model]
kind = lstm
encoding = onehot
num_layers = 1
hidden = 50
dropout = 0.05
[optim]
kind = rmsprop
lr = 0.0005
[train]
grad_clip = 1.0
epochs = 10
eval_every = 250
)"}},
      {"copy-t2000-lstm", {kCopyBase, R"(
[task]
seq_len = 2000
[model]
kind = lstm
encoding = onehot
num_layers = 3
hidden = 28
dropout = 0.05
[optim]
kind = rmsprop
lr = 0.0005
[train]
grad_clip = 1.0
epochs = 10
eval_every = 250
)"}},

      // Sequential and permuted MNIST.
      {"seq-mnist-tcn", {kMnistBase, R"(
[model]
kind = tcn
kernel_size = 7
levels = 8
hidden = 25
dropout = 0.0
[optim]
kind = rmsprop
lr = 0.002
)"}},
      {"seq-mnist-tcn-k6", {kMnistBase, R"(
[model]
kind = tcn
kernel_size = 6
levels = 8
hidden = 20
dropout = 0.0
[optim]
kind = rmsprop
lr = 0.002
)"}},
      {"pmnist-tcn", {kMnistBase, R"(
[task]
name = pmnist
perm_seed = 1
[model]
kind = tcn
kernel_size = 7
levels = 8
hidden = 25
dropout = 0.0
[optim]
kind = rmsprop
lr = 0.002
)"}},
      {"pmnist-tcn-k6", {kMnistBase, R"(
[task]
name = pmnist
perm_seed = 1
[model]
kind = tcn
kernel_size = 6
levels = 8
hidden = 20
dropout = 0.0
[optim]
kind = rmsprop
lr = 0.002
)"}},
      {"seq-mnist-lstm", {kMnistBase, R"(
[model]
kind = lstm
num_layers = 1
hidden = 130
forget_gate_bias = 1
[optim]
kind = rmsprop
lr = 0.001
[train]
grad_clip = 1.0
)"}},
      {"pmnist-lstm", {kMnistBase, R"(
[task]
name = pmnist
perm_seed = 1
[model]
kind = lstm
num_layers = 1
hidden = 130
forget_gate_bias = 10
[optim]
kind = rmsprop
lr = 0.001
[train]
grad_clip = 1.0
)"}},

      // Polyphonic music (piano-roll files supplied by the user).
      {"jsb-tcn", {kMusicBase, R"(
[task]
train_path = data/jsb/train.roll
valid_path = data/jsb/valid.roll
test_path = data/jsb/test.roll
[model]
kind = tcn
kernel_size = 3
levels = 2
hidden = 150
dropout = 0.5
[optim]
kind = adam
lr = 0.001
[train]
grad_clip = 0.4
)"}},
      {"nottingham-tcn", {kMusicBase, R"(
[task]
train_path = data/nottingham/train.roll
valid_path = data/nottingham/valid.roll
test_path = data/nottingham/test.roll
[model]
kind = tcn
kernel_size = 6
levels = 4
hidden = 150
dropout = 0.2
[optim]
kind = adam
lr = 0.002
[train]
grad_clip = 0.4
)"}},
      {"jsb-lstm", {kMusicBase, R"(
[task]
train_path = data/jsb/train.roll
valid_path = data/jsb/valid.roll
test_path = data/jsb/test.roll
[model]
kind = lstm
num_layers = 2
hidden = 200
dropout = 0.2
forget_gate_bias = 10
[optim]
kind = adam
lr = 0.001
[train]
grad_clip = 1.0
)"}},
      {"nottingham-lstm", {kMusicBase, R"(
[task]
train_path = data/nottingham/train.roll
valid_path = data/nottingham/valid.roll
test_path = data/nottingham/test.roll
[model]
kind = lstm
num_layers = 3
hidden = 280
dropout = 0.1
forget_gate_bias = 1
[optim]
kind = adam
lr = 0.004
[train]
grad_clip = 0.5
)"}},

      // Character-level language modeling.
      {"char-ptb-tcn", {kCharBase, R"(
[task]
corpus_path = data/ptb.char.txt
unroll = 400
[model]
kind = tcn
kernel_size = 3
levels = 3
hidden = 450
embed_dim = 100
dropout = 0.1
[optim]
kind = adam
lr = 0.004
[train]
grad_clip = 0.15
epochs = 20
)"}},
      {"char-ptb-lstm", {kCharBase, R"(
[task]
corpus_path = data/ptb.char.txt
unroll = 400
[model]
kind = lstm
num_layers = 2
hidden = 600
embed_dim = 120
dropout = 0.1
forget_gate_bias = 1
[optim]
kind = adam
lr = 0.002
[train]
grad_clip = 0.5
epochs = 20
)"}},
      {"char-small-tcn", {kCharBase, R"(
[task]
corpus_path = data/shakespeare.txt
unroll = 64
[model]
kind = tcn
kernel_size = 3
levels = 2
hidden = 49
use_gating = true
embed_dim = 32
dropout = 0.0
[optim]
kind = adam
lr = 0.01
[train]
grad_clip = 0.5
epochs = 1
max_steps = 2000
eval_every = 500
plateau_patience = 0
)"}},
      {"char-small-rnn", {kCharBase, R"(
[task]
corpus_path = data/shakespeare.txt
unroll = 64
[model]
kind = rnn
num_layers = 1
hidden = 194
embed_dim = 32
dropout = 0.0
[optim]
kind = adam
lr = 0.002
[train]
grad_clip = 0.5
epochs = 1
max_steps = 2000
eval_every = 500
plateau_patience = 0
)"}},
  };
  return table;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [name, parts] : presets()) out.emplace_back(name);
  return out;
}

bool has_preset(const std::string& name) {
  return std::any_of(presets().begin(), presets().end(), [&](const auto& p) { return name == p.first; });
}

ExperimentConfig preset(const std::string& name) {
  for (const auto& [pname, parts] : presets()) {
    if (name != pname) continue;
    ExperimentConfig cfg;
    for (const char* ini : parts) cfg = parse_ini(ini, cfg);
    cfg.name = name;
    return cfg;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace tcnlab::train
