#include "tcnlab/train/data.hpp"

#include <algorithm>
#include <filesystem>
#include <numeric>

namespace tcnlab::train {

namespace fs = std::filesystem;

std::string to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValid: return "valid";
    case Split::kTest: return "test";
  }
  return "?";
}

std::string resolve_data_path(const std::string& path) {
  if (path.empty() || fs::exists(path)) return path;
#ifdef TCNLAB_SOURCE_DIR
  if (fs::path(path).is_relative()) {
    fs::path alt = fs::path(TCNLAB_SOURCE_DIR) / path;
    if (fs::exists(alt)) return alt.string();
  }
#endif
  return path;
}

tasks::TaskBatch gather(const tasks::TaskBatch& all, std::span<const std::size_t> indices) {
  const std::size_t n = all.batch_size();
  const std::size_t b = indices.size();
  tasks::TaskBatch out;
  out.loss_kind = all.loss_kind;
  out.input.batch = b;
  out.input.length = all.input.length;
  auto copy_rows = [&](const auto& src, auto& dst) {
    const std::size_t stride = src.size() / n;
    dst.resize(b * stride);
    for (std::size_t i = 0; i < b; ++i) {
      if (indices[i] >= n) throw DomainError("example index out of range");
      std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(indices[i] * stride), stride,
                  dst.begin() + static_cast<std::ptrdiff_t>(i * stride));
    }
  };
  auto copy_tensor = [&](const Tensor<float>& src) {
    Shape shape = src.shape();
    shape[0] = b;
    Tensor<float> dst(shape);
    const std::size_t stride = src.numel() / n;
    for (std::size_t i = 0; i < b; ++i) {
      if (indices[i] >= n) throw DomainError("example index out of range");
      std::copy_n(src.ptr() + indices[i] * stride, stride, dst.ptr() + i * stride);
    }
    return dst;
  };
  if (all.input.values.defined()) out.input.values = copy_tensor(all.input.values);
  if (!all.input.tokens.empty()) copy_rows(all.input.tokens, out.input.tokens);
  if (all.targets.defined()) out.targets = copy_tensor(all.targets);
  if (!all.labels.empty()) copy_rows(all.labels, out.labels);
  if (!all.mask.empty()) copy_rows(all.mask, out.mask);
  return out;
}

namespace {

std::vector<tasks::TaskBatch> chunk(const tasks::TaskBatch& all, std::size_t batch_size) {
  std::vector<tasks::TaskBatch> out;
  const std::size_t n = all.batch_size();
  const std::size_t bs = std::max<std::size_t>(batch_size, 1);
  for (std::size_t start = 0; start < n; start += bs) {
    std::vector<std::size_t> idx(std::min(bs, n - start));
    std::iota(idx.begin(), idx.end(), start);
    out.push_back(gather(all, idx));
  }
  return out;
}

class SyntheticData final : public TaskData {
 public:
  explicit SyntheticData(const ExperimentConfig& cfg) {
    kind_ = cfg.task.kind;
    io_ = model_io(cfg);
    baseline_ = tasks::baseline_loss(kind_, cfg.task.seq_len);
    if (cfg.task.train_size == 0) throw ConfigError("task.train_size must be positive for synthetic tasks");
    const auto gen = kind_ == tasks::TaskKind::kAdding ? &tasks::gen_adding : &tasks::gen_copy_memory;
    train_ = gen(cfg.task.train_size, cfg.task.seq_len, derive_seed(cfg.train.seed, Stream::kData, 0));
    if (cfg.task.test_size > 0) {
      test_ = gen(cfg.task.test_size, cfg.task.seq_len, derive_seed(cfg.train.seed, Stream::kData, 1));
    }
  }

  std::size_t train_examples() const override { return train_.batch_size(); }
  tasks::TaskBatch train_batch(std::span<const std::size_t> indices) const override {
    return gather(train_, indices);
  }
  bool has_split(Split split) const override {
    return split == Split::kTrain || (split == Split::kTest && !test_.empty());
  }
  std::vector<tasks::TaskBatch> eval_batches(Split split, std::size_t batch_size) const override {
    if (split == Split::kTrain) return chunk(train_, batch_size);
    if (split == Split::kTest && !test_.empty()) return chunk(test_, batch_size);
    return {};
  }

 private:
  tasks::TaskBatch train_, test_;
};

class MnistData final : public TaskData {
 public:
  explicit MnistData(const ExperimentConfig& cfg) {
    kind_ = cfg.task.kind;
    io_ = model_io(cfg);
    const fs::path dir = resolve_data_path(cfg.task.data_dir);
    train_ = tasks::load_mnist_idx((dir / "train-images-idx3-ubyte").string(),
                                   (dir / "train-labels-idx1-ubyte").string());
    test_ = tasks::load_mnist_idx((dir / "t10k-images-idx3-ubyte").string(),
                                  (dir / "t10k-labels-idx1-ubyte").string());
    truncate(train_, cfg.task.train_size);
    truncate(test_, cfg.task.test_size);
    if (kind_ == tasks::TaskKind::kPermutedMnist) {
      const auto perm = tasks::make_permutation(train_.pixels_per_image(), cfg.task.perm_seed);
      train_ = tasks::permute(train_, perm);
      test_ = tasks::permute(test_, perm);
    }
  }

  std::size_t train_examples() const override { return train_.size(); }
  tasks::TaskBatch train_batch(std::span<const std::size_t> indices) const override {
    return tasks::mnist_batch(train_, indices);
  }
  bool has_split(Split split) const override { return split != Split::kValid; }
  std::vector<tasks::TaskBatch> eval_batches(Split split, std::size_t batch_size) const override {
    const auto& ds = split == Split::kTrain ? train_ : test_;
    if (split == Split::kValid) return {};
    std::vector<tasks::TaskBatch> out;
    const std::size_t bs = std::max<std::size_t>(batch_size, 1);
    for (std::size_t start = 0; start < ds.size(); start += bs) {
      std::vector<std::size_t> idx(std::min(bs, ds.size() - start));
      std::iota(idx.begin(), idx.end(), start);
      out.push_back(tasks::mnist_batch(ds, idx));
    }
    return out;
  }

 private:
  static void truncate(tasks::MnistDataset& ds, std::size_t limit) {
    if (limit == 0 || limit >= ds.size()) return;
    ds.labels.resize(limit);
    ds.pixels.resize(limit * ds.pixels_per_image());
  }

  tasks::MnistDataset train_, test_;
};

class MusicData final : public TaskData {
 public:
  explicit MusicData(const ExperimentConfig& cfg) {
    kind_ = cfg.task.kind;
    io_ = model_io(cfg);
    train_ = load(cfg.task.train_path);
    if (train_.empty()) throw ConfigError("music task: no training sequence with at least two frames");
    if (!cfg.task.valid_path.empty()) valid_ = load(cfg.task.valid_path);
    if (!cfg.task.test_path.empty()) test_ = load(cfg.task.test_path);
  }

  std::size_t train_examples() const override { return train_.size(); }
  std::size_t batch_size_for(std::size_t) const override { return 1; }
  tasks::TaskBatch train_batch(std::span<const std::size_t> indices) const override {
    if (indices.size() != 1) throw ContractError("music batches hold exactly one sequence");
    return tasks::next_frame_batch(train_.at(indices[0]));
  }
  bool has_split(Split split) const override { return !split_data(split).empty(); }
  std::vector<tasks::TaskBatch> eval_batches(Split split, std::size_t) const override {
    std::vector<tasks::TaskBatch> out;
    for (const auto& seq : split_data(split)) out.push_back(tasks::next_frame_batch(seq));
    return out;
  }

 private:
  const std::vector<tasks::PianoRollSequence>& split_data(Split split) const {
    switch (split) {
      case Split::kTrain: return train_;
      case Split::kValid: return valid_;
      case Split::kTest: return test_;
    }
    return train_;
  }

  static std::vector<tasks::PianoRollSequence> load(const std::string& path) {
    auto seqs = tasks::load_pianoroll(resolve_data_path(path));
    std::erase_if(seqs, [](const auto& s) { return s.frames.size() < 2; });
    return seqs;
  }

  std::vector<tasks::PianoRollSequence> train_, valid_, test_;
};

class CharData final : public TaskData {
 public:
  explicit CharData(const ExperimentConfig& cfg) : unroll_(cfg.task.unroll) {
    kind_ = cfg.task.kind;
    corpus_ = tasks::load_char_corpus(resolve_data_path(cfg.task.corpus_path), cfg.task.train_frac,
                                      cfg.task.valid_frac);
    io_ = model_io(cfg, corpus_.vocab_size());
    if (tasks::char_window_count(corpus_.train.size(), unroll_) == 0) {
      throw ConfigError("character task: training split is shorter than one unroll window");
    }
  }

  std::size_t train_examples() const override { return tasks::char_window_count(corpus_.train.size(), unroll_); }
  tasks::TaskBatch train_batch(std::span<const std::size_t> indices) const override {
    return tasks::char_batch(corpus_.train, indices, unroll_);
  }
  bool has_split(Split split) const override {
    return tasks::char_window_count(stream(split).size(), unroll_) > 0;
  }
  std::vector<tasks::TaskBatch> eval_batches(Split split, std::size_t batch_size) const override {
    const auto& s = stream(split);
    const std::size_t n = tasks::char_window_count(s.size(), unroll_);
    const std::size_t bs = std::max<std::size_t>(batch_size, 1);
    std::vector<tasks::TaskBatch> out;
    for (std::size_t start = 0; start < n; start += bs) {
      std::vector<std::size_t> idx(std::min(bs, n - start));
      std::iota(idx.begin(), idx.end(), start);
      out.push_back(tasks::char_batch(s, idx, unroll_));
    }
    return out;
  }

 private:
  const std::vector<std::int32_t>& stream(Split split) const {
    switch (split) {
      case Split::kTrain: return corpus_.train;
      case Split::kValid: return corpus_.valid;
      case Split::kTest: return corpus_.test;
    }
    return corpus_.train;
  }

  std::size_t unroll_;
  tasks::CharCorpus corpus_;
};

}  // namespace

std::unique_ptr<TaskData> load_task_data(const ExperimentConfig& cfg) {
  switch (cfg.task.kind) {
    case tasks::TaskKind::kAdding:
    case tasks::TaskKind::kCopy: return std::make_unique<SyntheticData>(cfg);
    case tasks::TaskKind::kSeqMnist:
    case tasks::TaskKind::kPermutedMnist: return std::make_unique<MnistData>(cfg);
    case tasks::TaskKind::kMusic: return std::make_unique<MusicData>(cfg);
    case tasks::TaskKind::kChar: return std::make_unique<CharData>(cfg);
  }
  throw ConfigError("unsupported task");
}

}  // namespace tcnlab::train
