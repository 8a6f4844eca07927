#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tcnlab/nn/model.hpp"

namespace tcnlab::tasks {

enum class TaskKind { kAdding, kCopy, kSeqMnist, kPermutedMnist, kMusic, kChar };
enum class LossKind { kMseLastStep, kCeLastStep, kCePerStep, kBernoulliPerStep, kCePerToken };
enum class MetricKind { kMse, kAccuracy, kPayloadAccuracy, kNll, kBpc };

TaskKind parse_task_kind(const std::string& s);
std::string to_string(TaskKind kind);
std::string to_string(MetricKind kind);
MetricKind metric_for(TaskKind kind);
LossKind loss_for(TaskKind kind);

/// A batch of (input sequence, target) pairs.
struct TaskBatch {
  LossKind loss_kind = LossKind::kMseLastStep;
  nn::SequenceInput input;
  Tensor<float> targets;             // real-valued targets (adding: [B, 1], music: [B, 88, T])
  std::vector<std::int32_t> labels;  // class labels: [B] or [B, T] row-major
  std::vector<float> mask;           // optional [B, T] weights selecting scored positions

  std::size_t batch_size() const { return input.batch; }
  std::size_t length() const { return input.length; }
  bool empty() const { return input.batch == 0 || input.length == 0; }
};

// ---------------------------------------------------------------------------
// Synthetic stress tests

inline constexpr std::size_t kCopyPayload = 10;
inline constexpr std::size_t kCopyClasses = 10;

/// Adding problem: inputs [n, 2, T]; row 0 ~ U[0, 1], row 1 marks two distinct
/// positions with 1; target [n, 1] is the sum of the two marked values.
TaskBatch gen_adding(std::size_t n_samples, std::size_t seq_len, std::uint64_t seed);

/// Copy memory: tokens of length T + 20: ten digits from {1..8}, T - 1 zeros,
/// then eleven 9s (the first is the delimiter). Labels are zero except the
/// final ten positions, which repeat the payload. The mask marks those ten.
TaskBatch gen_copy_memory(std::size_t n_samples, std::size_t seq_len, std::uint64_t seed);

/// Loss of the best predictor that ignores the informative inputs:
/// adding -> 1/6 (Var(U + U)), copy -> 10 ln 8 / (T + 20). Empty otherwise.
std::optional<double> baseline_loss(TaskKind task, std::size_t seq_len);

// ---------------------------------------------------------------------------
// MNIST (IDX files)

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

struct MnistDataset {
  std::size_t rows = 28;
  std::size_t cols = 28;
  std::vector<std::uint8_t> pixels;  // [N, rows * cols]
  std::vector<std::uint8_t> labels;  // [N]

  std::size_t size() const { return labels.size(); }
  std::size_t pixels_per_image() const { return rows * cols; }
};

/// Throws FormatError (with byte offset) on bad magic, truncation or a label
/// count that disagrees with the image count.
MnistDataset load_mnist_idx(const std::string& images_path, const std::string& labels_path);
void write_mnist_idx(const MnistDataset& ds, const std::string& images_path, const std::string& labels_path);

/// Image `index` as a [1, rows*cols] sequence scaled to [0, 1].
Tensor<float> sequentialize(const MnistDataset& ds, std::size_t index);

/// Uniform random permutation of [0, n) drawn from `seed`.
std::vector<std::size_t> make_permutation(std::size_t n, std::uint64_t seed);

/// Applies pixel order `perm` (output pixel j = input pixel perm[j]) to every image.
MnistDataset permute(const MnistDataset& ds, std::span<const std::size_t> perm);
MnistDataset permute(const MnistDataset& ds, std::uint64_t perm_seed);

/// Images `indices` as inputs [B, 1, rows*cols] with ce_last_step labels.
TaskBatch mnist_batch(const MnistDataset& ds, std::span<const std::size_t> indices);

// ---------------------------------------------------------------------------
// Polyphonic music (piano rolls)

inline constexpr std::size_t kPianoKeys = 88;  // key 0 is MIDI note 21

struct PianoRollSequence {
  std::vector<std::bitset<kPianoKeys>> frames;
};

/// Text format: one frame per line as space-separated active key indices
/// (0..87), "-" for a frame with no keys down; a blank line ends a sequence;
/// '#' starts a comment.
std::vector<PianoRollSequence> parse_pianoroll(const std::string& text);
std::vector<PianoRollSequence> load_pianoroll(const std::string& path);
std::string format_pianoroll(std::span<const PianoRollSequence> seqs);
void write_pianoroll(const std::string& path, std::span<const PianoRollSequence> seqs);

/// Next-frame prediction batch: inputs frames 0..L-2, targets frames 1..L-1,
/// both [1, 88, L-1]. Empty for sequences shorter than two frames.
TaskBatch next_frame_batch(const PianoRollSequence& seq);

// ---------------------------------------------------------------------------
// Character-level corpora

struct CharCorpus {
  std::vector<std::uint8_t> symbols;    // id -> byte, sorted
  std::array<std::int32_t, 256> to_id;  // byte -> id (unk_id when unseen in train)
  std::int32_t unk_id = 0;
  std::vector<std::int32_t> train, valid, test;

  /// Output classes: every training symbol plus UNK.
  std::size_t vocab_size() const { return symbols.size() + 1; }
};

/// Splits raw bytes contiguously into train/valid/test (test takes the rest),
/// builds the vocabulary from the train split only. Throws DomainError for an
/// empty corpus or bad fractions.
CharCorpus build_char_corpus(std::span<const std::uint8_t> bytes, double train_frac, double valid_frac);
CharCorpus load_char_corpus(const std::string& path, double train_frac, double valid_frac);

/// Number of non-overlapping windows of `unroll` inputs (plus one shifted
/// target) in a token stream.
std::size_t char_window_count(std::size_t stream_len, std::size_t unroll);

/// Windows `windows` of a stream as tokens [B, unroll] with next-token labels.
TaskBatch char_batch(std::span<const std::int32_t> stream, std::span<const std::size_t> windows,
                     std::size_t unroll);

inline double bits_per_char(double nll) { return nll / 0.69314718055994530942; }

}  // namespace tcnlab::tasks
