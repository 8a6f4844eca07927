#include <algorithm>
#include <fstream>
#include <iterator>

#include "tcnlab/tasks/tasks.hpp"

namespace tcnlab::tasks {

CharCorpus build_char_corpus(std::span<const std::uint8_t> bytes, double train_frac, double valid_frac) {
  if (bytes.empty()) throw DomainError("character corpus is empty");
  if (!(train_frac > 0 && valid_frac >= 0 && train_frac + valid_frac <= 1)) {
    throw DomainError("corpus split fractions must satisfy 0 < train, 0 <= valid, train + valid <= 1");
  }
  const std::size_t n = bytes.size();
  const auto n_train = static_cast<std::size_t>(static_cast<double>(n) * train_frac);
  const auto n_valid = static_cast<std::size_t>(static_cast<double>(n) * valid_frac);
  if (n_train < 2) throw DomainError("training split must hold at least two characters");

  CharCorpus c;
  std::array<bool, 256> seen{};
  for (std::size_t i = 0; i < n_train; ++i) seen[bytes[i]] = true;
  for (int b = 0; b < 256; ++b) {
    if (seen[b]) c.symbols.push_back(static_cast<std::uint8_t>(b));
  }
  c.unk_id = static_cast<std::int32_t>(c.symbols.size());
  c.to_id.fill(c.unk_id);
  for (std::size_t i = 0; i < c.symbols.size(); ++i) c.to_id[c.symbols[i]] = static_cast<std::int32_t>(i);

  auto encode = [&](std::size_t from, std::size_t to, std::vector<std::int32_t>& dst) {
    dst.reserve(to - from);
    for (std::size_t i = from; i < to; ++i) dst.push_back(c.to_id[bytes[i]]);
  };
  encode(0, n_train, c.train);
  encode(n_train, n_train + n_valid, c.valid);
  encode(n_train + n_valid, n, c.test);
  return c;
}

CharCorpus load_char_corpus(const std::string& path, double train_frac, double valid_frac) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return build_char_corpus(bytes, train_frac, valid_frac);
}

std::size_t char_window_count(std::size_t stream_len, std::size_t unroll) {
  if (unroll == 0) throw DomainError("unroll length must be positive");
  if (stream_len < 2) return 0;
  return (stream_len - 1) / unroll;
}

TaskBatch char_batch(std::span<const std::int32_t> stream, std::span<const std::size_t> windows,
                     std::size_t unroll) {
  const std::size_t count = char_window_count(stream.size(), unroll);
  TaskBatch batch;
  batch.loss_kind = LossKind::kCePerToken;
  batch.input.batch = windows.size();
  batch.input.length = unroll;
  batch.input.tokens.resize(windows.size() * unroll);
  batch.labels.resize(windows.size() * unroll);
  for (std::size_t b = 0; b < windows.size(); ++b) {
    if (windows[b] >= count) throw DomainError("character window index out of range");
    const std::size_t start = windows[b] * unroll;
    std::copy_n(stream.begin() + static_cast<std::ptrdiff_t>(start), unroll,
                batch.input.tokens.begin() + static_cast<std::ptrdiff_t>(b * unroll));
    std::copy_n(stream.begin() + static_cast<std::ptrdiff_t>(start + 1), unroll,
                batch.labels.begin() + static_cast<std::ptrdiff_t>(b * unroll));
  }
  return batch;
}

}  // namespace tcnlab::tasks
