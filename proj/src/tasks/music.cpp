#include <fstream>
#include <sstream>

#include "tcnlab/tasks/tasks.hpp"

namespace tcnlab::tasks {

std::vector<PianoRollSequence> parse_pianoroll(const std::string& text) {
  std::vector<PianoRollSequence> out;
  PianoRollSequence cur;
  std::size_t pos = 0;
  auto flush = [&] {
    if (!cur.frames.empty()) out.push_back(std::move(cur));
    cur = {};
  };
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string line = text.substr(pos, eol - pos);
    const std::size_t line_start = pos;
    pos = eol + 1;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      if (line.find_first_not_of(" \t\r") == hash) {
        if (eol == text.size()) break;
        continue;
      }
      line.resize(hash);
    }
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      flush();
      if (eol == text.size()) break;
      continue;
    }
    std::bitset<kPianoKeys> frame;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
      if (i >= line.size()) break;
      const std::size_t tok_start = i;
      while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
      const std::string tok = line.substr(tok_start, i - tok_start);
      if (tok == "-") continue;
      std::size_t key = 0;
      bool ok = !tok.empty() && tok.size() <= 3;
      for (char c : tok) {
        if (c < '0' || c > '9') {
          ok = false;
          break;
        }
        key = key * 10 + static_cast<std::size_t>(c - '0');
      }
      if (!ok || key >= kPianoKeys) {
        throw FormatError("piano roll: bad key '" + tok + "' (expected 0..87 or '-')", line_start + tok_start);
      }
      frame.set(key);
    }
    cur.frames.push_back(frame);
    if (eol == text.size()) break;
  }
  flush();
  return out;
}

std::vector<PianoRollSequence> load_pianoroll(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_pianoroll(ss.str());
}

std::string format_pianoroll(std::span<const PianoRollSequence> seqs) {
  std::ostringstream out;
  for (std::size_t s = 0; s < seqs.size(); ++s) {
    if (s > 0) out << '\n';
    for (const auto& frame : seqs[s].frames) {
      if (frame.none()) {
        out << "-\n";
        continue;
      }
      bool first = true;
      for (std::size_t k = 0; k < kPianoKeys; ++k) {
        if (!frame.test(k)) continue;
        if (!first) out << ' ';
        out << k;
        first = false;
      }
      out << '\n';
    }
  }
  return out.str();
}

void write_pianoroll(const std::string& path, std::span<const PianoRollSequence> seqs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << format_pianoroll(seqs);
}

TaskBatch next_frame_batch(const PianoRollSequence& seq) {
  TaskBatch batch;
  batch.loss_kind = LossKind::kBernoulliPerStep;
  if (seq.frames.size() < 2) return batch;
  const std::size_t len = seq.frames.size() - 1;
  batch.input.batch = 1;
  batch.input.length = len;
  batch.input.values = Tensor<float>({1, kPianoKeys, len});
  batch.targets = Tensor<float>({1, kPianoKeys, len});
  float* x = batch.input.values.ptr();
  float* y = batch.targets.ptr();
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t k = 0; k < kPianoKeys; ++k) {
      x[k * len + t] = seq.frames[t].test(k) ? 1.0f : 0.0f;
      y[k * len + t] = seq.frames[t + 1].test(k) ? 1.0f : 0.0f;
    }
  }
  return batch;
}

}  // namespace tcnlab::tasks
