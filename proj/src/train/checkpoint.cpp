#include "tcnlab/train/checkpoint.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace tcnlab::train {

static_assert(std::endian::native == std::endian::little, "checkpoint buffers are written little-endian");

namespace {

constexpr const char* kMagic = "tcnlab-checkpoint v1";

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string shape_field(const Shape& shape) {
  if (shape.empty()) return "scalar";
  std::string out;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += 'x';
    out += std::to_string(shape[i]);
  }
  return out;
}

Shape parse_shape(const std::string& s, std::size_t offset) {
  if (s == "scalar") return {};
  Shape out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t end = s.find('x', pos);
    if (end == std::string::npos) end = s.size();
    std::size_t v = 0;
    auto res = std::from_chars(s.data() + pos, s.data() + end, v);
    if (res.ec != std::errc() || res.ptr != s.data() + end) throw FormatError("bad shape '" + s + "'", offset);
    out.push_back(v);
    pos = end + 1;
  }
  return out;
}

}  // namespace

std::size_t Checkpoint::param_count() const {
  std::size_t n = 0;
  for (const auto& e : entries)
    if (e.kind == "param") n += e.data.size();
  return n;
}

std::string serialize_checkpoint(const Checkpoint& ck) {
  std::ostringstream h;
  h << kMagic << '\n';
  h << "config_hash " << ck.config_hash << '\n';
  h << "step " << ck.state.step << '\n';
  h << "epoch " << ck.state.epoch << '\n';
  h << "lr " << fmt(ck.state.lr) << '\n';
  h << "scheduler " << (ck.state.sched_has_best ? 1 : 0) << ' ' << fmt(ck.state.sched_best) << ' '
    << ck.state.sched_bad << ' ' << ck.state.sched_reductions << '\n';
  h << "optimizer " << ck.optimizer << ' ' << ck.optimizer_steps << '\n';
  h << "tensors " << ck.entries.size() << '\n';
  for (const auto& e : ck.entries) h << e.kind << ' ' << e.name << " f32 " << shape_field(e.shape) << '\n';
  h << "end\n";
  std::string out = h.str();
  for (const auto& e : ck.entries) {
    const auto* bytes = reinterpret_cast<const char*>(e.data.data());
    out.append(bytes, e.data.size() * sizeof(float));
  }
  return out;
}

Checkpoint parse_checkpoint(const std::string& bytes) {
  Checkpoint ck;
  std::size_t pos = 0;
  auto next_line = [&]() {
    const std::size_t eol = bytes.find('\n', pos);
    if (eol == std::string::npos) throw FormatError("checkpoint header is truncated", pos);
    std::string line = bytes.substr(pos, eol - pos);
    pos = eol + 1;
    return line;
  };
  auto expect = [&](const std::string& key) {
    const std::size_t at = pos;
    std::istringstream in(next_line());
    std::string k;
    in >> k;
    if (k != key) throw FormatError("checkpoint header: expected '" + key + "', found '" + k + "'", at);
    return std::pair<std::istringstream, std::size_t>(std::move(in), at);
  };
  if (next_line() != kMagic) throw FormatError("not a tcnlab checkpoint", 0);
  {
    auto [in, at] = expect("config_hash");
    in >> ck.config_hash;
  }
  {
    auto [in, at] = expect("step");
    in >> ck.state.step;
  }
  {
    auto [in, at] = expect("epoch");
    in >> ck.state.epoch;
  }
  {
    auto [in, at] = expect("lr");
    std::string v;
    in >> v;
    std::from_chars(v.data(), v.data() + v.size(), ck.state.lr);
  }
  {
    auto [in, at] = expect("scheduler");
    int has = 0;
    std::string best;
    in >> has >> best >> ck.state.sched_bad >> ck.state.sched_reductions;
    ck.state.sched_has_best = has != 0;
    std::from_chars(best.data(), best.data() + best.size(), ck.state.sched_best);
    if (!in) throw FormatError("checkpoint header: bad scheduler line", at);
  }
  {
    auto [in, at] = expect("optimizer");
    in >> ck.optimizer >> ck.optimizer_steps;
    if (!in) throw FormatError("checkpoint header: bad optimizer line", at);
  }
  std::size_t count = 0;
  {
    auto [in, at] = expect("tensors");
    in >> count;
    if (!in) throw FormatError("checkpoint header: bad tensor count", at);
  }
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t at = pos;
    std::istringstream in(next_line());
    CheckpointEntry e;
    std::string dtype, shape;
    in >> e.kind >> e.name >> dtype >> shape;
    if (!in || (e.kind != "param" && e.kind != "state")) throw FormatError("checkpoint header: bad tensor line", at);
    if (dtype != "f32") throw FormatError("checkpoint header: unsupported dtype '" + dtype + "'", at);
    e.shape = parse_shape(shape, at);
    ck.entries.push_back(std::move(e));
  }
  if (next_line() != "end") throw FormatError("checkpoint header: missing 'end'", pos);

  for (auto& e : ck.entries) {
    const std::size_t n = shape_numel(e.shape);
    if (pos + n * sizeof(float) > bytes.size()) {
      throw FormatError("checkpoint data for '" + e.name + "' is truncated", bytes.size());
    }
    e.data.resize(n);
    std::memcpy(e.data.data(), bytes.data() + pos, n * sizeof(float));
    pos += n * sizeof(float);
  }
  if (pos != bytes.size()) throw FormatError("trailing bytes after checkpoint data", pos);
  return ck;
}

void write_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint '" + path + "'");
  const std::string bytes = serialize_checkpoint(ck);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing checkpoint '" + path + "'");
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_checkpoint(ss.str());
}

Checkpoint make_checkpoint(const nn::ParamStore<float>& params, const Optimizer<float>& opt,
                           const std::string& config_hash, const TrainerState& state) {
  Checkpoint ck;
  ck.config_hash = config_hash;
  ck.state = state;
  ck.optimizer = to_string(opt.config().kind);
  ck.optimizer_steps = opt.steps();
  for (const auto& p : params) {
    auto d = p.tensor.data();
    ck.entries.push_back({"param", p.name, p.tensor.shape(), std::vector<float>(d.begin(), d.end())});
  }
  std::size_t per = params.size() ? opt.buffers().size() / params.size() : 0;
  for (std::size_t i = 0; i < opt.buffers().size(); ++i) {
    const auto& b = opt.buffers()[i];
    ck.entries.push_back({"state", b.name, params[i / per].tensor.shape(), b.data});
  }
  return ck;
}

TrainerState restore_checkpoint(const Checkpoint& ck, nn::ParamStore<float>& params, Optimizer<float>& opt,
                                const std::string& expected_hash) {
  const Checkpoint live = make_checkpoint(params, opt, expected_hash, {});
  std::vector<std::string> diffs;
  if (ck.config_hash != expected_hash) {
    diffs.push_back("config hash: checkpoint " + ck.config_hash + ", run " + expected_hash);
  }
  if (ck.optimizer != live.optimizer) {
    diffs.push_back("optimizer: checkpoint " + ck.optimizer + ", run " + live.optimizer);
  }
  const std::size_t n = std::max(ck.entries.size(), live.entries.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= ck.entries.size()) {
      diffs.push_back("missing in checkpoint: " + live.entries[i].name + " " + shape_str(live.entries[i].shape));
      continue;
    }
    if (i >= live.entries.size()) {
      diffs.push_back("unexpected in checkpoint: " + ck.entries[i].name + " " + shape_str(ck.entries[i].shape));
      continue;
    }
    const auto& a = ck.entries[i];
    const auto& b = live.entries[i];
    if (a.name != b.name || a.kind != b.kind) {
      diffs.push_back("entry " + std::to_string(i) + ": checkpoint " + a.kind + " " + a.name + ", run " + b.kind +
                      " " + b.name);
    } else if (a.shape != b.shape) {
      diffs.push_back(a.name + ": checkpoint shape " + shape_str(a.shape) + ", run " + shape_str(b.shape));
    }
  }
  if (!diffs.empty()) {
    std::string report = "checkpoint does not match this run:";
    for (const auto& d : diffs) report += "\n  " + d;
    throw CheckpointMismatch(report);
  }

  std::size_t k = 0;
  for (auto& p : params) {
    const auto& src = ck.entries[k++].data;
    std::copy(src.begin(), src.end(), p.tensor.data().begin());
  }
  for (auto& b : opt.buffers()) b.data = ck.entries[k++].data;
  opt.set_steps(ck.optimizer_steps);
  opt.set_lr(ck.state.lr);
  return ck.state;
}

void checkpoint_save(const std::string& path, const nn::ParamStore<float>& params, const Optimizer<float>& opt,
                     const std::string& config_hash, const TrainerState& state) {
  write_checkpoint(path, make_checkpoint(params, opt, config_hash, state));
}

TrainerState checkpoint_load(const std::string& path, nn::ParamStore<float>& params, Optimizer<float>& opt,
                             const std::string& expected_hash) {
  return restore_checkpoint(read_checkpoint(path), params, opt, expected_hash);
}

}  // namespace tcnlab::train
