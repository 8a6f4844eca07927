#include <algorithm>
#include <fstream>
#include <iterator>
#include <numeric>

#include "tcnlab/tasks/tasks.hpp"

namespace tcnlab::tasks {

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& buf, std::size_t offset, const std::string& path) {
  if (offset + 4 > buf.size()) throw FormatError(path + ": truncated IDX header", buf.size());
  return (std::uint32_t(buf[offset]) << 24) | (std::uint32_t(buf[offset + 1]) << 16) |
         (std::uint32_t(buf[offset + 2]) << 8) | std::uint32_t(buf[offset + 3]);
}

void put_be32(std::vector<std::uint8_t>& buf, std::uint32_t v) {
  buf.push_back(static_cast<std::uint8_t>(v >> 24));
  buf.push_back(static_cast<std::uint8_t>(v >> 16));
  buf.push_back(static_cast<std::uint8_t>(v >> 8));
  buf.push_back(static_cast<std::uint8_t>(v));
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& buf) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

}  // namespace

MnistDataset load_mnist_idx(const std::string& images_path, const std::string& labels_path) {
  const auto img = read_file(images_path);
  const auto lab = read_file(labels_path);

  if (const auto magic = read_be32(img, 0, images_path); magic != kIdxImagesMagic) {
    throw FormatError(images_path + ": bad IDX image magic " + std::to_string(magic), 0);
  }
  const std::size_t count = read_be32(img, 4, images_path);
  MnistDataset ds;
  ds.rows = read_be32(img, 8, images_path);
  ds.cols = read_be32(img, 12, images_path);
  const std::size_t need = 16 + count * ds.rows * ds.cols;
  if (img.size() < need) {
    throw FormatError(images_path + ": truncated pixel data, expected " + std::to_string(need) + " bytes",
                      img.size());
  }
  ds.pixels.assign(img.begin() + 16, img.begin() + static_cast<std::ptrdiff_t>(need));

  if (const auto magic = read_be32(lab, 0, labels_path); magic != kIdxLabelsMagic) {
    throw FormatError(labels_path + ": bad IDX label magic " + std::to_string(magic), 0);
  }
  const std::size_t nlabels = read_be32(lab, 4, labels_path);
  if (nlabels != count) {
    throw FormatError(labels_path + ": " + std::to_string(nlabels) + " labels for " + std::to_string(count) +
                          " images",
                      4);
  }
  if (lab.size() < 8 + nlabels) {
    throw FormatError(labels_path + ": truncated label data", lab.size());
  }
  ds.labels.assign(lab.begin() + 8, lab.begin() + 8 + static_cast<std::ptrdiff_t>(nlabels));
  for (std::size_t i = 0; i < ds.labels.size(); ++i) {
    if (ds.labels[i] > 9) throw FormatError(labels_path + ": label outside 0..9", 8 + i);
  }
  return ds;
}

void write_mnist_idx(const MnistDataset& ds, const std::string& images_path, const std::string& labels_path) {
  std::vector<std::uint8_t> img;
  put_be32(img, kIdxImagesMagic);
  put_be32(img, static_cast<std::uint32_t>(ds.size()));
  put_be32(img, static_cast<std::uint32_t>(ds.rows));
  put_be32(img, static_cast<std::uint32_t>(ds.cols));
  img.insert(img.end(), ds.pixels.begin(), ds.pixels.end());
  write_file(images_path, img);

  std::vector<std::uint8_t> lab;
  put_be32(lab, kIdxLabelsMagic);
  put_be32(lab, static_cast<std::uint32_t>(ds.size()));
  lab.insert(lab.end(), ds.labels.begin(), ds.labels.end());
  write_file(labels_path, lab);
}

Tensor<float> sequentialize(const MnistDataset& ds, std::size_t index) {
  if (index >= ds.size()) throw DomainError("image index out of range");
  const std::size_t n = ds.pixels_per_image();
  Tensor<float> out({1, n});
  const std::uint8_t* src = ds.pixels.data() + index * n;
  for (std::size_t i = 0; i < n; ++i) out.ptr()[i] = static_cast<float>(src[i]) / 255.0f;
  return out;
}

std::vector<std::size_t> make_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

MnistDataset permute(const MnistDataset& ds, std::span<const std::size_t> perm) {
  const std::size_t n = ds.pixels_per_image();
  if (perm.size() != n) throw DomainError("permutation length does not match the image size");
  std::vector<bool> seen(n, false);
  for (auto p : perm) {
    if (p >= n || seen[p]) throw DomainError("pixel order is not a permutation");
    seen[p] = true;
  }
  MnistDataset out = ds;
  for (std::size_t img = 0; img < ds.size(); ++img) {
    const std::uint8_t* src = ds.pixels.data() + img * n;
    std::uint8_t* dst = out.pixels.data() + img * n;
    for (std::size_t j = 0; j < n; ++j) dst[j] = src[perm[j]];
  }
  return out;
}

MnistDataset permute(const MnistDataset& ds, std::uint64_t perm_seed) {
  const auto perm = make_permutation(ds.pixels_per_image(), perm_seed);
  return permute(ds, perm);
}

TaskBatch mnist_batch(const MnistDataset& ds, std::span<const std::size_t> indices) {
  const std::size_t n = ds.pixels_per_image();
  TaskBatch batch;
  batch.loss_kind = LossKind::kCeLastStep;
  batch.input.batch = indices.size();
  batch.input.length = n;
  batch.input.values = Tensor<float>({indices.size(), 1, n});
  batch.labels.reserve(indices.size());
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const std::size_t idx = indices[b];
    if (idx >= ds.size()) throw DomainError("image index out of range");
    const std::uint8_t* src = ds.pixels.data() + idx * n;
    float* dst = batch.input.values.ptr() + b * n;
    for (std::size_t i = 0; i < n; ++i) dst[i] = static_cast<float>(src[i]) / 255.0f;
    batch.labels.push_back(ds.labels[idx]);
  }
  return batch;
}

}  // namespace tcnlab::tasks
