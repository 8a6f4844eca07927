#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "tcnlab/tasks/tasks.hpp"
#include "test_util.hpp"

namespace tcnlab::tasks {
namespace {

TEST(Adding, ShapesAndTargetIsMarkedSum) {
  const auto batch = gen_adding(200, 30, 7);
  ASSERT_EQ(batch.input.values.shape(), (Shape{200, 2, 30}));
  ASSERT_EQ(batch.targets.shape(), (Shape{200, 1}));
  for (std::size_t n = 0; n < 200; ++n) {
    const float* row = batch.input.values.ptr() + n * 60;
    double dot = 0;
    int marks = 0;
    for (std::size_t t = 0; t < 30; ++t) {
      dot += double(row[t]) * double(row[30 + t]);
      marks += row[30 + t] == 1.0f;
      EXPECT_TRUE(row[30 + t] == 0.0f || row[30 + t] == 1.0f);
      EXPECT_GE(row[t], 0.0f);
      EXPECT_LT(row[t], 1.0f);
    }
    EXPECT_EQ(marks, 2);
    EXPECT_NEAR(batch.targets.data()[n], dot, 1e-6);
  }
}

TEST(Adding, SameSeedSameBatch) {
  const auto a = gen_adding(50, 20, 3), b = gen_adding(50, 20, 3), c = gen_adding(50, 20, 4);
  EXPECT_TRUE(std::equal(a.input.values.data().begin(), a.input.values.data().end(), b.input.values.data().begin()));
  EXPECT_FALSE(std::equal(a.input.values.data().begin(), a.input.values.data().end(), c.input.values.data().begin()));
}

TEST(Copy, StructureOfInputsAndLabels) {
  const std::size_t T = 25;
  const auto batch = gen_copy_memory(40, T, 9);
  ASSERT_EQ(batch.length(), T + 20);
  for (std::size_t n = 0; n < 40; ++n) {
    const auto* in = batch.input.tokens.data() + n * (T + 20);
    const auto* lab = batch.labels.data() + n * (T + 20);
    const auto* mask = batch.mask.data() + n * (T + 20);
    for (std::size_t t = 0; t < 10; ++t) {
      EXPECT_GE(in[t], 1);
      EXPECT_LE(in[t], 8);
    }
    for (std::size_t t = 10; t <= T + 8; ++t) EXPECT_EQ(in[t], 0);
    for (std::size_t t = T + 9; t <= T + 19; ++t) EXPECT_EQ(in[t], 9);
    for (std::size_t t = 0; t < T + 10; ++t) {
      EXPECT_EQ(lab[t], 0);
      EXPECT_EQ(mask[t], 0.0f);
    }
    for (std::size_t i = 0; i < 10; ++i) {
      EXPECT_EQ(lab[T + 10 + i], in[i]);
      EXPECT_EQ(mask[T + 10 + i], 1.0f);
    }
  }
}

TEST(Copy, SameSeedSameBatch) {
  EXPECT_EQ(gen_copy_memory(10, 30, 5).input.tokens, gen_copy_memory(10, 30, 5).input.tokens);
}

TEST(Baselines, AnalyticValues) {
  EXPECT_NEAR(*baseline_loss(TaskKind::kAdding, 200), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(*baseline_loss(TaskKind::kCopy, 1000), 0.02039, 5e-6);
  EXPECT_NEAR(*baseline_loss(TaskKind::kCopy, 500), 0.03999, 5e-6);
  EXPECT_FALSE(baseline_loss(TaskKind::kSeqMnist, 0).has_value());
}

TEST(Mnist, IdxRoundTrip) {
  test::TempDir dir;
  MnistDataset ds;
  ds.rows = 2;
  ds.cols = 3;
  ds.pixels = {0, 1, 2, 3, 4, 255, 9, 8, 7, 6, 5, 4};
  ds.labels = {3, 9};
  write_mnist_idx(ds, dir.file("img"), dir.file("lab"));
  const auto back = load_mnist_idx(dir.file("img"), dir.file("lab"));
  EXPECT_EQ(back.rows, 2u);
  EXPECT_EQ(back.cols, 3u);
  EXPECT_EQ(back.pixels, ds.pixels);
  EXPECT_EQ(back.labels, ds.labels);
}

TEST(Mnist, IdxHeaderIsBigEndianMagic) {
  test::TempDir dir;
  MnistDataset ds;
  ds.rows = ds.cols = 1;
  ds.pixels = {7};
  ds.labels = {1};
  write_mnist_idx(ds, dir.file("img"), dir.file("lab"));
  const std::string img = test::read_file(dir.file("img")), lab = test::read_file(dir.file("lab"));
  EXPECT_EQ(img.substr(0, 4), std::string("\x00\x00\x08\x03", 4));
  EXPECT_EQ(lab.substr(0, 4), std::string("\x00\x00\x08\x01", 4));
}

TEST(Mnist, BadMagicAndTruncationReportOffsets) {
  test::TempDir dir;
  MnistDataset ds;
  ds.rows = ds.cols = 2;
  ds.pixels = {1, 2, 3, 4};
  ds.labels = {5};
  write_mnist_idx(ds, dir.file("img"), dir.file("lab"));
  std::string img = test::read_file(dir.file("img"));
  test::write_file(dir.file("bad"), "\x00\x00\x08\x04" + img.substr(4));
  try {
    load_mnist_idx(dir.file("bad"), dir.file("lab"));
    FAIL() << "bad magic accepted";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
  test::write_file(dir.file("short"), img.substr(0, img.size() - 1));
  EXPECT_THROW(load_mnist_idx(dir.file("short"), dir.file("lab")), FormatError);
  EXPECT_THROW(load_mnist_idx(dir.file("lab"), dir.file("img")), FormatError);
}

TEST(Mnist, IdentityPermutationEqualsSequentialize) {
  MnistDataset ds;
  ds.rows = ds.cols = 2;
  ds.pixels = {0, 51, 102, 255};
  ds.labels = {1};
  const std::vector<std::size_t> id{0, 1, 2, 3};
  const auto a = sequentialize(ds, 0), b = sequentialize(permute(ds, id), 0);
  EXPECT_TRUE(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
  EXPECT_FLOAT_EQ(a.data()[3], 1.0f);
  EXPECT_FLOAT_EQ(a.data()[1], 0.2f);
}

TEST(Mnist, PermutationIsABijection) {
  const auto perm = make_permutation(784, 17);
  auto sorted = perm;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) EXPECT_EQ(sorted[i], i);
  MnistDataset ds;
  for (std::size_t i = 0; i < 784; ++i) ds.pixels.push_back(static_cast<std::uint8_t>(i % 251));
  ds.labels = {0};
  const auto p = permute(ds, perm);
  std::vector<std::uint8_t> restored(784);
  for (std::size_t j = 0; j < 784; ++j) restored[perm[j]] = p.pixels[j];
  EXPECT_EQ(restored, ds.pixels);
  const std::vector<std::size_t> dup{0, 0, 1, 2};
  MnistDataset small;
  small.rows = small.cols = 2;
  small.pixels = {1, 2, 3, 4};
  small.labels = {0};
  EXPECT_THROW(permute(small, dup), DomainError);
}

TEST(Mnist, BatchShapeAndScale) {
  MnistDataset ds;
  ds.rows = ds.cols = 2;
  ds.pixels = {0, 255, 255, 0, 10, 20, 30, 40};
  ds.labels = {4, 7};
  const std::vector<std::size_t> idx{1, 0};
  const auto b = mnist_batch(ds, idx);
  EXPECT_EQ(b.input.values.shape(), (Shape{2, 1, 4}));
  EXPECT_EQ(b.labels, (std::vector<std::int32_t>{7, 4}));
  EXPECT_FLOAT_EQ(b.input.values.data()[5], 1.0f);
}

TEST(PianoRoll, RoundTripIsIdentity) {
  PianoRollSequence a, b;
  a.frames.resize(3);
  a.frames[0].set(0);
  a.frames[0].set(87);
  a.frames[2].set(40);
  b.frames.resize(1);
  b.frames[0].set(12);
  const std::vector<PianoRollSequence> seqs{a, b};
  const auto back = parse_pianoroll(format_pianoroll(seqs));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].frames, a.frames);
  EXPECT_EQ(back[1].frames, b.frames);
  test::TempDir dir;
  write_pianoroll(dir.file("x.roll"), seqs);
  EXPECT_EQ(load_pianoroll(dir.file("x.roll"))[0].frames, a.frames);
}

TEST(PianoRoll, CommentsEmptyFramesAndErrors) {
  const auto seqs = parse_pianoroll("# header\n1 2\n-\n3 # inline\n\n5\n");
  ASSERT_EQ(seqs.size(), 2u);
  EXPECT_EQ(seqs[0].frames.size(), 3u);
  EXPECT_TRUE(seqs[0].frames[1].none());
  EXPECT_TRUE(seqs[0].frames[2].test(3));
  EXPECT_THROW(parse_pianoroll("1 88\n"), FormatError);
  EXPECT_THROW(parse_pianoroll("x\n"), FormatError);
}

TEST(PianoRoll, NextFrameBatch) {
  PianoRollSequence one;
  one.frames.resize(1);
  EXPECT_TRUE(next_frame_batch(one).empty());
  PianoRollSequence seq;
  seq.frames.resize(3);
  seq.frames[1].set(5);
  const auto b = next_frame_batch(seq);
  EXPECT_EQ(b.input.values.shape(), (Shape{1, 88, 2}));
  EXPECT_EQ(b.targets.data()[5 * 2 + 0], 1.0f);
  EXPECT_EQ(b.input.values.data()[5 * 2 + 1], 1.0f);
}

TEST(CharCorpus, VocabularyOfAab) {
  const std::string text = "aab";
  const auto c = build_char_corpus(
      std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()), 1.0, 0.0);
  EXPECT_EQ(c.symbols.size(), 2u);
  EXPECT_EQ(c.vocab_size(), 3u);
}

TEST(CharCorpus, SplitsAreContiguousAndUnseenMapsToUnk) {
  std::string text = "abcabcabcabcabcabcabxyz";
  const auto c = build_char_corpus(
      std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()), 0.8, 0.1);
  EXPECT_EQ(c.train.size() + c.valid.size() + c.test.size(), text.size());
  std::vector<std::int32_t> all = c.train;
  all.insert(all.end(), c.valid.begin(), c.valid.end());
  all.insert(all.end(), c.test.begin(), c.test.end());
  for (std::size_t i = 0; i < text.size(); ++i) EXPECT_EQ(all[i], c.to_id[static_cast<std::uint8_t>(text[i])]);
  EXPECT_EQ(c.test.back(), c.unk_id);
  EXPECT_THROW(build_char_corpus({}, 0.8, 0.1), DomainError);
}

TEST(CharCorpus, WindowsShiftLabelsByOne) {
  const std::vector<std::int32_t> stream{0, 1, 2, 3, 4, 5, 6};
  EXPECT_EQ(char_window_count(stream.size(), 3), 2u);
  const std::vector<std::size_t> w{1};
  const auto b = char_batch(stream, w, 3);
  EXPECT_EQ(b.input.tokens, (std::vector<std::int32_t>{3, 4, 5}));
  EXPECT_EQ(b.labels, (std::vector<std::int32_t>{4, 5, 6}));
}

TEST(CharCorpus, BundledCorpusIsAboutAMegabyte) {
  const auto c = load_char_corpus(test::source_path("data/shakespeare.txt"), 0.9, 0.05);
  const std::size_t total = c.train.size() + c.valid.size() + c.test.size();
  EXPECT_GT(total, 900000u);
  EXPECT_LT(total, 1200000u);
  EXPECT_GT(c.vocab_size(), 30u);
}

}  // namespace
}  // namespace tcnlab::tasks
