#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <sstream>

#include "tcnlab/train/config.hpp"
#include "tcnlab/verify.hpp"

namespace tcnlab::verify {

namespace {

CheckResult within(const std::string& name, double estimate, double expected, double rel_tol) {
  const double rel = std::abs(estimate - expected) / std::abs(expected);
  std::ostringstream d;
  d.precision(6);
  d << "estimate=" << estimate << " analytic=" << expected << " rel_diff=" << rel;
  return {name, rel <= rel_tol, d.str()};
}

}  // namespace

std::vector<CheckResult> baselines_suite() {
  std::vector<CheckResult> out;

  // Adding: constant prediction 1.0 over 10^6 samples.
  {
    constexpr std::size_t kChunks = 10, kPerChunk = 100000, kLen = 20;
    double sq = 0;
    for (std::size_t c = 0; c < kChunks; ++c) {
      const auto batch = tasks::gen_adding(kPerChunk, kLen, derive_seed(31, Stream::kVerify, c));
      for (float y : batch.targets.data()) sq += (double(y) - 1.0) * (double(y) - 1.0);
    }
    const double est = sq / double(kChunks * kPerChunk);
    out.push_back(within("adding: predict 1.0 -> mse", est, *tasks::baseline_loss(tasks::TaskKind::kAdding, kLen),
                         0.01));
  }

  // Adding: marker pairs are uniform over all unordered pairs of positions.
  {
    constexpr std::size_t kLen = 10, kSamples = 100000;
    const auto batch = tasks::gen_adding(kSamples, kLen, derive_seed(32, Stream::kVerify));
    std::vector<double> counts(kLen * kLen, 0.0);
    bool distinct = true;
    for (std::size_t n = 0; n < kSamples; ++n) {
      const float* marks = batch.input.values.ptr() + n * 2 * kLen + kLen;
      std::size_t pos[2], found = 0;
      for (std::size_t t = 0; t < kLen; ++t)
        if (marks[t] == 1.0f && found < 2) pos[found++] = t;
      if (found != 2) {
        distinct = false;
        continue;
      }
      counts[pos[0] * kLen + pos[1]] += 1;
    }
    const double cells = kLen * (kLen - 1) / 2.0;
    const double expected = kSamples / cells;
    double chi2 = 0;
    for (std::size_t a = 0; a < kLen; ++a)
      for (std::size_t b = a + 1; b < kLen; ++b) chi2 += std::pow(counts[a * kLen + b] - expected, 2) / expected;
    boost::math::chi_squared dist(cells - 1);
    const double p = boost::math::cdf(boost::math::complement(dist, chi2));
    std::ostringstream d;
    d << "chi2=" << chi2 << " df=" << cells - 1 << " p=" << p << " two_distinct_markers=" << (distinct ? "yes" : "no");
    out.push_back({"adding: marker pairs uniform (chi-square)", distinct && p > 0.001, d.str()});
  }

  // Copy: memoryless-optimal predictor through the cross-entropy op.
  {
    constexpr std::size_t kLen = 1000, kSamples = 200;
    const auto batch = tasks::gen_copy_memory(kSamples, kLen, derive_seed(33, Stream::kVerify));
    const std::size_t total = batch.length();
    Tensor<double> logits({kSamples, tasks::kCopyClasses, total}, -1e30);
    for (std::size_t n = 0; n < kSamples; ++n) {
      for (std::size_t t = 0; t < total; ++t) {
        double* at = logits.ptr() + n * tasks::kCopyClasses * total + t;
        if (t + tasks::kCopyPayload < total) {
          at[0] = 0.0;
        } else {
          for (std::size_t c = 1; c <= 8; ++c) at[c * total] = 0.0;
        }
      }
    }
    Tape<double> tape(Tape<double>::Mode::kInference);
    const double est = cross_entropy(tape, logits, std::span<const std::int32_t>(batch.labels)).item();
    out.push_back(within("copy T=1000: memoryless loss", est, *tasks::baseline_loss(tasks::TaskKind::kCopy, kLen),
                         0.01));
  }

  // Copy: uniform guessing over {1..8} on the payload.
  {
    constexpr std::size_t kLen = 20, kSamples = 100000;
    const auto batch = tasks::gen_copy_memory(kSamples, kLen, derive_seed(34, Stream::kVerify));
    Rng rng = make_rng(35, Stream::kVerify);
    std::uniform_int_distribution<int> guess(1, 8);
    std::size_t hit = 0, scored = 0;
    for (std::size_t i = 0; i < batch.labels.size(); ++i) {
      if (batch.mask[i] == 0.0f) continue;
      hit += guess(rng) == batch.labels[i];
      ++scored;
    }
    out.push_back(within("copy: random-guess payload accuracy", double(hit) / double(scored), 0.125, 0.01));
  }

  // Music: p = 0.5 on every key.
  {
    Tensor<double> logits({3, tasks::kPianoKeys, 7}, 0.0), targets({3, tasks::kPianoKeys, 7});
    Rng rng = make_rng(36, Stream::kVerify);
    for (double& v : targets.data()) v = uniform01(rng) < 0.1 ? 1.0 : 0.0;
    Tape<double> tape(Tape<double>::Mode::kInference);
    const double est = bernoulli_nll(tape, logits, targets).item();
    out.push_back(within("music: uniform 0.5 predictor nll", est, 88.0 * std::log(2.0), 1e-9));
  }

  // Characters: a uniform predictor scores log2 V bits per character.
  {
    constexpr std::size_t kVocab = 50;
    Tensor<double> logits({4, kVocab, 16}, 0.0);
    std::vector<std::int32_t> labels(4 * 16);
    Rng rng = make_rng(37, Stream::kVerify);
    for (auto& l : labels) l = static_cast<std::int32_t>(rng() % kVocab);
    Tape<double> tape(Tape<double>::Mode::kInference);
    const double bpc = tasks::bits_per_char(cross_entropy(tape, logits, std::span<const std::int32_t>(labels)).item());
    out.push_back(within("char: uniform predictor bpc", bpc, std::log2(double(kVocab)), 1e-9));
  }
  return out;
}

std::vector<std::string> suite_names() { return {"gradcheck", "causality", "baselines"}; }

std::vector<CheckResult> run_suite(const std::string& name) {
  if (name == "gradcheck") return gradcheck_suite();
  if (name == "causality") return causality_suite();
  if (name == "baselines") return baselines_suite();
  throw ConfigError("unknown verify suite '" + name + "' (expected gradcheck, causality or baselines)");
}

}  // namespace tcnlab::verify
