#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tcnlab::verify {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

inline constexpr double kGradcheckStep = 1e-6;
inline constexpr double kGradcheckTol = 1e-4;

/// Analytic gradients of every op, block and model (double precision)
/// against central finite differences.
std::vector<CheckResult> gradcheck_suite();

/// Random TCN specs: a perturbation at time s changes no output before s, and
/// no output at s + receptive_field or later; the output at
/// s + receptive_field - 1 does change.
std::vector<CheckResult> causality_suite(std::size_t num_specs = 20, std::uint64_t seed = 2024);

/// Monte-Carlo estimates of memoryless baselines vs their analytic values.
std::vector<CheckResult> baselines_suite();

std::vector<std::string> suite_names();
/// Throws ConfigError for an unknown suite.
std::vector<CheckResult> run_suite(const std::string& name);

}  // namespace tcnlab::verify
