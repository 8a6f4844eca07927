#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tcnlab::cli {

enum ExitCode : int { kOk = 0, kIncomplete = 1, kUsage = 2, kNumerical = 3 };

/// Entry point shared by the tcnlab executable and the tests.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Receptive-field report printed by `tcnlab rf`.
std::string rf_report(std::uint64_t k, std::uint64_t n, std::uint64_t base, std::uint64_t target);

/// Aggregates run directories into a comparison table written to `out_csv`.
/// Returns kIncomplete if any run lacks metrics, else kOk.
int compare_runs(const std::vector<std::string>& run_dirs, const std::string& out_csv, std::ostream& out);

}  // namespace tcnlab::cli
