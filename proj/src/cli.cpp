#include "tcnlab/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tcnlab/train/trainer.hpp"
#include "tcnlab/verify.hpp"

namespace tcnlab::cli {

namespace fs = std::filesystem;

std::string rf_report(std::uint64_t k, std::uint64_t n, std::uint64_t base, std::uint64_t target) {
  std::ostringstream out;
  out << "kernel_size " << k << "\ndilation_base " << base << '\n';
  if (n > 0) {
    const std::uint64_t rf = nn::receptive_field(k, n, base);
    out << "levels " << n << "\ndilations";
    std::uint64_t d = 1;
    for (std::uint64_t i = 0; i < n; ++i, d *= base) out << ' ' << d;
    out << "\nreceptive_field " << rf << '\n';
  }
  if (target > 0) {
    const std::uint64_t need = nn::min_levels_for(k, target, base);
    out << "target " << target << "\nmin_levels " << need << " (receptive_field "
        << nn::receptive_field(k, need, base) << ")\n";
  }
  return out.str();
}

int compare_runs(const std::vector<std::string>& run_dirs, const std::string& out_csv, std::ostream& out) {
  std::ostringstream table;
  table << "run,task,seq_len,model,params,step,split,loss,metric,metric_kind,fraction_of_baseline,status\n";
  int code = kOk;
  for (const auto& dir : run_dirs) {
    const fs::path d(dir);
    std::string task, seq_len, model, params;
    std::optional<train::MetricsRow> last;
    std::string status = "ok";
    try {
      const auto cfg = train::load_config((d / train::kConfigFile).string());
      task = tasks::to_string(cfg.task.kind);
      seq_len = std::to_string(cfg.task.seq_len);
      model = nn::to_string(cfg.model.kind);
    } catch (const Error&) {
      status = "FAILED: config";
    }
    try {
      params = std::to_string(train::read_checkpoint((d / train::kCheckpointFile).string()).param_count());
    } catch (const Error&) {
      if (status == "ok") status = "FAILED: checkpoint";
    }
    try {
      const auto rows = train::read_metrics((d / train::kMetricsFile).string());
      for (const auto& r : rows)
        if (r.split == "test") last = r;
      if (!last && !rows.empty()) last = rows.back();
      if (!last) status = "FAILED: no metrics rows";
    } catch (const Error&) {
      status = "FAILED: metrics";
    }
    if (status != "ok") code = kIncomplete;
    table << d.filename().string() << ',' << task << ',' << seq_len << ',' << model << ',' << params << ',';
    if (last) {
      table << last->step << ',' << last->split << ',' << last->loss << ',' << last->metric << ','
            << tasks::to_string(last->metric_kind) << ',';
      if (last->fraction_of_baseline) table << *last->fraction_of_baseline;
    } else {
      table << ",,,,,";
    }
    table << ',' << status << '\n';
  }
  std::ofstream file(out_csv);
  if (!file) throw Error("cannot write '" + out_csv + "'");
  file << table.str();
  out << table.str();
  return code;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"tcnlab: temporal convolutional networks vs recurrent baselines"};
  app.require_subcommand(1);

  std::string config_path, preset_name, out_dir;
  std::uint64_t seed = 0;
  std::vector<std::string> overrides;
  bool resume = false, quiet = false;
  std::uint64_t stop_at = 0;
  auto* run_cmd = app.add_subcommand("run", "Train one experiment");
  auto* cfg_opt = run_cmd->add_option("--config", config_path, "Config file (INI)");
  auto* preset_opt = run_cmd->add_option("--preset", preset_name, "Named preset");
  cfg_opt->excludes(preset_opt);
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Master seed");
  run_cmd->add_option("--out", out_dir, "Output directory");
  run_cmd->add_option("--override", overrides, "section.key=value (repeatable)");
  run_cmd->add_flag("--resume", resume, "Continue from the checkpoint in --out");
  run_cmd->add_option("--stop-at", stop_at, "Stop and checkpoint after this many steps");
  run_cmd->add_flag("--quiet", quiet, "No progress output");

  std::uint64_t rf_k = 0, rf_n = 0, rf_base = 2, rf_target = 0;
  auto* rf_cmd = app.add_subcommand("rf", "Receptive-field arithmetic");
  rf_cmd->add_option("--k", rf_k, "Kernel size")->required();
  rf_cmd->add_option("--n", rf_n, "Number of levels");
  rf_cmd->add_option("--base", rf_base, "Dilation base");
  rf_cmd->add_option("--target", rf_target, "History length to cover");

  std::string suite;
  auto* verify_cmd = app.add_subcommand("verify", "Run a verification suite");
  verify_cmd->add_option("--suite", suite, "gradcheck | causality | baselines")->required();

  std::vector<std::string> run_dirs;
  std::string table_path;
  auto* compare_cmd = app.add_subcommand("compare", "Aggregate finished runs");
  compare_cmd->add_option("--runs", run_dirs, "Run directories")->required();
  compare_cmd->add_option("--out", table_path, "Output CSV")->required();

  auto* presets_cmd = app.add_subcommand("presets", "List presets with parameter counts");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run_cmd) {
      if (config_path.empty() == preset_name.empty()) {
        err << "run: give exactly one of --config or --preset\n";
        return kUsage;
      }
      train::ExperimentConfig cfg =
          preset_name.empty() ? train::load_config(config_path) : train::preset(preset_name);
      for (const auto& o : overrides) train::apply_override(cfg, o);
      if (*seed_opt) cfg.train.seed = seed;
      if (!out_dir.empty()) cfg.train.out_dir = out_dir;
      if (cfg.train.out_dir.empty()) cfg.train.out_dir = "runs/" + cfg.name + "-s" + std::to_string(cfg.train.seed);
      train::RunOptions opts;
      opts.resume = resume;
      opts.stop_at_step = stop_at;
      if (!quiet) opts.log = &err;
      const auto result = train::train(cfg, opts);
      out << "run " << cfg.name << " params " << result.param_count << " steps " << result.steps;
      if (result.final_test) {
        out << " test_loss " << result.final_test->loss << " test_" << tasks::to_string(result.final_test->metric_kind)
            << ' ' << result.final_test->metric;
      }
      out << " out " << cfg.train.out_dir << '\n';
      return kOk;
    }
    if (*rf_cmd) {
      if (rf_n == 0 && rf_target == 0) {
        err << "rf: give --n, --target or both\n";
        return kUsage;
      }
      out << rf_report(rf_k, rf_n, rf_base, rf_target);
      return kOk;
    }
    if (*verify_cmd) {
      const auto results = verify::run_suite(suite);
      bool all = true;
      for (const auto& r : results) {
        out << (r.pass ? "PASS " : "FAIL ") << r.name << "  " << r.detail << '\n';
        all = all && r.pass;
      }
      out << suite << ": " << (all ? "all passed" : "FAILED") << '\n';
      return all ? kOk : kIncomplete;
    }
    if (*compare_cmd) return compare_runs(run_dirs, table_path, out);
    if (*presets_cmd) {
      for (const auto& name : train::preset_names()) {
        const auto cfg = train::preset(name);
        out << name << ' ';
        try {
          out << train::count_params(cfg);
        } catch (const Error&) {
          out << "?";
        }
        out << '\n';
      }
      return kOk;
    }
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace tcnlab::cli
