#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gclab/lab/runner.hpp"

namespace {

const char* category_name(gclab::ErrorCategory c) {
  switch (c) {
    case gclab::ErrorCategory::kParse: return "PARSE";
    case gclab::ErrorCategory::kValidation: return "VALIDATION";
    case gclab::ErrorCategory::kFeasibility: return "FEASIBILITY";
    case gclab::ErrorCategory::kNumeric: return "NUMERIC";
  }
  return "UNKNOWN";
}

int fail(const char* category, const std::string& message, int code) {
  std::cerr << nlohmann::json{{"error", category}, {"message", message}, {"exit_code", code}}.dump()
            << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gclab: dependent-data uniform convergence laboratory"};
  app.require_subcommand(1);
  std::string config_path, run_dir;
  auto* run_cmd = app.add_subcommand("run", "execute an experiment config and write its artifacts");
  run_cmd->add_option("config", config_path, "experiment config (JSON)")->required();
  auto* report_cmd = app.add_subcommand("report", "summarize a finished run directory");
  report_cmd->add_option("dir", run_dir, "run directory")->required();
  app.add_subcommand("validate", "parse and validate a config without running it")
      ->add_option("config", config_path, "experiment config (JSON)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  using namespace gclab::lab;
  try {
    if (*run_cmd) {
      const auto rec = run(load_config(config_path));
      std::cout << rec.output_dir.string() << "\n";
    } else if (*report_cmd) {
      report(run_dir, std::cout);
    } else {
      const auto cfg = load_config(config_path);
      validate_config(cfg);
      std::cout << "valid " << to_string(cfg.task) << " config '" << cfg.experiment_id << "' (digest "
                << config_digest(cfg) << ")\n";
    }
  } catch (const gclab::Error& e) {
    const auto code = static_cast<int>(e.category());
    return fail(category_name(e.category()), e.what(), code);
  } catch (const std::exception& e) {
    return fail("IO", e.what(), 1);
  }
  return 0;
}
