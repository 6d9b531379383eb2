// confound: estimate and test hidden confounding in linear models.

#include <cstdint>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "confound/error.hpp"
#include "confound/experiment.hpp"
#include "confound/report.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

int exit_code_for(confound::ErrorCode code) {
  switch (confound::category_of(code)) {
    case confound::ErrorCategory::Usage: return kExitUsage;
    case confound::ErrorCategory::Data: return kExitData;
    case confound::ErrorCategory::Numeric: return kExitNumeric;
  }
  return kExitNumeric;
}

struct Options {
  confound::ExperimentConfig config;
  std::string format = "json";
  std::string null_method = "sphere";
  double noise_sd = -1.0;
  std::string delimiter = ",";
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--seed", o.config.seed, "Master seed");
  cmd->add_option("--null-samples", o.config.null_count, "Null draws per test")
      ->check(CLI::Range(std::size_t{100}, std::size_t{100000000}));
  cmd->add_option("--null-method", o.null_method, "sphere | chi2")
      ->check(CLI::IsMember({"sphere", "chi2"}));
  cmd->add_option("--alpha", o.config.alpha, "Test level")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--output", o.config.output_path, "Write report here instead of stdout");
  cmd->add_option("--format", o.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_flag("--timing", o.config.record_timing, "Record wall-clock time in the report");
}

void add_input(CLI::App* cmd, Options& o, bool needs_target) {
  cmd->add_option("--input", o.config.input_path, "CSV file")->required();
  if (needs_target) cmd->add_option("--target", o.config.target, "Column name or index")->required();
  cmd->add_flag("--normalize", o.config.normalize, "Scale predictors to unit variance");
  cmd->add_option("--delimiter", o.delimiter, "Field separator")->check([](const std::string& s) {
    return s.size() == 1 ? std::string{} : std::string{"delimiter must be one character"};
  });
}

void add_simulation(CLI::App* cmd, Options& o) {
  cmd->add_option("--dim", o.config.dim, "Predictor dimension")->check(CLI::PositiveNumber);
  cmd->add_option("--latent", o.config.latent, "Number of latent sources (default: dim)");
  cmd->add_option("--samples", o.config.samples, "Samples per run")->check(CLI::PositiveNumber);
  cmd->add_option("--runs", o.config.runs, "Number of runs")->check(CLI::PositiveNumber);
  cmd->add_option("--noise-sd", o.noise_sd, "Target noise standard deviation")
      ->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Estimate and test hidden confounding between predictors and a target"};
  app.require_subcommand(1);
  Options o;

  const std::map<std::string, confound::Mode> modes = {
      {"estimate", confound::Mode::Estimate},
      {"test", confound::Mode::Test},
      {"simulate", confound::Mode::Simulate},
      {"rejections", confound::Mode::RejectionStudy},
      {"overfit", confound::Mode::OverfitStudy},
      {"shuffle-target", confound::Mode::ShuffleTarget},
  };

  auto* estimate = app.add_subcommand("estimate", "Estimate confounding strength for a CSV file");
  add_input(estimate, o, true);
  add_common(estimate, o);

  auto* test = app.add_subcommand("test", "Test the no-confounding hypothesis on a CSV file");
  add_input(test, o, true);
  add_common(test, o);

  auto* simulate = app.add_subcommand("simulate", "True versus estimated strength on random models");
  add_simulation(simulate, o);
  add_common(simulate, o);

  auto* rejections = app.add_subcommand("rejections", "Rejection rates binned by true strength");
  add_simulation(rejections, o);
  add_common(rejections, o);

  auto* overfit = app.add_subcommand("overfit", "p-value distribution on unconfounded data");
  add_simulation(overfit, o);
  add_common(overfit, o);
  overfit->add_option("--sample-sizes", o.config.sample_sizes, "Sample sizes to study")
      ->delimiter(',');

  auto* shuffle = app.add_subcommand("shuffle-target", "Each column in turn as the target");
  add_input(shuffle, o, false);
  add_common(shuffle, o);
  shuffle->add_flag("--with-test", o.config.with_test, "Also test each column");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    auto& cfg = o.config;
    cfg.mode = modes.at(app.get_subcommands().front()->get_name());
    cfg.method = confound::null_method_from_string(o.null_method);
    cfg.delimiter = o.delimiter.front();
    if (o.noise_sd >= 0.0) cfg.noise_sd = o.noise_sd;
    const auto format = confound::report_format_from_string(o.format);

    const confound::Report report = confound::run_experiment(cfg);
    if (cfg.output_path.empty()) {
      if (format == confound::ReportFormat::Json)
        std::cout << confound::report_json_string(report) << '\n';
      else
        std::cout << confound::records_csv(report);
    } else {
      confound::emit_report(report, cfg.output_path, format);
    }
    return EXIT_SUCCESS;
  } catch (const confound::Error& e) {
    std::cerr << "confound: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "confound: " << e.what() << '\n';
    return kExitNumeric;
  }
}
