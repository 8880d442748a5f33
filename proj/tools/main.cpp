#include <iostream>

#include "CLI11.hpp"
#include "bagoft/report.hpp"
#include "commands.hpp"

namespace {

using bagoft::cli::RunConfig;

void add_source(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("-i,--input", c.input, "CSV file with a header row");
  cmd->add_option("--setting", c.setting, "generate data from a simulation setting (1-5, nn)");
  cmd->add_option("--variant", c.variant, "variant index within the setting")->capture_default_str();
  cmd->add_option("-n,--n", c.n, "sample size for generated data")->expected(1);
  cmd->add_option("--model", c.model, "default formula for generated data: A (correct) or B")
      ->capture_default_str();
  cmd->add_option("-r,--response", c.response, "response column")->capture_default_str();
  cmd->add_option("-f,--formula", c.formula, "model formula, e.g. \"x1 + x2 + x1*x2 + x3^2\"");
  cmd->add_option("--discrete", c.discrete, "treat these columns as discrete")->delimiter(',');
  cmd->add_option("--continuous", c.continuous, "require these columns to be numeric")->delimiter(',');
  cmd->add_option("--ignore", c.ignore, "drop these columns")->delimiter(',');
}

void add_common(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("-s,--seed", c.seed, "random seed (default from BAGOFT_SEED, else 1)");
  cmd->add_option("-o,--output", c.output, "output path (stdout when omitted)");
}

void add_bagoft(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("-k,--k", c.k, "number of groups")->capture_default_str()->check(CLI::Range(2, 1000));
  cmd->add_option("--nmin", c.n_min, "minimum training rows per group (default n/10)")
      ->check(CLI::Range(std::size_t{1}, std::size_t{10000000}));
  cmd->add_option("--splits", c.splits, "number of random splits")
      ->capture_default_str()
      ->check(CLI::Range(1, 100000));
  cmd->add_option("--alpha", c.alpha, "significance level")->capture_default_str();
  auto* frac = cmd->add_option("--train-fraction", c.train_fraction, "training share of the rows")
                   ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--train-size", c.train_size, "training rows")->excludes(frac);
  cmd->add_option("--partition", c.partition, "covariates | score:<column> | mta-prob")
      ->capture_default_str();
  cmd->add_flag("!--no-correction", c.correction, "skip the finite-sample correction");
  cmd->add_option("-j,--threads", c.threads, "worker threads")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive goodness-of-fit testing for logistic regression"};
  app.set_version_flag("--version", bagoft::version());
  app.require_subcommand(1);

  RunConfig c;
  c.seed = bagoft::cli::default_seed();

  auto* test = app.add_subcommand("test", "multi-split BAGofT test on a CSV file or generated data");
  add_source(test, c);
  add_bagoft(test, c);
  test->add_option("--top", c.top, "covariates listed in the summary")->capture_default_str();
  add_common(test, c);

  auto* diagnose = app.add_subcommand("diagnose", "BAGofT test with the full covariate ranking");
  add_source(diagnose, c);
  add_bagoft(diagnose, c);
  add_common(diagnose, c);

  auto* hl = app.add_subcommand("hl", "Hosmer-Lemeshow test");
  add_source(hl, c);
  hl->add_option("-g,--groups", c.hl_groups, "number of groups")->capture_default_str();
  add_common(hl, c);

  auto* experiment = app.add_subcommand("experiment", "Monte-Carlo rejection rates for HL and BAGofT");
  experiment->add_option("--setting", c.setting, "comma-separated setting ids (1-5, nn)")->required();
  experiment->add_option("-n,--n", c.n, "sample sizes (default 500)");
  experiment->add_option("--reps", c.reps, "replications")->capture_default_str()->check(CLI::Range(std::size_t{1}, std::size_t{10000000}));
  experiment->add_option("-g,--groups", c.hl_groups, "HL groups")->capture_default_str();
  add_bagoft(experiment, c);
  add_common(experiment, c);

  auto* generate = app.add_subcommand("generate", "write one simulated data set as CSV");
  generate->add_option("--setting", c.setting, "setting id (1-5, nn)")->required();
  generate->add_option("--variant", c.variant, "variant index within the setting")->capture_default_str();
  generate->add_option("-n,--n", c.n, "sample size")->expected(1);
  add_common(generate, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : bagoft::cli::kExitUsage;
  }

  using namespace bagoft::cli;
  if (*test) return run_test_command(c, std::cout, std::cerr);
  if (*diagnose) return run_diagnose_command(c, std::cout, std::cerr);
  if (*hl) return run_hl_command(c, std::cout, std::cerr);
  if (*experiment) return run_experiment_command(c, std::cout, std::cerr);
  if (*generate) return run_generate_command(c, std::cout, std::cerr);
  return kExitUsage;
}
