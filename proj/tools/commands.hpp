#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bagoft::cli {

/// Settings shared by every subcommand. Flags map one to one onto fields.
struct RunConfig {
  // Data source: a CSV file, or a generated setting.
  std::string input;
  std::string setting;
  std::size_t variant = 0;  // index into the setting's standard variants
  std::vector<std::size_t> n;
  std::string model = "B";  // model used as the default formula for generated data

  std::string response = "y";
  std::string formula;
  std::vector<std::string> discrete;
  std::vector<std::string> continuous;
  std::vector<std::string> ignore;

  std::size_t k = 5;
  std::optional<std::size_t> n_min;
  std::size_t splits = 100;
  double alpha = 0.05;
  std::optional<double> train_fraction;
  std::optional<std::size_t> train_size;
  std::string partition = "covariates";
  bool correction = true;
  unsigned threads = 1;

  std::size_t hl_groups = 10;
  std::size_t reps = 100;
  std::size_t top = 5;
  std::uint64_t seed = 1;
  std::string output;
};

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Environment variable consulted for the default seed.
inline constexpr const char* kSeedEnv = "BAGOFT_SEED";
std::uint64_t default_seed();

/// Multi-split BAGofT test. Writes the JSON report to config.output (stdout
/// when empty) and the summary to `out` (to `err` when the report goes to
/// stdout). Returns 0 whatever the verdict.
int run_test_command(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Same run as `test`, but the summary lists the full covariate ranking and
/// the partition chosen on the first successful split.
int run_diagnose_command(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Hosmer-Lemeshow test of the formula fitted on all rows.
int run_hl_command(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Monte-Carlo rejection rates for HL and BAGofT. Writes the long-format CSV
/// to config.output (stdout when empty) plus `<output>.manifest.json`, and a
/// compact table to `out`.
int run_experiment_command(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Writes one generated data set as CSV.
int run_generate_command(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace bagoft::cli
