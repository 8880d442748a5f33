#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bagoft/dataset.hpp"
#include "bagoft/error.hpp"
#include "bagoft/formula.hpp"
#include "bagoft/glm.hpp"
#include "bagoft/partition.hpp"
#include "bagoft/random.hpp"

namespace bagoft::gof {

// ---------------------------------------------------------------------------
// Hosmer-Lemeshow
// ---------------------------------------------------------------------------

struct HlResult {
  double statistic = 0.0;
  std::size_t groups = 0;  // non-empty groups actually used
  unsigned df = 0;         // k - 2
  double p_value = 1.0;
};

class DegenerateGroupError : public Error {
 public:
  using Error::Error;
};

/// Hosmer-Lemeshow test. Observations are grouped by the k-1 lower empirical
/// quantiles of `phat` into left-closed intervals [0, q1), [q1, q2), ...,
/// [q_{k-1}, 1]; empty intervals (from tied quantiles) add nothing. The
/// p-value uses chi-squared with k - 2 df. Throws DegenerateGroupError when a
/// group's mean probability is 0 or 1.
HlResult hl_test(std::span<const int> y, std::span<const double> phat, std::size_t k);

// ---------------------------------------------------------------------------
// BAG statistic and finite-sample correction
// ---------------------------------------------------------------------------

struct BagValue {
  double statistic = 0.0;
  /// Number of non-empty groups; the chi-squared df.
  std::size_t realized_groups = 0;
  /// Per-group summand (0 for empty groups).
  std::vector<double> contributions;
  std::vector<std::size_t> counts;
};

/// Sum over groups of (sum of y - p)^2 / (sum of p(1-p)) on test rows.
/// Throws Error when every group is empty.
BagValue bag_statistic(std::span<const int> y, std::span<const double> phat,
                       std::span<const std::size_t> group_of_row, std::size_t k);

/// BAG as a function of the coefficients with test rows and grouping fixed.
double bag_at(const Eigen::VectorXd& coefficients, const Eigen::MatrixXd& test_x,
              std::span<const int> y, std::span<const std::size_t> group_of_row, std::size_t k);

/// Central-difference gradient of bag_at, step 1e-5 * (1 + |beta_j|).
Eigen::VectorXd bag_gradient(const Eigen::VectorXd& coefficients, const Eigen::MatrixXd& test_x,
                             std::span<const int> y, std::span<const std::size_t> group_of_row,
                             std::size_t k);

struct Correction {
  double adjusted = 0.0;
  double standard_error = 0.0;
  Eigen::VectorXd gradient;
  /// Information matrix was singular; the correction was skipped.
  bool singular_information = false;
};

/// 0.95 standard-normal quantile used by the correction.
double correction_z();

/// max(bag - se * z_0.95, 0) with se = sqrt(g' J^-1 g) from a gradient g and
/// information J. A singular J skips the correction (adjusted = bag).
Correction apply_correction(double bag, const Eigen::VectorXd& gradient,
                            const Eigen::MatrixXd& information);

/// Full correction: numerical gradient of BAG at the fitted coefficients on the
/// test design, combined with the model's training-set observed information.
Correction corrected_statistic(double bag, const glm::FittedGlm& model,
                               const glm::DesignMatrix& test_design, std::span<const int> y_test,
                               std::span<const std::size_t> group_of_row, std::size_t k);

// ---------------------------------------------------------------------------
// Split testing
// ---------------------------------------------------------------------------

enum class PartitionStrategy {
  Covariates,      // greedy search over covariates (plus an optional score)
  ScoreQuantiles,  // quantile intervals of a supplied score column
  MtaQuantiles,    // quantile intervals of the model's own fitted probabilities
};

std::string to_string(PartitionStrategy s);
/// Accepts "covariates", "score:<column>", "mta-prob". Sets `score_column`.
PartitionStrategy parse_strategy(const std::string& text, std::string& score_column);

inline constexpr const char* kMtaScoreColumn = "mta_phat";

struct TestConfig {
  std::size_t k = 5;
  /// Default floor(n / 10).
  std::optional<std::size_t> n_min;
  /// Explicit training size; otherwise `train_fraction`, otherwise the
  /// default_train_size rule.
  std::optional<std::size_t> train_size;
  std::optional<double> train_fraction;
  /// Partition sources; empty lists mean every column of that kind.
  std::vector<std::string> continuous;
  std::vector<std::string> discrete;
  PartitionStrategy strategy = PartitionStrategy::Covariates;
  /// Score column (ScoreQuantiles), or an extra greedy source (Covariates).
  std::string score_column;
  std::size_t splits = 100;
  double alpha = 0.05;
  bool correction = true;
  unsigned threads = 1;
};

/// Training size: 150, 425, 900 for n = 200, 500, 1000, else round(0.9 n).
std::size_t default_train_size(std::size_t n);

/// Sizes and sources resolved against a dataset.
struct ResolvedConfig {
  std::size_t n = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  partition::PartitionConfig partition;
};

/// Throws Error on an invalid configuration for this dataset and formula.
ResolvedConfig resolve(const TestConfig& config, const Dataset& data, const Formula& formula);

struct CovariateCount {
  std::string name;
  std::size_t total = 0;      // rule appearances across all groups
  std::size_t max_group = 0;  // appearances in the largest-contribution group
};

struct SplitOutcome {
  std::size_t index = 0;
  std::uint64_t stream_seed = 0;
  bool ok = false;
  std::string error;

  double statistic = 0.0;           // raw BAG
  double adjusted_statistic = 0.0;  // BAG_adj
  double standard_error = 0.0;
  bool singular_information = false;
  std::size_t groups = 0;  // realized (non-empty) test groups
  double p_value = 1.0;
  bool converged = false;
  std::size_t max_group = 0;
  std::vector<double> contributions;
  partition::Partition partition;
  std::vector<CovariateCount> counts;  // this split only, by name
};

/// One random train/test split: fit on train, partition on train, BAG on test.
/// Never throws for data-dependent failures; they come back with ok = false.
SplitOutcome single_split_test(const Dataset& data, const Formula& formula,
                               const TestConfig& config, RandomSource rng,
                               std::size_t index = 0);

/// Median-rule decision over split p-values.
struct MedianDecision {
  double median_p = 1.0;
  double threshold = 0.0;
  bool reject = false;
};

/// 0.5 + z_alpha * sqrt(1 / (12 s)).
double median_threshold(std::size_t splits, double alpha);

/// Lower-middle median of `p_values` against median_threshold(splits, alpha).
MedianDecision median_rule(std::span<const double> p_values, std::size_t splits, double alpha);

struct TestReport {
  std::vector<SplitOutcome> outcomes;
  std::size_t failed = 0;
  bool inconclusive = false;
  MedianDecision decision;
  std::vector<CovariateCount> ranking;
  TestConfig config;
  ResolvedConfig resolved;
  std::string formula;
  std::uint64_t seed = 0;
};

/// Runs config.splits independent splits on child streams rng.child(i) and
/// aggregates them. Failed splits are excluded from the median; more than
/// half failing makes the result inconclusive (never a rejection).
TestReport multi_split_test(const Dataset& data, const Formula& formula, const TestConfig& config,
                            const RandomSource& rng);

/// Rule-appearance counts per covariate summed over successful splits, ranked
/// by total (descending) then name.
std::vector<CovariateCount> covariate_counts(std::span<const SplitOutcome> outcomes);

/// Counts for a single partition; `max_group` indexes the group whose counts
/// fill CovariateCount::max_group.
std::vector<CovariateCount> partition_counts(const partition::Partition& partition,
                                             std::optional<std::size_t> max_group);

}  // namespace bagoft::gof
