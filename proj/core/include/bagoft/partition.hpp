#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bagoft/dataset.hpp"
#include "bagoft/error.hpp"

namespace bagoft::partition {

enum class Side { LessEqual, Greater };

struct ThresholdTest {
  double value = 0.0;
  Side side = Side::LessEqual;
  friend bool operator==(const ThresholdTest&, const ThresholdTest&) = default;
};

/// Label membership. A negated test ("not in") is the complement side of a
/// discrete split and therefore also receives labels never seen in training.
struct MembershipTest {
  std::vector<std::string> labels;  // sorted, non-empty
  bool negated = false;
  friend bool operator==(const MembershipTest&, const MembershipTest&) = default;
};

/// One axis-aligned condition on a covariate or score column.
struct AxisRule {
  std::string source;
  std::variant<ThresholdTest, MembershipTest> test;

  bool is_threshold() const noexcept { return std::holds_alternative<ThresholdTest>(test); }
  bool matches(double value) const;
  bool matches(const std::string& label) const;
  std::string describe() const;

  friend bool operator==(const AxisRule&, const AxisRule&) = default;
};

/// A conjunction of rules; the empty conjunction is the whole space.
struct Group {
  std::vector<AxisRule> rules;
  std::size_t train_count = 0;
  std::string describe() const;
};

/// One accepted greedy split: the parent's criterion contribution and the sum
/// of the two children's contributions, both on training data.
struct SplitStep {
  std::string source;
  double parent_criterion = 0.0;
  double children_criterion = 0.0;
};

/// Ordered list of disjoint groups that together cover the covariate space.
struct Partition {
  std::vector<Group> groups;
  std::vector<std::string> sources;
  std::vector<SplitStep> history;
  /// Set when fewer than two groups could be formed.
  bool degenerate = false;

  std::size_t size() const noexcept { return groups.size(); }
};

/// Parameters of the greedy search.
struct PartitionConfig {
  std::size_t k = 5;      // target group count
  std::size_t n_min = 1;  // minimum training rows per group
  std::vector<std::string> continuous;
  std::vector<std::string> discrete;
  /// Optional score column, searched like a continuous covariate.
  std::optional<std::string> score;

  /// Throws Error when k < 2, n_min < 1 or no source is named.
  void validate() const;
};

class InfeasiblePartitionError : public Error {
 public:
  using Error::Error;
};

/// Squared residual sum over variance sum; zero for an empty group.
inline double group_criterion(double residual_sum, double variance_sum) noexcept {
  return variance_sum > 0.0 ? residual_sum * residual_sum / variance_sum : 0.0;
}

struct CriterionValue {
  double value = 0.0;
  std::size_t empty_groups = 0;
};

/// Sum over groups of (sum of y - p)^2 / (sum of p(1-p)). Empty groups add
/// nothing and are counted. Throws Error when every group is empty.
CriterionValue criterion_b(std::span<const std::size_t> group_of_row, std::size_t groups,
                           std::span<const int> y, std::span<const double> phat);
CriterionValue criterion_b(const Partition& partition, const Dataset& rows,
                           std::span<const double> phat);

/// Cut points for one continuous source within a group of size n0: with
/// rho = floor(n0 / n_min), the j/rho lower empirical quantiles (j = 1..rho-1),
/// deduplicated, keeping cuts that leave >= n_min rows on both sides.
std::vector<double> candidate_thresholds(std::span<const double> values, std::size_t n0,
                                         std::size_t n_min);

struct DiscreteSplit {
  std::vector<std::string> left;   // membership side
  std::vector<std::string> right;  // complement side
};

/// Two-way splits of the observed labels with >= n_min rows per side. Up to six
/// distinct labels every split is enumerated (the lexicographically first label
/// stays left); beyond that labels are ordered by mean residual and only the
/// contiguous splits of that ordering are returned.
std::vector<DiscreteSplit> candidate_discrete_splits(std::span<const std::string> labels,
                                                     std::span<const double> residuals,
                                                     std::size_t n_min);

/// Tree-based greedy partition search on training rows with fitted
/// probabilities `phat`. Groups are scanned breadth-first; each is replaced by
/// the child pair maximizing the criterion over all sources until k groups
/// exist or nothing can be split. Ties prefer the larger criterion, then the
/// lexicographically smaller source, then the smaller threshold.
/// Throws InfeasiblePartitionError when the root cannot be split.
Partition greedy_partition(const PartitionConfig& config, const Dataset& train,
                           std::span<const double> phat);

/// Group index per row. Throws MissingColumnError when a rule's source is absent.
std::vector<std::size_t> assign_groups(const Partition& partition, const Dataset& rows);

/// Intervals of a score column cut at its j/k lower empirical quantiles.
/// All-equal scores yield one group flagged degenerate.
Partition probability_partition(std::span<const double> scores, std::size_t k,
                                const std::string& source);

}  // namespace bagoft::partition
