#include "bagoft/gof.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "bagoft/numkit.hpp"

namespace bagoft::gof {

HlResult hl_test(std::span<const int> y, std::span<const double> phat, std::size_t k) {
  if (y.size() != phat.size()) throw DimensionError("hl_test: response and probability lengths differ");
  if (k < 3) throw Error("hl_test: K must be at least 3");
  if (y.size() < k) throw Error("hl_test: fewer observations than groups");

  std::vector<double> sorted(phat.begin(), phat.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> cuts;
  for (std::size_t j = 1; j < k; ++j) {
    cuts.push_back(
        numkit::lower_quantile_sorted(sorted, static_cast<double>(j) / static_cast<double>(k)));
  }

  std::vector<double> resid(k, 0.0), prob_sum(k, 0.0);
  std::vector<std::size_t> count(k, 0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    // Interval index: number of cuts at or below p (left-closed intervals).
    const auto g = static_cast<std::size_t>(
        std::upper_bound(cuts.begin(), cuts.end(), phat[i]) - cuts.begin());
    resid[g] += y[i] - phat[i];
    prob_sum[g] += phat[i];
    ++count[g];
  }

  HlResult out;
  for (std::size_t g = 0; g < k; ++g) {
    if (count[g] == 0) continue;
    const double n_k = static_cast<double>(count[g]);
    const double mean = prob_sum[g] / n_k;
    const double denom = n_k * mean * (1.0 - mean);
    if (!(denom > 0.0)) {
      throw DegenerateGroupError("hl_test: group " + std::to_string(g + 1) +
                                 " has mean fitted probability 0 or 1");
    }
    out.statistic += resid[g] * resid[g] / denom;
    ++out.groups;
  }
  out.df = static_cast<unsigned>(k - 2);
  out.p_value = numkit::chi2_sf(out.statistic, out.df);
  return out;
}

BagValue bag_statistic(std::span<const int> y, std::span<const double> phat,
                       std::span<const std::size_t> group_of_row, std::size_t k) {
  if (y.size() != phat.size() || y.size() != group_of_row.size()) {
    throw DimensionError("bag_statistic: input lengths differ");
  }
  std::vector<double> r(k, 0.0), v(k, 0.0);
  BagValue out;
  out.counts.assign(k, 0);
  out.contributions.assign(k, 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto g = group_of_row[i];
    if (g >= k) throw DimensionError("bag_statistic: group index out of range");
    r[g] += y[i] - phat[i];
    v[g] += phat[i] * (1.0 - phat[i]);
    ++out.counts[g];
  }
  for (std::size_t g = 0; g < k; ++g) {
    if (out.counts[g] == 0) continue;
    out.contributions[g] = partition::group_criterion(r[g], v[g]);
    out.statistic += out.contributions[g];
    ++out.realized_groups;
  }
  if (out.realized_groups == 0) throw Error("bag_statistic: every group is empty");
  return out;
}

double bag_at(const Eigen::VectorXd& coefficients, const Eigen::MatrixXd& test_x,
              std::span<const int> y, std::span<const std::size_t> group_of_row, std::size_t k) {
  const auto phat = glm::predict_prob(coefficients, test_x);
  return bag_statistic(y, phat, group_of_row, k).statistic;
}

Eigen::VectorXd bag_gradient(const Eigen::VectorXd& coefficients, const Eigen::MatrixXd& test_x,
                             std::span<const int> y, std::span<const std::size_t> group_of_row,
                             std::size_t k) {
  Eigen::VectorXd grad(coefficients.size());
  Eigen::VectorXd probe = coefficients;
  for (Eigen::Index j = 0; j < coefficients.size(); ++j) {
    const double h = 1e-5 * (1.0 + std::abs(coefficients[j]));
    probe[j] = coefficients[j] + h;
    const double up = bag_at(probe, test_x, y, group_of_row, k);
    probe[j] = coefficients[j] - h;
    const double down = bag_at(probe, test_x, y, group_of_row, k);
    probe[j] = coefficients[j];
    grad[j] = (up - down) / (2.0 * h);
  }
  return grad;
}

double correction_z() {
  static const double z = numkit::gaussian_quantile(0.95);
  return z;
}

Correction apply_correction(double bag, const Eigen::VectorXd& gradient,
                            const Eigen::MatrixXd& information) {
  Correction out;
  out.gradient = gradient;
  out.adjusted = bag;
  if (gradient.size() != information.rows() || information.rows() != information.cols()) {
    throw DimensionError("correction: gradient and information sizes differ");
  }
  if (gradient.isZero(0.0)) return out;

  const double scale = information.diagonal().cwiseAbs().maxCoeff();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(information);
  if (!(scale > 0.0) || ldlt.info() != Eigen::Success ||
      ldlt.vectorD().minCoeff() <= glm::kPivotTolerance * scale) {
    out.singular_information = true;
    return out;
  }
  const double quad = gradient.dot(ldlt.solve(gradient));
  out.standard_error = std::sqrt(std::max(quad, 0.0));
  out.adjusted = std::max(bag - out.standard_error * correction_z(), 0.0);
  return out;
}

Correction corrected_statistic(double bag, const glm::FittedGlm& model,
                               const glm::DesignMatrix& test_design, std::span<const int> y_test,
                               std::span<const std::size_t> group_of_row, std::size_t k) {
  const Eigen::VectorXd grad =
      bag_gradient(model.coefficients, test_design.x, y_test, group_of_row, k);
  return apply_correction(bag, grad, model.information);
}

std::string to_string(PartitionStrategy s) {
  switch (s) {
    case PartitionStrategy::Covariates: return "covariates";
    case PartitionStrategy::ScoreQuantiles: return "score";
    case PartitionStrategy::MtaQuantiles: return "mta-prob";
  }
  return "covariates";
}

PartitionStrategy parse_strategy(const std::string& text, std::string& score_column) {
  if (text == "covariates") return PartitionStrategy::Covariates;
  if (text == "mta-prob") return PartitionStrategy::MtaQuantiles;
  if (text.starts_with("score:") && text.size() > 6) {
    score_column = text.substr(6);
    return PartitionStrategy::ScoreQuantiles;
  }
  throw Error("unknown partition mode '" + text + "' (expected covariates, score:<column>, mta-prob)");
}

std::size_t default_train_size(std::size_t n) {
  switch (n) {
    case 200: return 150;
    case 500: return 425;
    case 1000: return 900;
    default: return static_cast<std::size_t>(std::lround(0.9 * static_cast<double>(n)));
  }
}

ResolvedConfig resolve(const TestConfig& config, const Dataset& data, const Formula& formula) {
  ResolvedConfig rc;
  rc.n = data.rows();
  if (config.k < 2) throw Error("K must be at least 2");
  if (config.splits < 1) throw Error("number of splits must be at least 1");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw Error("alpha must lie in (0, 1)");
  for (const auto& c : formula.columns()) data.column(c);

  if (config.train_size) {
    rc.train_size = *config.train_size;
  } else if (config.train_fraction) {
    if (!(*config.train_fraction > 0.0 && *config.train_fraction < 1.0)) {
      throw Error("train fraction must lie in (0, 1)");
    }
    rc.train_size =
        static_cast<std::size_t>(std::lround(*config.train_fraction * static_cast<double>(rc.n)));
  } else {
    rc.train_size = default_train_size(rc.n);
  }
  if (rc.train_size >= rc.n) throw Error("training size must be smaller than the sample size");
  rc.test_size = rc.n - rc.train_size;

  auto& pc = rc.partition;
  pc.k = config.k;
  pc.n_min = config.n_min.value_or(std::max<std::size_t>(rc.n / 10, 1));
  switch (config.strategy) {
    case PartitionStrategy::Covariates:
      pc.continuous = config.continuous.empty() ? data.names(ColumnKind::Continuous) : config.continuous;
      pc.discrete = config.discrete.empty() ? data.names(ColumnKind::Discrete) : config.discrete;
      if (!config.score_column.empty()) pc.score = config.score_column;
      break;
    case PartitionStrategy::ScoreQuantiles:
      if (config.score_column.empty()) throw Error("score partition needs a score column");
      if (!data.column(config.score_column).has_numeric_values()) {
        throw Error("score column '" + config.score_column + "' is not numeric");
      }
      pc.score = config.score_column;
      break;
    case PartitionStrategy::MtaQuantiles:
      pc.score = kMtaScoreColumn;
      break;
  }
  for (const auto& c : pc.continuous) data.column(c);
  for (const auto& c : pc.discrete) data.column(c);
  pc.validate();

  if (config.strategy == PartitionStrategy::Covariates && rc.train_size < 2 * pc.n_min) {
    throw Error("training size " + std::to_string(rc.train_size) + " is below 2 * N_min = " +
                std::to_string(2 * pc.n_min));
  }
  if (rc.test_size < config.k) {
    throw Error("test size " + std::to_string(rc.test_size) + " is below K = " +
                std::to_string(config.k));
  }
  return rc;
}

std::vector<CovariateCount> partition_counts(const partition::Partition& part,
                                             std::optional<std::size_t> max_group) {
  std::map<std::string, CovariateCount> acc;
  for (std::size_t g = 0; g < part.size(); ++g) {
    for (const auto& rule : part.groups[g].rules) {
      auto& c = acc[rule.source];
      c.name = rule.source;
      ++c.total;
      if (max_group && *max_group == g) ++c.max_group;
    }
  }
  std::vector<CovariateCount> out;
  for (auto& [name, c] : acc) out.push_back(std::move(c));
  return out;
}

SplitOutcome single_split_test(const Dataset& data, const Formula& formula,
                               const TestConfig& config, RandomSource rng, std::size_t index) {
  const ResolvedConfig rc = resolve(config, data, formula);
  SplitOutcome out;
  out.index = index;
  out.stream_seed = rng.seed();

  auto perm = rng.permutation(rc.n);
  std::vector<std::size_t> train_idx(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(rc.train_size));
  std::vector<std::size_t> test_idx(perm.begin() + static_cast<std::ptrdiff_t>(rc.train_size), perm.end());
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  try {
    const Dataset train = data.subset(train_idx);
    Dataset test = data.subset(test_idx);
    const auto design_train = formula.design(train);
    const auto fit = glm::fit_logistic(design_train, train.response());
    out.converged = fit.converged;
    if (!fit.converged) throw Error("logistic fit did not converge on the training set");
    const auto phat_train = glm::predict_prob(fit, design_train);
    const auto design_test = formula.design(test);
    const auto phat_test = glm::predict_prob(fit, design_test);

    switch (config.strategy) {
      case PartitionStrategy::Covariates:
        out.partition = partition::greedy_partition(rc.partition, train, phat_train);
        break;
      case PartitionStrategy::ScoreQuantiles:
        out.partition = partition::probability_partition(
            train.column(config.score_column).values, config.k, config.score_column);
        break;
      case PartitionStrategy::MtaQuantiles:
        out.partition = partition::probability_partition(phat_train, config.k, kMtaScoreColumn);
        test.add_continuous(kMtaScoreColumn, phat_test);
        break;
    }

    const auto groups = partition::assign_groups(out.partition, test);
    const auto bag = bag_statistic(test.response(), phat_test, groups, out.partition.size());
    out.statistic = bag.statistic;
    out.groups = bag.realized_groups;
    out.contributions = bag.contributions;

    if (config.correction) {
      const auto corr = corrected_statistic(bag.statistic, fit, design_test, test.response(),
                                            groups, out.partition.size());
      out.adjusted_statistic = corr.adjusted;
      out.standard_error = corr.standard_error;
      out.singular_information = corr.singular_information;
    } else {
      out.adjusted_statistic = bag.statistic;
    }
    out.p_value = numkit::chi2_sf(out.adjusted_statistic, static_cast<unsigned>(out.groups));
    out.max_group = static_cast<std::size_t>(
        std::max_element(bag.contributions.begin(), bag.contributions.end()) -
        bag.contributions.begin());
    out.counts = partition_counts(out.partition, out.max_group);
    out.ok = true;
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
  }
  return out;
}

double median_threshold(std::size_t splits, double alpha) {
  return 0.5 + numkit::gaussian_quantile(alpha) * std::sqrt(1.0 / (12.0 * static_cast<double>(splits)));
}

MedianDecision median_rule(std::span<const double> p_values, std::size_t splits, double alpha) {
  MedianDecision d;
  d.threshold = median_threshold(splits, alpha);
  if (p_values.empty()) return d;
  std::vector<double> sorted(p_values.begin(), p_values.end());
  std::sort(sorted.begin(), sorted.end());
  d.median_p = sorted[(sorted.size() - 1) / 2];
  d.reject = d.median_p < d.threshold;
  return d;
}

std::vector<CovariateCount> covariate_counts(std::span<const SplitOutcome> outcomes) {
  std::map<std::string, CovariateCount> acc;
  for (const auto& o : outcomes) {
    if (!o.ok) continue;
    for (const auto& c : o.counts) {
      auto& a = acc[c.name];
      a.name = c.name;
      a.total += c.total;
      a.max_group += c.max_group;
    }
  }
  std::vector<CovariateCount> out;
  for (auto& [name, c] : acc) out.push_back(std::move(c));
  std::stable_sort(out.begin(), out.end(), [](const CovariateCount& a, const CovariateCount& b) {
    return a.total > b.total;
  });
  return out;
}

TestReport multi_split_test(const Dataset& data, const Formula& formula, const TestConfig& config,
                            const RandomSource& rng) {
  TestReport report;
  report.config = config;
  report.resolved = resolve(config, data, formula);
  report.formula = formula.canonical();
  report.seed = rng.seed();
  report.outcomes.resize(config.splits);

  auto run = [&](std::size_t i) {
    report.outcomes[i] = single_split_test(data, formula, config, rng.child(i), i);
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(config.threads,
                                                           static_cast<unsigned>(config.splits)));
  if (threads == 1) {
    for (std::size_t i = 0; i < config.splits; ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < config.splits;) run(i);
      });
    }
  }

  std::vector<double> p_values;
  for (const auto& o : report.outcomes) {
    if (o.ok) {
      p_values.push_back(o.p_value);
    } else {
      ++report.failed;
    }
  }
  report.inconclusive = 2 * report.failed > config.splits;
  report.decision = median_rule(p_values, config.splits, config.alpha);
  if (report.inconclusive) report.decision.reject = false;
  report.ranking = covariate_counts(report.outcomes);
  return report;
}

}  // namespace bagoft::gof
