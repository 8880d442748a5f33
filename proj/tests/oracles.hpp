#pragma once

// Reference computations used only by tests. Each one is written from the
// definition, independently of the library routine it checks.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bagoft/dataset.hpp"
#include "bagoft/partition.hpp"

namespace oracle {

std::string fixture_path(const std::string& name);

/// Numeric CSV reader (header + numbers only).
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<double> column(const std::string& name) const;
};
Table read_table(const std::string& path);

/// Lower regularized incomplete gamma by its power series, in long double.
long double gamma_p_series(long double a, long double x);
double chi2_sf(double x, unsigned df);
double chi2_cdf(double x, unsigned df);
/// Upper-tail critical value by bisection on chi2_sf.
double chi2_critical(double alpha, unsigned df);

/// erf by its Maclaurin series.
long double erf_series(long double x);
double normal_cdf(double z);
/// Inverse of normal_cdf by bisection.
double normal_quantile(double p);

/// Smallest sample value v with #{x <= v} >= p * n, by counting.
double lower_quantile_by_count(std::span<const double> values, double p);

/// Bernoulli log-likelihood evaluated term by term.
double log_likelihood(const Eigen::VectorXd& beta, const Eigen::MatrixXd& x, std::span<const int> y);

/// Maximizer of the log-likelihood by coarse-to-fine grid search.
Eigen::VectorXd grid_search_mle(const Eigen::MatrixXd& x, std::span<const int> y);

/// Central-difference Hessian of f.
Eigen::MatrixXd fd_hessian(const std::function<double(const Eigen::VectorXd&)>& f,
                           const Eigen::VectorXd& at, double h);

/// Central differences at h and h/2 combined by Richardson extrapolation.
Eigen::VectorXd richardson_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& at, double h);

/// Hosmer-Lemeshow statistic: quantile-interval groups built by counting,
/// then summed group by group. `groups_used` receives the non-empty count.
double hl_statistic(std::span<const int> y, std::span<const double> phat, std::size_t k,
                    std::size_t* groups_used = nullptr);

/// Sum over groups of squared residual sums over variance sums.
double grouped_statistic(std::span<const int> y, std::span<const double> phat,
                         std::span<const std::size_t> group, std::size_t k);

/// Group of one row found by evaluating every rule field by field, or -1 when
/// the row matches no group or more than one.
long predicate_group(const bagoft::partition::Partition& partition, const bagoft::Dataset& data,
                     std::size_t row);

/// Kolmogorov-Smirnov distance between a sample and the chi-squared law.
double ks_distance_chi2(std::vector<double> sample, unsigned df);

}  // namespace oracle
