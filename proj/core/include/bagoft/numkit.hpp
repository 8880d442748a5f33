#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace bagoft::numkit {

/// Upper-tail probability P(X > x) for X ~ chi-squared with `df` degrees of
/// freedom. Computed from the regularized incomplete gamma function.
/// Throws std::domain_error for x < 0 or df == 0.
double chi2_sf(double x, unsigned df);

/// Lower-tail probability P(X <= x), the complement of chi2_sf.
double chi2_cdf(double x, unsigned df);

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double regularized_gamma_q(double a, double x);

/// Standard normal CDF.
double gaussian_cdf(double z);

/// Inverse standard normal CDF. Throws std::domain_error outside (0, 1).
double gaussian_quantile(double p);

/// Lower empirical quantile: the smallest sample value v such that at least a
/// fraction p of the samples are <= v. `sorted` must be ascending.
double lower_quantile_sorted(std::span<const double> sorted, double p);

/// Lower empirical quantiles of `values` at each probability in `probs`.
/// Throws std::invalid_argument on empty input or probabilities outside (0,1).
std::vector<double> empirical_quantiles(std::span<const double> values,
                                        std::span<const double> probs);

/// Numerically stable logistic function.
inline double logistic(double eta) {
  if (eta >= 0.0) {
    const double e = std::exp(-eta);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

}  // namespace bagoft::numkit
