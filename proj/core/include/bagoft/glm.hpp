#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "bagoft/error.hpp"

namespace bagoft::glm {

/// Lower clamp for predicted probabilities; the upper clamp is 1 - kProbClamp.
inline constexpr double kProbClamp = 1e-10;
inline constexpr int kMaxIterations = 100;
inline constexpr double kGradientTolerance = 1e-8;  // scaled by n
inline constexpr double kPivotTolerance = 1e-12;    // relative

/// Design matrix with a leading intercept column of ones.
struct DesignMatrix {
  Eigen::MatrixXd x;
  std::vector<std::string> names;

  Eigen::Index rows() const noexcept { return x.rows(); }
  Eigen::Index cols() const noexcept { return x.cols(); }
};

/// Intercept-only design with n rows.
DesignMatrix intercept_only(std::size_t n);

struct FittedGlm {
  Eigen::VectorXd coefficients;
  std::vector<std::string> names;
  bool converged = false;
  int iterations = 0;
  double log_likelihood = 0.0;
  /// Log-likelihood at the start and after every accepted step.
  std::vector<double> log_likelihood_trace;
  /// Observed Fisher information X' W X at the returned coefficients.
  Eigen::MatrixXd information;
};

class SingleClassError : public Error {
 public:
  SingleClassError() : Error("response has a single class; logistic fit is undefined") {}
};

class RankDeficientError : public Error {
 public:
  RankDeficientError() : Error("design is rank deficient (singular weighted normal equations)") {}
};

/// Rounding bound n * eps * (1 + |ll|) on a summed log-likelihood. IRLS
/// treats decreases within it as no change.
double likelihood_rounding(double log_likelihood, std::size_t n) noexcept;

/// Maximum-likelihood logistic regression by Newton-Raphson (IRLS) with step
/// halving. Stops when max |gradient| <= 1e-8 * n or after 100 iterations, in
/// which case `converged` is false.
FittedGlm fit_logistic(const DesignMatrix& design, std::span<const int> y);

/// Clamped logistic(X beta).
std::vector<double> predict_prob(const Eigen::VectorXd& coefficients, const Eigen::MatrixXd& x);
std::vector<double> predict_prob(const FittedGlm& model, const DesignMatrix& design);

inline double clamp_prob(double p) noexcept {
  return p < kProbClamp ? kProbClamp : (p > 1.0 - kProbClamp ? 1.0 - kProbClamp : p);
}

/// X' W X with W_ii = p_i (1 - p_i) evaluated at the model's coefficients.
Eigen::MatrixXd observed_information(const FittedGlm& model, const DesignMatrix& design);

/// Bernoulli log-likelihood of coefficients on (X, y), computed stably.
double log_likelihood(const Eigen::VectorXd& coefficients, const Eigen::MatrixXd& x,
                      std::span<const int> y);

}  // namespace bagoft::glm
