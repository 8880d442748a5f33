#include "bagoft/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "bagoft/numkit.hpp"

namespace bagoft::glm {
namespace {

void check_design(const DesignMatrix& design, std::size_t n) {
  if (design.cols() < 1) throw DimensionError("design matrix has no columns");
  if (static_cast<std::size_t>(design.rows()) != n) {
    throw DimensionError("design has " + std::to_string(design.rows()) + " rows, response has " +
                         std::to_string(n));
  }
  if (!design.x.allFinite()) throw Error("design matrix contains non-finite entries");
}

// log(1 + exp(eta)) without overflow.
double log1p_exp(double eta) {
  return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

// Solves H d = g for symmetric H. LLT first, then pivoted LDLT; returns
// nothing when the smallest pivot falls below the relative tolerance.
std::optional<Eigen::VectorXd> solve_normal(const Eigen::MatrixXd& h, const Eigen::VectorXd& g) {
  const double scale = h.diagonal().cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) return std::nullopt;
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  if (llt.info() == Eigen::Success) {
    const double min_pivot = llt.matrixL().toDenseMatrix().diagonal().cwiseAbs2().minCoeff();
    if (min_pivot > kPivotTolerance * scale) return llt.solve(g);
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
  if (ldlt.info() != Eigen::Success) return std::nullopt;
  if (ldlt.vectorD().cwiseAbs().minCoeff() <= kPivotTolerance * scale) return std::nullopt;
  return ldlt.solve(g);
}

}  // namespace

double likelihood_rounding(double log_likelihood, std::size_t n) noexcept {
  return static_cast<double>(n) * std::numeric_limits<double>::epsilon() * (1.0 + std::fabs(log_likelihood));
}

DesignMatrix intercept_only(std::size_t n) {
  return DesignMatrix{Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(n), 1), {"(Intercept)"}};
}

double log_likelihood(const Eigen::VectorXd& coefficients, const Eigen::MatrixXd& x,
                      std::span<const int> y) {
  const Eigen::VectorXd eta = x * coefficients;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    ll += (y[static_cast<std::size_t>(i)] ? eta[i] : 0.0) - log1p_exp(eta[i]);
  }
  return ll;
}

FittedGlm fit_logistic(const DesignMatrix& design, std::span<const int> y) {
  const std::size_t n = y.size();
  check_design(design, n);
  const auto ones = std::count(y.begin(), y.end(), 1);
  if (static_cast<std::size_t>(ones + std::count(y.begin(), y.end(), 0)) != n) {
    throw Error("response must be coded 0/1");
  }
  if (ones == 0 || static_cast<std::size_t>(ones) == n) throw SingleClassError();
  if (design.rows() < design.cols()) throw RankDeficientError();

  const Eigen::MatrixXd& x = design.x;
  const Eigen::Index p = x.cols();
  Eigen::VectorXd yv(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) yv[static_cast<Eigen::Index>(i)] = y[i];

  FittedGlm fit;
  fit.names = design.names;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  double ll = log_likelihood(beta, x, y);
  fit.log_likelihood_trace.push_back(ll);
  const double tol = kGradientTolerance * static_cast<double>(n);

  Eigen::VectorXd prob(static_cast<Eigen::Index>(n));
  Eigen::VectorXd weight(static_cast<Eigen::Index>(n));
  int iter = 0;
  for (;; ++iter) {
    const Eigen::VectorXd eta = x * beta;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      prob[i] = numkit::logistic(eta[i]);
      const double pc = clamp_prob(prob[i]);
      weight[i] = pc * (1.0 - pc);
    }
    const Eigen::VectorXd grad = x.transpose() * (yv - prob);
    if (grad.cwiseAbs().maxCoeff() <= tol) {
      fit.converged = true;
      break;
    }
    if (iter >= kMaxIterations) break;

    const Eigen::MatrixXd hess = x.transpose() * weight.asDiagonal() * x;
    auto step = solve_normal(hess, grad);
    if (!step) {
      // Singular at the start means the design itself is degenerate; later
      // singularity comes from weights collapsing under separation.
      if (iter == 0) throw RankDeficientError();
      break;
    }

    // Near the optimum a Newton step changes the log-likelihood by less than
    // its rounding error, so decreases within that error do not trigger halving.
    const double slack = likelihood_rounding(ll, n);
    double scale = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving) {
      Eigen::VectorXd candidate = beta + scale * *step;
      const double cand_ll = log_likelihood(candidate, x, y);
      if (std::isfinite(cand_ll) && cand_ll >= ll - slack) {
        beta = std::move(candidate);
        ll = cand_ll;
        fit.log_likelihood_trace.push_back(ll);
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (!accepted) break;
  }

  fit.coefficients = beta;
  fit.iterations = iter;
  fit.log_likelihood = ll;
  fit.information = x.transpose() * weight.asDiagonal() * x;
  return fit;
}

std::vector<double> predict_prob(const Eigen::VectorXd& coefficients, const Eigen::MatrixXd& x) {
  if (x.cols() != coefficients.size()) {
    throw DimensionError("design has " + std::to_string(x.cols()) + " columns, model has " +
                         std::to_string(coefficients.size()) + " coefficients");
  }
  const Eigen::VectorXd eta = x * coefficients;
  std::vector<double> out(static_cast<std::size_t>(eta.size()));
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    out[static_cast<std::size_t>(i)] = clamp_prob(numkit::logistic(eta[i]));
  }
  return out;
}

std::vector<double> predict_prob(const FittedGlm& model, const DesignMatrix& design) {
  return predict_prob(model.coefficients, design.x);
}

Eigen::MatrixXd observed_information(const FittedGlm& model, const DesignMatrix& design) {
  const auto prob = predict_prob(model, design);
  Eigen::VectorXd w(design.rows());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double pi = prob[static_cast<std::size_t>(i)];
    w[i] = pi * (1.0 - pi);
  }
  Eigen::MatrixXd j = design.x.transpose() * w.asDiagonal() * design.x;
  return 0.5 * (j + j.transpose());
}

}  // namespace bagoft::glm
