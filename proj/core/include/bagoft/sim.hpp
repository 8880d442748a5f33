#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bagoft/dataset.hpp"
#include "bagoft/error.hpp"
#include "bagoft/formula.hpp"
#include "bagoft/gof.hpp"
#include "bagoft/random.hpp"

namespace bagoft::sim {

enum class Distribution { Uniform, Gaussian, ChiSquared, Bernoulli, Product, Square };

/// How one covariate column is drawn. Product and Square are derived from
/// previously drawn columns.
struct CovariateSpec {
  std::string name;
  Distribution distribution = Distribution::Uniform;
  double a = 0.0;  // Uniform: low; Gaussian: mean; Bernoulli: p
  double b = 0.0;  // Uniform: high; Gaussian: variance
  unsigned df = 0;
  std::string lhs, rhs;  // Product: lhs*rhs; Square: lhs^2

  static CovariateSpec uniform(std::string name, double lo, double hi);
  static CovariateSpec gaussian(std::string name, double mean, double variance);
  static CovariateSpec chi_squared(std::string name, unsigned df);
  static CovariateSpec bernoulli(std::string name, double p);
  static CovariateSpec product(std::string name, std::string lhs, std::string rhs);
  static CovariateSpec square(std::string name, std::string of);
};

enum class Model { A, B };
std::string to_string(Model m);

/// A data-generating design plus the correct (A) and lack-of-fit (B) models.
struct SettingSpec {
  std::string id;       // "1".."5" or "nn"
  std::string variant;  // e.g. "beta3=0.651", "chi2_df=4"
  std::size_t n = 0;
  std::vector<CovariateSpec> covariates;
  Formula true_logit;
  std::vector<double> coefficients;  // intercept first, then true_logit terms
  Formula model_a;
  Formula model_b;
  /// Overrides the default training-set size for BAGofT.
  std::optional<std::size_t> train_size;

  const Formula& model(Model m) const { return m == Model::A ? model_a : model_b; }
  std::string label() const { return "setting" + id + "/" + variant + "/n=" + std::to_string(n); }
  /// Throws Error when inconsistent.
  void validate() const;
};

class UnknownSettingError : public Error {
 public:
  explicit UnknownSettingError(const std::string& id) : Error("unknown setting '" + id + "'") {}
};

/// Missing main effect: x1 ~ U(-3,3), x2 ~ N(0,2.25), x3 ~ chi2_4.
SettingSpec setting1(std::size_t n, double beta3, double beta0 = 0.0);
/// Missing interaction: x1, x2 ~ U(-3,3), x3 = x1 x2.
SettingSpec setting2(std::size_t n, double beta3, double beta0 = 0.0);
/// Missing quadratic: x1 ~ U(-3,3), x2 ~ N(0,2.25), x3 ~ chi2_df, x4 = x1^2.
SettingSpec setting3(std::size_t n, unsigned chi_df);
/// Two-covariate version of setting 1; the model omits x2 ~ chi2_4.
SettingSpec setting4(std::size_t n);
/// Two-covariate version of setting 3; x2 ~ chi2_2.
SettingSpec setting5(std::size_t n);
/// Seven covariates with a quartic term in x7 that model B omits.
SettingSpec nn_example(std::size_t n);

/// Every variant the experiment tables report for one setting id.
std::vector<SettingSpec> standard_variants(const std::string& id, std::size_t n);

struct Generated {
  Dataset data;
  std::vector<double> true_prob;
};

/// Draws covariates, the true logit and Bernoulli responses.
Generated generate(const SettingSpec& setting, RandomSource& rng);

/// Copy of `data` with a score column in [0, 1] attached as a continuous
/// column. Throws Error on a length or range violation.
Dataset score_injection(Dataset data, const std::string& name, std::span<const double> scores);

struct Method {
  enum class Kind { HosmerLemeshow, Bagoft };
  std::string name;
  Kind kind = Kind::Bagoft;
  std::size_t hl_groups = 10;
  gof::TestConfig config;
  /// Attach the true probabilities as this score column before testing.
  std::optional<std::string> true_prob_score;

  static Method hosmer_lemeshow(std::size_t groups = 10);
  static Method bagoft(gof::TestConfig config = {}, std::string name = "BAG");
};

struct ExperimentResult {
  std::string setting;
  std::string variant;
  std::size_t n = 0;
  Model model = Model::A;
  std::string method;
  std::size_t rejections = 0;
  std::size_t failed = 0;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;

  /// Rejections over completed replications.
  double rate() const noexcept {
    const auto done = reps - failed;
    return done ? static_cast<double>(rejections) / static_cast<double>(done) : 0.0;
  }
};

struct ExperimentOptions {
  std::size_t reps = 500;
  std::uint64_t seed = 1;
  std::vector<Model> models{Model::A, Model::B};
  double alpha = 0.05;
  unsigned threads = 1;
};

/// For every setting and replication: generate data, fit each requested
/// model, run each method and record the decision at level alpha. Data for
/// replication r of a setting come from rng.child(setting.label()).child(r),
/// so results do not depend on thread count or on the other settings.
std::vector<ExperimentResult> run_experiment(std::span<const SettingSpec> settings,
                                             std::span<const Method> methods,
                                             const ExperimentOptions& options);

/// Long-format CSV: setting,n,variant,model,method,rate,rejections,failed,reps,seed.
void write_results_csv(std::span<const ExperimentResult> results, std::ostream& out);

/// Table layout mirroring the published rate tables (one row per variant/n).
std::string format_results_table(std::span<const ExperimentResult> results);

struct SurfacePoint {
  double x1 = 0.0;
  double x2 = 0.0;
  double true_prob = 0.0;
  double fitted_prob = 0.0;
  std::size_t group = 0;
};

/// Plot-ready surface for two-covariate settings (4 and 5): one split's
/// fitted model and selected partition evaluated on a grid x grid lattice
/// spanning the observed covariate ranges.
std::vector<SurfacePoint> surface_table(const SettingSpec& setting, const gof::TestConfig& config,
                                        std::size_t grid, RandomSource& rng);

void write_surface_csv(std::span<const SurfacePoint> points, std::ostream& out);

}  // namespace bagoft::sim
