#include "bagoft/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "bagoft/csv.hpp"
#include "bagoft/glm.hpp"
#include "bagoft/numkit.hpp"
#include "bagoft/partition.hpp"

namespace bagoft::sim {
namespace {

std::string fmt_param(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

enum class Status : unsigned char { Accept, Reject, Failed };

Status run_hl(const Dataset& data, const Formula& formula, std::size_t groups, double alpha) {
  try {
    const auto design = formula.design(data);
    const auto fit = glm::fit_logistic(design, data.response());
    if (!fit.converged) return Status::Failed;
    const auto phat = glm::predict_prob(fit, design);
    const auto hl = gof::hl_test(data.response(), phat, groups);
    return hl.p_value < alpha ? Status::Reject : Status::Accept;
  } catch (const Error&) {
    return Status::Failed;
  }
}

Status run_bag(const Generated& gen, const SettingSpec& setting, const Formula& formula,
               const Method& method, double alpha, const RandomSource& rng) {
  try {
    gof::TestConfig config = method.config;
    config.alpha = alpha;
    config.threads = 1;
    if (!config.train_size && !config.train_fraction && setting.train_size) {
      config.train_size = setting.train_size;
    }
    gof::TestReport report;
    if (method.true_prob_score) {
      const Dataset scored = score_injection(gen.data, *method.true_prob_score, gen.true_prob);
      report = gof::multi_split_test(scored, formula, config, rng);
    } else {
      report = gof::multi_split_test(gen.data, formula, config, rng);
    }
    if (report.inconclusive) return Status::Failed;
    return report.decision.reject ? Status::Reject : Status::Accept;
  } catch (const Error&) {
    return Status::Failed;
  }
}

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) fn(i);
    });
  }
}

}  // namespace

CovariateSpec CovariateSpec::uniform(std::string name, double lo, double hi) {
  return {std::move(name), Distribution::Uniform, lo, hi, 0, {}, {}};
}
CovariateSpec CovariateSpec::gaussian(std::string name, double mean, double variance) {
  return {std::move(name), Distribution::Gaussian, mean, variance, 0, {}, {}};
}
CovariateSpec CovariateSpec::chi_squared(std::string name, unsigned df) {
  return {std::move(name), Distribution::ChiSquared, 0.0, 0.0, df, {}, {}};
}
CovariateSpec CovariateSpec::bernoulli(std::string name, double p) {
  return {std::move(name), Distribution::Bernoulli, p, 0.0, 0, {}, {}};
}
CovariateSpec CovariateSpec::product(std::string name, std::string lhs, std::string rhs) {
  return {std::move(name), Distribution::Product, 0.0, 0.0, 0, std::move(lhs), std::move(rhs)};
}
CovariateSpec CovariateSpec::square(std::string name, std::string of) {
  return {std::move(name), Distribution::Square, 0.0, 0.0, 0, std::move(of), {}};
}

std::string to_string(Model m) { return m == Model::A ? "A" : "B"; }

void SettingSpec::validate() const {
  if (n < 50) throw Error(label() + ": n must be at least 50");
  if (coefficients.size() != true_logit.terms().size() + 1) {
    throw Error(label() + ": coefficient count does not match the true logit");
  }
  std::vector<std::string> names;
  for (const auto& c : covariates) {
    if (c.distribution == Distribution::Product || c.distribution == Distribution::Square) {
      for (const auto* dep : {&c.lhs, &c.rhs}) {
        if (dep->empty()) continue;
        if (std::find(names.begin(), names.end(), *dep) == names.end()) {
          throw Error(label() + ": derived column '" + c.name + "' uses undefined '" + *dep + "'");
        }
      }
    }
    names.push_back(c.name);
  }
  for (const auto* f : {&true_logit, &model_a, &model_b}) {
    for (const auto& col : f->columns()) {
      if (std::find(names.begin(), names.end(), col) == names.end()) {
        throw Error(label() + ": formula references unknown covariate '" + col + "'");
      }
    }
  }
}

SettingSpec setting1(std::size_t n, double beta3, double beta0) {
  SettingSpec s;
  s.id = "1";
  s.variant = "beta3=" + fmt_param(beta3);
  s.n = n;
  s.covariates = {CovariateSpec::uniform("x1", -3, 3), CovariateSpec::gaussian("x2", 0, 2.25),
                  CovariateSpec::chi_squared("x3", 4)};
  s.true_logit = Formula::parse("x1 + x2 + x3");
  s.coefficients = {beta0, 0.267, 0.267, beta3};
  s.model_a = Formula::parse("x1 + x2 + x3");
  s.model_b = Formula::parse("x1 + x2");
  return s;
}

SettingSpec setting2(std::size_t n, double beta3, double beta0) {
  SettingSpec s;
  s.id = "2";
  s.variant = "beta3=" + fmt_param(beta3);
  s.n = n;
  s.covariates = {CovariateSpec::uniform("x1", -3, 3), CovariateSpec::uniform("x2", -3, 3),
                  CovariateSpec::product("x3", "x1", "x2")};
  s.true_logit = Formula::parse("x1 + x2 + x1*x2");
  s.coefficients = {beta0, 0.3, 0.3, beta3};
  s.model_a = Formula::parse("x1 + x2 + x1*x2");
  s.model_b = Formula::parse("x1 + x2");
  return s;
}

SettingSpec setting3(std::size_t n, unsigned chi_df) {
  SettingSpec s;
  s.id = "3";
  s.variant = "chi2_df=" + std::to_string(chi_df);
  s.n = n;
  s.covariates = {CovariateSpec::uniform("x1", -3, 3), CovariateSpec::gaussian("x2", 0, 2.25),
                  CovariateSpec::chi_squared("x3", chi_df), CovariateSpec::square("x4", "x1")};
  s.true_logit = Formula::parse("x1 + x2 + x3 + x1^2");
  s.coefficients = {-2.0, 0.3, 0.3, 0.3, 0.3};
  s.model_a = Formula::parse("x1 + x2 + x3 + x1^2");
  s.model_b = Formula::parse("x1 + x2 + x3");
  return s;
}

SettingSpec setting4(std::size_t n) {
  SettingSpec s;
  s.id = "4";
  s.variant = "base";
  s.n = n;
  s.covariates = {CovariateSpec::gaussian("x1", 0, 2.25), CovariateSpec::chi_squared("x2", 4)};
  s.true_logit = Formula::parse("x1 + x2");
  s.coefficients = {0.0, 0.267, 0.267};
  s.model_a = Formula::parse("x1 + x2");
  s.model_b = Formula::parse("x1");
  return s;
}

SettingSpec setting5(std::size_t n) {
  SettingSpec s;
  s.id = "5";
  s.variant = "base";
  s.n = n;
  s.covariates = {CovariateSpec::uniform("x1", -3, 3), CovariateSpec::chi_squared("x2", 2)};
  s.true_logit = Formula::parse("x1 + x2 + x1^2");
  s.coefficients = {-2.0, 0.3, 0.3, 0.3};
  s.model_a = Formula::parse("x1 + x2 + x1^2");
  s.model_b = Formula::parse("x1 + x2");
  return s;
}

SettingSpec nn_example(std::size_t n) {
  SettingSpec s;
  s.id = "nn";
  s.variant = "base";
  s.n = n;
  s.covariates = {CovariateSpec::uniform("x1", -3, 3),  CovariateSpec::uniform("x2", -3, 3),
                  CovariateSpec::gaussian("x3", 0, 2.25), CovariateSpec::gaussian("x4", 0, 2.25),
                  CovariateSpec::chi_squared("x5", 4),   CovariateSpec::bernoulli("x6", 0.5),
                  CovariateSpec::gaussian("x7", 0, 4)};
  s.true_logit = Formula::parse("x1 + x2 + x3 + x4 + x5 + x6 + x7 + x7^4");
  s.coefficients = {-0.15, 0.3, 0.3, 0.1, 0.2, 0.2, 0.3, 0.3, 3.0};
  s.model_a = Formula::parse("x1 + x2 + x3 + x4 + x5 + x6 + x7 + x7^4");
  s.model_b = Formula::parse("x1 + x2 + x3 + x4 + x5 + x6 + x7");
  return s;
}

std::vector<SettingSpec> standard_variants(const std::string& id, std::size_t n) {
  if (id == "1") return {setting1(n, 0.217), setting1(n, 0.651)};
  if (id == "2") return {setting2(n, 0.5), setting2(n, 0.8)};
  if (id == "3") return {setting3(n, 4), setting3(n, 8)};
  if (id == "4") return {setting4(n)};
  if (id == "5") return {setting5(n)};
  if (id == "nn") return {nn_example(n)};
  throw UnknownSettingError(id);
}

Generated generate(const SettingSpec& setting, RandomSource& rng) {
  setting.validate();
  const std::size_t n = setting.n;
  std::map<std::string, std::vector<double>> drawn;
  std::vector<std::pair<std::string, bool>> order;  // name, discrete

  for (const auto& c : setting.covariates) {
    std::vector<double> v(n);
    bool discrete = false;
    switch (c.distribution) {
      case Distribution::Uniform:
        for (auto& x : v) x = rng.uniform(c.a, c.b);
        break;
      case Distribution::Gaussian: {
        const double sd = std::sqrt(c.b);
        for (auto& x : v) x = rng.gaussian(c.a, sd);
        break;
      }
      case Distribution::ChiSquared:
        for (auto& x : v) x = rng.chi_squared(c.df);
        break;
      case Distribution::Bernoulli:
        for (auto& x : v) x = rng.bernoulli(c.a) ? 1.0 : 0.0;
        discrete = true;
        break;
      case Distribution::Product: {
        const auto& l = drawn.at(c.lhs);
        const auto& r = drawn.at(c.rhs);
        for (std::size_t i = 0; i < n; ++i) v[i] = l[i] * r[i];
        break;
      }
      case Distribution::Square: {
        const auto& l = drawn.at(c.lhs);
        for (std::size_t i = 0; i < n; ++i) v[i] = l[i] * l[i];
        break;
      }
    }
    drawn[c.name] = std::move(v);
    order.emplace_back(c.name, discrete);
  }

  // Covariates first, responses second, so the covariate stream is shared
  // between models and coefficient variants.
  Dataset covariates_only("y", std::vector<int>(n, 0));
  for (const auto& [name, discrete] : order) {
    if (discrete) {
      std::vector<std::string> labels(n);
      const auto& v = drawn[name];
      for (std::size_t i = 0; i < n; ++i) labels[i] = v[i] != 0.0 ? "1" : "0";
      covariates_only.add_discrete(name, std::move(labels));
    } else {
      covariates_only.add_continuous(name, drawn[name]);
    }
  }
  const auto design = setting.true_logit.design(covariates_only);
  Eigen::VectorXd beta(static_cast<Eigen::Index>(setting.coefficients.size()));
  for (std::size_t j = 0; j < setting.coefficients.size(); ++j) {
    beta[static_cast<Eigen::Index>(j)] = setting.coefficients[j];
  }
  const Eigen::VectorXd eta = design.x * beta;

  Generated out;
  out.true_prob.resize(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.true_prob[i] = numkit::logistic(eta[static_cast<Eigen::Index>(i)]);
    y[i] = rng.bernoulli(out.true_prob[i]) ? 1 : 0;
  }
  out.data = Dataset("y", std::move(y));
  for (const auto& c : covariates_only.columns()) {
    if (c.kind == ColumnKind::Discrete) {
      out.data.add_discrete(c.name, c.labels);
    } else {
      out.data.add_continuous(c.name, c.values);
    }
  }
  return out;
}

Dataset score_injection(Dataset data, const std::string& name, std::span<const double> scores) {
  if (scores.size() != data.rows()) {
    throw DimensionError("score column '" + name + "' has " + std::to_string(scores.size()) +
                         " values, dataset has " + std::to_string(data.rows()) + " rows");
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!(scores[i] >= 0.0 && scores[i] <= 1.0)) {
      throw Error("score column '" + name + "' value at row " + std::to_string(i + 1) +
                  " lies outside [0, 1]");
    }
  }
  data.add_continuous(name, std::vector<double>(scores.begin(), scores.end()));
  return data;
}

Method Method::hosmer_lemeshow(std::size_t groups) {
  Method m;
  m.name = "HL";
  m.kind = Kind::HosmerLemeshow;
  m.hl_groups = groups;
  return m;
}

Method Method::bagoft(gof::TestConfig config, std::string name) {
  Method m;
  m.name = std::move(name);
  m.kind = Kind::Bagoft;
  m.config = std::move(config);
  return m;
}

std::vector<ExperimentResult> run_experiment(std::span<const SettingSpec> settings,
                                             std::span<const Method> methods,
                                             const ExperimentOptions& options) {
  if (options.reps < 1) throw Error("run_experiment: reps must be at least 1");
  for (const auto& s : settings) s.validate();
  const RandomSource root(options.seed);
  const std::size_t cells = options.models.size() * methods.size();
  const std::size_t jobs = settings.size() * options.reps;
  std::vector<Status> status(jobs * cells, Status::Failed);
  std::vector<double> job_seconds(jobs, 0.0);

  parallel_for(jobs, options.threads, [&](std::size_t job) {
    const auto t0 = std::chrono::steady_clock::now();
    const SettingSpec& setting = settings[job / options.reps];
    const std::size_t rep = job % options.reps;
    const RandomSource rep_rng = root.child(setting.label()).child(rep);
    RandomSource data_rng = rep_rng.child("data");
    const RandomSource test_rng = rep_rng.child("test");
    const Generated gen = generate(setting, data_rng);
    for (std::size_t m = 0; m < options.models.size(); ++m) {
      const Formula& formula = setting.model(options.models[m]);
      for (std::size_t k = 0; k < methods.size(); ++k) {
        const Method& method = methods[k];
        status[job * cells + m * methods.size() + k] =
            method.kind == Method::Kind::HosmerLemeshow
                ? run_hl(gen.data, formula, method.hl_groups, options.alpha)
                : run_bag(gen, setting, formula, method, options.alpha, test_rng.child(method.name));
      }
    }
    job_seconds[job] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  });

  std::vector<ExperimentResult> results;
  for (std::size_t s = 0; s < settings.size(); ++s) {
    double seconds = 0.0;
    for (std::size_t r = 0; r < options.reps; ++r) seconds += job_seconds[s * options.reps + r];
    for (std::size_t m = 0; m < options.models.size(); ++m) {
      for (std::size_t k = 0; k < methods.size(); ++k) {
        ExperimentResult res;
        res.setting = settings[s].id;
        res.variant = settings[s].variant;
        res.n = settings[s].n;
        res.model = options.models[m];
        res.method = methods[k].name;
        res.reps = options.reps;
        res.seed = options.seed;
        res.wall_seconds = seconds;
        for (std::size_t r = 0; r < options.reps; ++r) {
          const Status st = status[(s * options.reps + r) * cells + m * methods.size() + k];
          if (st == Status::Reject) ++res.rejections;
          if (st == Status::Failed) ++res.failed;
        }
        results.push_back(std::move(res));
      }
    }
  }
  return results;
}

void write_results_csv(std::span<const ExperimentResult> results, std::ostream& out) {
  out << "setting,n,variant,model,method,rate,rejections,failed,reps,seed\n";
  for (const auto& r : results) {
    out << r.setting << ',' << r.n << ',' << r.variant << ',' << to_string(r.model) << ','
        << r.method << ',' << format_double(r.rate()) << ',' << r.rejections << ',' << r.failed
        << ',' << r.reps << ',' << r.seed << '\n';
  }
}

std::string format_results_table(std::span<const ExperimentResult> results) {
  // Column per method/model, "0" = correct model (A), "1" = lack of fit (B).
  std::vector<std::string> columns;
  std::vector<std::string> rows;
  std::map<std::pair<std::string, std::string>, double> cell;
  for (const auto& r : results) {
    const std::string col = r.method + (r.model == Model::A ? "0" : "1");
    const std::string row = "setting " + r.setting + "  " + r.variant + "  n=" + std::to_string(r.n);
    if (std::find(columns.begin(), columns.end(), col) == columns.end()) columns.push_back(col);
    if (std::find(rows.begin(), rows.end(), row) == rows.end()) rows.push_back(row);
    cell[{row, col}] = r.rate();
  }
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width)) << "" << std::right;
  for (const auto& c : columns) out << std::setw(10) << c;
  out << '\n';
  for (const auto& r : rows) {
    out << std::left << std::setw(static_cast<int>(width)) << r << std::right;
    for (const auto& c : columns) {
      auto it = cell.find({r, c});
      if (it == cell.end()) {
        out << std::setw(10) << "-";
      } else {
        out << std::setw(10) << std::fixed << std::setprecision(3) << it->second;
      }
    }
    out << '\n';
  }
  return out.str();
}

std::vector<SurfacePoint> surface_table(const SettingSpec& setting, const gof::TestConfig& config,
                                        std::size_t grid, RandomSource& rng) {
  if (grid < 2) throw Error("surface_table: grid must have at least 2 points per axis");
  RandomSource data_rng = rng.child("data");
  const Generated gen = generate(setting, data_rng);
  const Dataset& data = gen.data;
  if (data.columns().size() != 2 || !data.has("x1") || !data.has("x2")) {
    throw Error("surface_table: setting must have exactly the covariates x1 and x2");
  }
  gof::TestConfig cfg = config;
  cfg.strategy = gof::PartitionStrategy::Covariates;
  if (!cfg.train_size && !cfg.train_fraction && setting.train_size) cfg.train_size = setting.train_size;
  const auto rc = gof::resolve(cfg, data, setting.model_b);

  RandomSource split_rng = rng.child("split");
  auto perm = split_rng.permutation(rc.n);
  std::vector<std::size_t> train_idx(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(rc.train_size));
  std::sort(train_idx.begin(), train_idx.end());
  const Dataset train = data.subset(train_idx);
  const auto design = setting.model_b.design(train);
  const auto fit = glm::fit_logistic(design, train.response());
  const auto phat = glm::predict_prob(fit, design);
  const auto part = partition::greedy_partition(rc.partition, train, phat);

  const auto& x1 = data.column("x1").values;
  const auto& x2 = data.column("x2").values;
  const auto [x1_lo, x1_hi] = std::minmax_element(x1.begin(), x1.end());
  const auto [x2_lo, x2_hi] = std::minmax_element(x2.begin(), x2.end());
  std::vector<double> g1, g2;
  for (std::size_t i = 0; i < grid; ++i) {
    for (std::size_t j = 0; j < grid; ++j) {
      const double u = static_cast<double>(i) / static_cast<double>(grid - 1);
      const double v = static_cast<double>(j) / static_cast<double>(grid - 1);
      g1.push_back(*x1_lo + u * (*x1_hi - *x1_lo));
      g2.push_back(*x2_lo + v * (*x2_hi - *x2_lo));
    }
  }
  Dataset lattice("y", std::vector<int>(g1.size(), 0));
  lattice.add_continuous("x1", g1);
  lattice.add_continuous("x2", g2);
  const auto fitted = glm::predict_prob(fit, setting.model_b.design(lattice));
  const auto groups = partition::assign_groups(part, lattice);
  const auto true_design = setting.true_logit.design(lattice);
  Eigen::VectorXd beta(static_cast<Eigen::Index>(setting.coefficients.size()));
  for (std::size_t j = 0; j < setting.coefficients.size(); ++j) {
    beta[static_cast<Eigen::Index>(j)] = setting.coefficients[j];
  }
  const Eigen::VectorXd eta = true_design.x * beta;

  std::vector<SurfacePoint> out(g1.size());
  for (std::size_t i = 0; i < g1.size(); ++i) {
    out[i] = {g1[i], g2[i], numkit::logistic(eta[static_cast<Eigen::Index>(i)]), fitted[i], groups[i]};
  }
  return out;
}

void write_surface_csv(std::span<const SurfacePoint> points, std::ostream& out) {
  out << "x1,x2,true_p,fitted_p,group\n";
  for (const auto& p : points) {
    out << format_double(p.x1) << ',' << format_double(p.x2) << ',' << format_double(p.true_prob)
        << ',' << format_double(p.fitted_prob) << ',' << (p.group + 1) << '\n';
  }
}

}  // namespace bagoft::sim
