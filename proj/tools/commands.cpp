#include "commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bagoft/csv.hpp"
#include "bagoft/formula.hpp"
#include "bagoft/gof.hpp"
#include "bagoft/random.hpp"
#include "bagoft/report.hpp"
#include "bagoft/sim.hpp"
#include "json.hpp"

namespace bagoft::cli {
namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

struct Loaded {
  Dataset data;
  Formula formula;
  ReportMeta meta;
};

sim::Model parse_model(const std::string& m) {
  if (m == "A" || m == "a") return sim::Model::A;
  if (m == "B" || m == "b") return sim::Model::B;
  throw UsageError("--model must be A or B, got '" + m + "'");
}

sim::SettingSpec pick_setting(const RunConfig& c) {
  const std::size_t n = c.n.empty() ? 1000 : c.n.front();
  auto variants = sim::standard_variants(c.setting, n);
  if (c.variant >= variants.size()) {
    throw UsageError("setting " + c.setting + " has " + std::to_string(variants.size()) +
                     " variant(s); --variant " + std::to_string(c.variant) + " is out of range");
  }
  return variants[c.variant];
}

sim::Generated generate_for(const RunConfig& c, const sim::SettingSpec& setting) {
  RandomSource rng = RandomSource(c.seed).child("data");
  return sim::generate(setting, rng);
}

Loaded load(const RunConfig& c) {
  if (!c.input.empty() && !c.setting.empty()) throw UsageError("give either --input or --setting, not both");
  if (c.input.empty() && c.setting.empty()) throw UsageError("one of --input or --setting is required");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
  if (!c.input.empty()) {
    if (c.formula.empty()) throw UsageError("--formula is required with --input");
    CsvOptions opts;
    opts.response = c.response;
    opts.discrete = c.discrete;
    opts.continuous = c.continuous;
    opts.ignore = c.ignore;
    Loaded l{parse_csv(c.input, opts), Formula::parse(c.formula), {}};
    l.meta["input"] = c.input;
    l.meta["response"] = c.response;
    l.meta["rows"] = std::to_string(l.data.rows());
    return l;
  }
  const auto setting = pick_setting(c);
  auto gen = generate_for(c, setting);
  const Formula formula = c.formula.empty() ? setting.model(parse_model(c.model)) : Formula::parse(c.formula);
  Loaded l{std::move(gen.data), formula, {}};
  l.meta["setting"] = setting.label();
  if (c.formula.empty()) l.meta["model"] = sim::to_string(parse_model(c.model));
  l.meta["rows"] = std::to_string(l.data.rows());
  return l;
}

gof::TestConfig test_config(const RunConfig& c) {
  gof::TestConfig t;
  t.k = c.k;
  t.n_min = c.n_min;
  t.train_size = c.train_size;
  t.train_fraction = c.train_fraction;
  t.strategy = gof::parse_strategy(c.partition, t.score_column);
  t.splits = c.splits;
  t.alpha = c.alpha;
  t.correction = c.correction;
  t.threads = c.threads;
  return t;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw Error("write to '" + path + "' failed");
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

gof::TestReport run_test(const RunConfig& c, const Loaded& l) {
  auto report = gof::multi_split_test(l.data, l.formula, test_config(c), RandomSource(c.seed).child("test"));
  // Report the user seed; the test stream is derived from it.
  report.seed = c.seed;
  return report;
}

// The report goes to the file, or to stdout with the summary moved to stderr.
void emit_report(const RunConfig& c, const std::string& json, const std::string& summary,
                 std::ostream& out, std::ostream& err) {
  if (c.output.empty()) {
    out << json << '\n';
    err << summary;
  } else {
    write_file(c.output, json + "\n");
    out << summary;
  }
}

}  // namespace

std::uint64_t default_seed() {
  const char* env = std::getenv(kSeedEnv);
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0') return 1;
  return v;
}

int run_test_command(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Loaded l = load(c);
    const auto report = run_test(c, l);
    emit_report(c, to_json(report, l.meta), summarize(report, c.top), out, err);
    return kExitOk;
  });
}

int run_diagnose_command(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Loaded l = load(c);
    const auto report = run_test(c, l);
    std::ostringstream text;
    text << summarize(report, report.ranking.size());
    for (const auto& o : report.outcomes) {
      if (!o.ok) continue;
      text << "partition selected on split " << o.index << " (largest contribution: group "
           << (o.max_group + 1) << "):\n";
      for (std::size_t g = 0; g < o.partition.groups.size(); ++g) {
        const auto& grp = o.partition.groups[g];
        text << "  group " << (g + 1) << " (" << grp.train_count << " training rows): " << grp.describe()
             << '\n';
      }
      break;
    }
    emit_report(c, to_json(report, l.meta), text.str(), out, err);
    return kExitOk;
  });
}

int run_hl_command(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Loaded l = load(c);
    const auto design = l.formula.design(l.data);
    const auto fit = glm::fit_logistic(design, l.data.response());
    if (!fit.converged) throw Error("model fit did not converge (possible separation)");
    const auto phat = glm::predict_prob(fit, design);
    const auto hl = gof::hl_test(l.data.response(), phat, c.hl_groups);
    ReportMeta meta = l.meta;
    meta["formula"] = l.formula.canonical();
    meta["seed"] = std::to_string(c.seed);
    std::ostringstream summary;
    summary << "HL statistic: " << hl.statistic << " on " << hl.df << " df (" << hl.groups
            << " groups), p = " << hl.p_value << '\n';
    emit_report(c, to_json(hl, meta), summary.str(), out, err);
    return kExitOk;
  });
}

int run_experiment_command(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (c.reps == 0) throw UsageError("--reps must be at least 1");
    if (c.setting.empty()) throw UsageError("--setting is required");
    if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
    std::vector<std::string> ids;
    {
      std::stringstream ss(c.setting);
      for (std::string id; std::getline(ss, id, ',');) {
        if (!id.empty()) ids.push_back(id);
      }
    }
    const std::vector<std::size_t> sizes = c.n.empty() ? std::vector<std::size_t>{500} : c.n;
    std::vector<sim::SettingSpec> settings;
    for (const auto& id : ids) {
      for (std::size_t n : sizes) {
        auto v = sim::standard_variants(id, n);
        settings.insert(settings.end(), v.begin(), v.end());
      }
    }
    gof::TestConfig tc = test_config(c);
    tc.threads = 1;
    const std::vector<sim::Method> methods{sim::Method::hosmer_lemeshow(c.hl_groups),
                                           sim::Method::bagoft(tc)};
    sim::ExperimentOptions opts;
    opts.reps = c.reps;
    opts.seed = c.seed;
    opts.alpha = c.alpha;
    opts.threads = c.threads;
    const auto results = sim::run_experiment(settings, methods, opts);

    std::ostringstream csv;
    sim::write_results_csv(results, csv);

    nlohmann::ordered_json cfg;
    cfg["settings"] = nlohmann::ordered_json::array();
    for (const auto& s : settings) cfg["settings"].push_back(s.label());
    cfg["reps"] = c.reps;
    cfg["alpha"] = c.alpha;
    cfg["hl_groups"] = c.hl_groups;
    cfg["k"] = c.k;
    cfg["n_min"] = c.n_min ? nlohmann::ordered_json(*c.n_min) : nlohmann::ordered_json("n/10");
    cfg["splits"] = c.splits;
    cfg["partition"] = c.partition;
    cfg["correction"] = c.correction;
    if (c.train_size) cfg["train_size"] = *c.train_size;
    if (c.train_fraction) cfg["train_fraction"] = *c.train_fraction;
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(cfg.dump())));
    nlohmann::ordered_json manifest;
    manifest["artifact"] = {{"name", "bagoft"}, {"version", version()}};
    manifest["seed"] = c.seed;
    manifest["config_hash"] = hash;
    manifest["config"] = cfg;
    manifest["results"] = c.output.empty() ? "stdout" : c.output;

    if (c.output.empty()) {
      out << csv.str();
      err << sim::format_results_table(results);
    } else {
      write_file(c.output, csv.str());
      write_file(c.output + ".manifest.json", manifest.dump(2) + "\n");
      out << sim::format_results_table(results);
    }
    return kExitOk;
  });
}

int run_generate_command(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (c.setting.empty()) throw UsageError("--setting is required");
    const auto setting = pick_setting(c);
    const auto gen = generate_for(c, setting);
    if (c.output.empty()) {
      write_csv(gen.data, out);
    } else {
      write_csv(gen.data, std::filesystem::path(c.output));
      out << "wrote " << gen.data.rows() << " rows of " << setting.label() << " to " << c.output << '\n';
    }
    return kExitOk;
  });
}

}  // namespace bagoft::cli
