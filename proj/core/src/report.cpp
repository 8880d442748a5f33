#include "bagoft/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace bagoft {
namespace {

using Json = nlohmann::ordered_json;

#ifndef BAGOFT_VERSION
#define BAGOFT_VERSION "0.0.0"
#endif

Json rule_json(const partition::AxisRule& rule) {
  Json j;
  j["source"] = rule.source;
  if (const auto* t = std::get_if<partition::ThresholdTest>(&rule.test)) {
    j["op"] = t->side == partition::Side::LessEqual ? "<=" : ">";
    j["value"] = t->value;
  } else {
    const auto& m = std::get<partition::MembershipTest>(rule.test);
    j["op"] = m.negated ? "not in" : "in";
    j["labels"] = m.labels;
  }
  return j;
}

Json partition_json(const partition::Partition& p) {
  Json j;
  j["sources"] = p.sources;
  j["degenerate"] = p.degenerate;
  Json groups = Json::array();
  for (const auto& g : p.groups) {
    Json gj;
    gj["train_count"] = g.train_count;
    gj["description"] = g.describe();
    Json rules = Json::array();
    for (const auto& r : g.rules) rules.push_back(rule_json(r));
    gj["rules"] = std::move(rules);
    groups.push_back(std::move(gj));
  }
  j["groups"] = std::move(groups);
  return j;
}

Json config_object(const gof::TestConfig& c, const gof::ResolvedConfig& r, const std::string& formula) {
  Json j;
  j["formula"] = formula;
  j["k"] = c.k;
  j["n_min"] = r.partition.n_min;
  j["n"] = r.n;
  j["train_size"] = r.train_size;
  j["test_size"] = r.test_size;
  j["splits"] = c.splits;
  j["alpha"] = c.alpha;
  j["correction"] = c.correction;
  j["partition_mode"] = gof::to_string(c.strategy);
  j["score_column"] = c.score_column;
  j["continuous_sources"] = r.partition.continuous;
  j["discrete_sources"] = r.partition.discrete;
  return j;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  return v[(v.size() - 1) / 2];
}

}  // namespace

std::string version() { return BAGOFT_VERSION; }

std::string to_json(const partition::Partition& partition, int indent) {
  return partition_json(partition).dump(indent);
}

std::string config_json(const gof::TestConfig& config, const gof::ResolvedConfig& resolved,
                        const std::string& formula) {
  return config_object(config, resolved, formula).dump();
}

std::string config_hash(const gof::TestConfig& config, const gof::ResolvedConfig& resolved,
                        const std::string& formula) {
  return hex64(fnv1a64(config_json(config, resolved, formula)));
}

std::string to_json(const gof::TestReport& report, const ReportMeta& meta, int indent) {
  Json j;
  j["artifact"] = {{"name", "bagoft"}, {"version", version()}};
  j["seed"] = report.seed;
  j["config_hash"] = config_hash(report.config, report.resolved, report.formula);
  j["input"] = Json::object();
  for (const auto& [k, v] : meta) j["input"][k] = v;
  j["config"] = config_object(report.config, report.resolved, report.formula);

  std::vector<double> raw, adj, se;
  for (const auto& o : report.outcomes) {
    if (!o.ok) continue;
    raw.push_back(o.statistic);
    adj.push_back(o.adjusted_statistic);
    se.push_back(o.standard_error);
  }
  j["statistic_summary"] = {
      {"splits", report.outcomes.size()},
      {"succeeded", report.outcomes.size() - report.failed},
      {"failed", report.failed},
      {"median_statistic", median_of(raw)},
      {"median_adjusted_statistic", median_of(adj)},
      {"median_standard_error", median_of(se)},
  };
  j["median_p"] = report.decision.median_p;
  j["threshold"] = report.decision.threshold;
  j["reject"] = report.decision.reject;
  j["inconclusive"] = report.inconclusive;

  Json ranking = Json::array();
  for (const auto& c : report.ranking) {
    ranking.push_back({{"covariate", c.name}, {"total", c.total}, {"max_group", c.max_group}});
  }
  j["covariate_ranking"] = std::move(ranking);

  Json splits = Json::array();
  for (const auto& o : report.outcomes) {
    Json s;
    s["index"] = o.index;
    s["stream_seed"] = o.stream_seed;
    s["ok"] = o.ok;
    if (!o.ok) {
      s["error"] = o.error;
      s["converged"] = o.converged;
      splits.push_back(std::move(s));
      continue;
    }
    s["statistic"] = o.statistic;
    s["adjusted_statistic"] = o.adjusted_statistic;
    s["standard_error"] = o.standard_error;
    s["singular_information"] = o.singular_information;
    s["groups"] = o.groups;
    s["p_value"] = o.p_value;
    s["converged"] = o.converged;
    s["max_group"] = o.max_group;
    s["contributions"] = o.contributions;
    s["partition"] = partition_json(o.partition);
    splits.push_back(std::move(s));
  }
  j["splits"] = std::move(splits);
  return j.dump(indent);
}

std::string to_json(const gof::HlResult& result, const ReportMeta& meta, int indent) {
  Json j;
  j["artifact"] = {{"name", "bagoft"}, {"version", version()}};
  j["input"] = Json::object();
  for (const auto& [k, v] : meta) j["input"][k] = v;
  j["test"] = "hosmer-lemeshow";
  j["statistic"] = result.statistic;
  j["groups"] = result.groups;
  j["df"] = result.df;
  j["p_value"] = result.p_value;
  return j.dump(indent);
}

std::string summarize(const gof::TestReport& report, std::size_t top) {
  std::ostringstream out;
  const auto& d = report.decision;
  out << "model:      " << report.formula << '\n';
  out << "splits:     " << report.outcomes.size() << " (" << report.failed << " failed)\n";
  out << "median p:   " << d.median_p << '\n';
  out << "threshold:  " << d.threshold << '\n';
  if (report.inconclusive) {
    out << "decision:   INCONCLUSIVE (more than half of the splits failed)\n";
  } else {
    out << "decision:   " << (d.reject ? "REJECT (lack of fit detected)" : "no evidence of lack of fit")
        << '\n';
  }
  if (!report.ranking.empty()) {
    out << "covariates most used by selected partitions (total / largest-contribution group):\n";
    for (std::size_t i = 0; i < report.ranking.size() && i < top; ++i) {
      const auto& c = report.ranking[i];
      out << "  " << (i + 1) << ". " << c.name << "  " << c.total << " / " << c.max_group << '\n';
    }
  }
  return out.str();
}

}  // namespace bagoft
