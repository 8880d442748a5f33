#include "bagoft/partition.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>

#include "bagoft/csv.hpp"
#include "bagoft/numkit.hpp"

namespace bagoft::partition {
namespace {

struct RowStats {
  double residual = 0.0;
  double variance = 0.0;
};

struct Candidate {
  double criterion = -1.0;
  std::string source;
  AxisRule left;
  AxisRule right;
};

struct Node {
  std::vector<AxisRule> rules;
  std::vector<std::size_t> rows;
};

bool better(const Candidate& challenger, const Candidate& incumbent) {
  return challenger.criterion > incumbent.criterion;
}

// Sources are scanned in name order so that a strict comparison keeps the
// lexicographically smaller source on ties.
struct Source {
  std::string name;
  bool continuous;
};

void best_continuous(const Source& src, const Column& column, const Node& node,
                     std::span<const RowStats> stats, std::size_t n_min, Candidate& best) {
  const std::size_t n0 = node.rows.size();
  std::vector<std::size_t> order(node.rows);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return column.values[a] < column.values[b];
  });
  std::vector<double> sorted(n0);
  std::vector<double> cum_r(n0 + 1, 0.0);
  std::vector<double> cum_v(n0 + 1, 0.0);
  for (std::size_t i = 0; i < n0; ++i) {
    sorted[i] = column.values[order[i]];
    cum_r[i + 1] = cum_r[i] + stats[order[i]].residual;
    cum_v[i + 1] = cum_v[i] + stats[order[i]].variance;
  }
  for (double t : candidate_thresholds(sorted, n0, n_min)) {
    const auto c = static_cast<std::size_t>(
        std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
    const double value = group_criterion(cum_r[c], cum_v[c]) +
                         group_criterion(cum_r[n0] - cum_r[c], cum_v[n0] - cum_v[c]);
    Candidate cand{value, src.name, AxisRule{src.name, ThresholdTest{t, Side::LessEqual}},
                   AxisRule{src.name, ThresholdTest{t, Side::Greater}}};
    if (better(cand, best)) best = std::move(cand);
  }
}

void best_discrete(const Source& src, const Column& column, const Node& node,
                   std::span<const RowStats> stats, std::size_t n_min, Candidate& best) {
  std::vector<std::string> labels;
  std::vector<double> residuals;
  labels.reserve(node.rows.size());
  residuals.reserve(node.rows.size());
  std::map<std::string, RowStats> per_label;
  for (auto r : node.rows) {
    labels.push_back(column.labels[r]);
    residuals.push_back(stats[r].residual);
    auto& acc = per_label[column.labels[r]];
    acc.residual += stats[r].residual;
    acc.variance += stats[r].variance;
  }
  for (auto& split : candidate_discrete_splits(labels, residuals, n_min)) {
    RowStats l, rt;
    for (const auto& lab : split.left) {
      l.residual += per_label[lab].residual;
      l.variance += per_label[lab].variance;
    }
    for (const auto& lab : split.right) {
      rt.residual += per_label[lab].residual;
      rt.variance += per_label[lab].variance;
    }
    const double value =
        group_criterion(l.residual, l.variance) + group_criterion(rt.residual, rt.variance);
    Candidate cand{value, src.name, AxisRule{src.name, MembershipTest{split.left, false}},
                   AxisRule{src.name, MembershipTest{split.left, true}}};
    if (better(cand, best)) best = std::move(cand);
  }
}

std::string format_value(double v) { return format_double(v); }

}  // namespace

bool AxisRule::matches(double value) const {
  const auto* t = std::get_if<ThresholdTest>(&test);
  if (!t) throw Error("rule on '" + source + "' is a membership test, not a threshold");
  return t->side == Side::LessEqual ? value <= t->value : value > t->value;
}

bool AxisRule::matches(const std::string& label) const {
  const auto* m = std::get_if<MembershipTest>(&test);
  if (!m) throw Error("rule on '" + source + "' is a threshold, not a membership test");
  const bool in = std::binary_search(m->labels.begin(), m->labels.end(), label);
  return in != m->negated;
}

std::string AxisRule::describe() const {
  if (const auto* t = std::get_if<ThresholdTest>(&test)) {
    return source + (t->side == Side::LessEqual ? " <= " : " > ") + format_value(t->value);
  }
  const auto& m = std::get<MembershipTest>(test);
  std::string out = source + (m.negated ? " not in {" : " in {");
  for (std::size_t i = 0; i < m.labels.size(); ++i) out += (i ? "," : "") + m.labels[i];
  return out + "}";
}

std::string Group::describe() const {
  if (rules.empty()) return "(all)";
  std::string out;
  for (std::size_t i = 0; i < rules.size(); ++i) out += (i ? " & " : "") + rules[i].describe();
  return out;
}

void PartitionConfig::validate() const {
  if (k < 2) throw Error("partition: K must be at least 2");
  if (n_min < 1) throw Error("partition: N_min must be at least 1");
  if (continuous.empty() && discrete.empty() && !score) {
    throw Error("partition: no splitting source named");
  }
}

CriterionValue criterion_b(std::span<const std::size_t> group_of_row, std::size_t groups,
                           std::span<const int> y, std::span<const double> phat) {
  if (group_of_row.size() != y.size() || y.size() != phat.size()) {
    throw DimensionError("criterion_b: group, response and probability lengths differ");
  }
  std::vector<double> r(groups, 0.0), v(groups, 0.0);
  std::vector<std::size_t> count(groups, 0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto g = group_of_row[i];
    if (g >= groups) throw DimensionError("criterion_b: group index out of range");
    r[g] += y[i] - phat[i];
    v[g] += phat[i] * (1.0 - phat[i]);
    ++count[g];
  }
  CriterionValue out;
  for (std::size_t g = 0; g < groups; ++g) {
    if (count[g] == 0) {
      ++out.empty_groups;
      continue;
    }
    out.value += group_criterion(r[g], v[g]);
  }
  if (out.empty_groups == groups) throw Error("criterion_b: every group is empty");
  return out;
}

CriterionValue criterion_b(const Partition& partition, const Dataset& rows,
                           std::span<const double> phat) {
  const auto groups = assign_groups(partition, rows);
  return criterion_b(groups, partition.size(), rows.response(), phat);
}

std::vector<double> candidate_thresholds(std::span<const double> values, std::size_t n0,
                                         std::size_t n_min) {
  std::vector<double> out;
  if (n_min == 0 || values.empty() || n0 < 2 * n_min) return out;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t rho = n0 / n_min;
  for (std::size_t j = 1; j < rho; ++j) {
    const double t =
        numkit::lower_quantile_sorted(sorted, static_cast<double>(j) / static_cast<double>(rho));
    if (!out.empty() && out.back() == t) continue;
    const auto below = static_cast<std::size_t>(
        std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
    if (below >= n_min && sorted.size() - below >= n_min) out.push_back(t);
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<DiscreteSplit> candidate_discrete_splits(std::span<const std::string> labels,
                                                     std::span<const double> residuals,
                                                     std::size_t n_min) {
  std::map<std::string, std::pair<std::size_t, double>> tally;  // count, residual sum
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto& t = tally[labels[i]];
    ++t.first;
    if (i < residuals.size()) t.second += residuals[i];
  }
  std::vector<DiscreteSplit> out;
  const std::size_t m = tally.size();
  if (m < 2) return out;

  std::vector<std::string> distinct;
  std::vector<std::size_t> counts;
  for (const auto& [label, t] : tally) {
    distinct.push_back(label);
    counts.push_back(t.first);
  }
  const std::size_t total = labels.size();

  auto emit = [&](const std::vector<std::size_t>& left_idx) {
    std::size_t left_count = 0;
    std::vector<bool> in_left(m, false);
    for (auto i : left_idx) {
      in_left[i] = true;
      left_count += counts[i];
    }
    if (left_count < n_min || total - left_count < n_min) return;
    DiscreteSplit s;
    for (std::size_t i = 0; i < m; ++i) (in_left[i] ? s.left : s.right).push_back(distinct[i]);
    out.push_back(std::move(s));
  };

  if (m <= 6) {
    const std::size_t masks = std::size_t{1} << (m - 1);
    for (std::size_t mask = 0; mask + 1 < masks; ++mask) {
      std::vector<std::size_t> left{0};
      for (std::size_t b = 0; b + 1 < m; ++b) {
        if (mask & (std::size_t{1} << b)) left.push_back(b + 1);
      }
      emit(left);
    }
    return out;
  }

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ta = tally[distinct[a]];
    const auto& tb = tally[distinct[b]];
    return ta.second / static_cast<double>(ta.first) < tb.second / static_cast<double>(tb.first);
  });
  for (std::size_t j = 1; j < m; ++j) {
    emit(std::vector<std::size_t>(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(j)));
  }
  return out;
}

Partition greedy_partition(const PartitionConfig& config, const Dataset& train,
                           std::span<const double> phat) {
  config.validate();
  const std::size_t n = train.rows();
  if (phat.size() != n) throw DimensionError("greedy_partition: probability count mismatch");

  std::vector<Source> sources;
  for (const auto& name : config.continuous) sources.push_back({name, true});
  if (config.score && std::find(config.continuous.begin(), config.continuous.end(),
                                *config.score) == config.continuous.end()) {
    sources.push_back({*config.score, true});
  }
  for (const auto& name : config.discrete) sources.push_back({name, false});
  std::sort(sources.begin(), sources.end(),
            [](const Source& a, const Source& b) { return a.name < b.name; });
  sources.erase(std::unique(sources.begin(), sources.end(),
                            [](const Source& a, const Source& b) { return a.name == b.name; }),
                sources.end());

  std::vector<const Column*> columns;
  for (const auto& s : sources) {
    const Column& c = train.column(s.name);
    if (s.continuous && !c.has_numeric_values()) {
      throw Error("partition source '" + s.name + "' is not numeric");
    }
    if (!s.continuous && c.labels.empty() && n > 0) {
      throw Error("partition source '" + s.name + "' is not discrete");
    }
    columns.push_back(&c);
  }

  std::vector<RowStats> stats(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(phat[i] > 0.0 && phat[i] < 1.0)) {
      throw Error("greedy_partition: fitted probabilities must lie in (0, 1)");
    }
    stats[i] = {train.response()[i] - phat[i], phat[i] * (1.0 - phat[i])};
  }
  if (n < 2 * config.n_min) {
    throw InfeasiblePartitionError("greedy_partition: " + std::to_string(n) +
                                   " training rows cannot form two groups of N_min = " +
                                   std::to_string(config.n_min));
  }

  Partition result;
  for (const auto& s : sources) result.sources.push_back(s.name);

  std::deque<Node> pending;
  std::vector<Node> done;
  Node root;
  root.rows.resize(n);
  std::iota(root.rows.begin(), root.rows.end(), 0);
  pending.push_back(std::move(root));

  while (!pending.empty() && pending.size() + done.size() < config.k) {
    Node node = std::move(pending.front());
    pending.pop_front();
    Candidate best;
    if (node.rows.size() >= 2 * config.n_min) {
      for (std::size_t s = 0; s < sources.size(); ++s) {
        if (sources[s].continuous) {
          best_continuous(sources[s], *columns[s], node, stats, config.n_min, best);
        } else {
          best_discrete(sources[s], *columns[s], node, stats, config.n_min, best);
        }
      }
    }
    if (best.criterion < 0.0) {
      done.push_back(std::move(node));
      continue;
    }

    double parent_r = 0.0, parent_v = 0.0;
    Node left{node.rules, {}}, right{node.rules, {}};
    const Column& col = train.column(best.source);
    for (auto r : node.rows) {
      parent_r += stats[r].residual;
      parent_v += stats[r].variance;
      const bool goes_left = best.left.is_threshold() ? best.left.matches(col.values[r])
                                                      : best.left.matches(col.labels[r]);
      (goes_left ? left : right).rows.push_back(r);
    }
    result.history.push_back(
        SplitStep{best.source, group_criterion(parent_r, parent_v), best.criterion});
    left.rules.push_back(std::move(best.left));
    right.rules.push_back(std::move(best.right));
    pending.push_back(std::move(left));
    pending.push_back(std::move(right));
  }

  if (result.history.empty()) {
    throw InfeasiblePartitionError("greedy_partition: no source admits a split of the root with "
                                   "N_min = " + std::to_string(config.n_min));
  }
  for (auto& node : done) result.groups.push_back(Group{std::move(node.rules), node.rows.size()});
  for (auto& node : pending) result.groups.push_back(Group{std::move(node.rules), node.rows.size()});
  return result;
}

std::vector<std::size_t> assign_groups(const Partition& partition, const Dataset& rows) {
  struct Bound {
    const AxisRule* rule;
    const Column* column;
  };
  std::vector<std::vector<Bound>> bound(partition.size());
  for (std::size_t g = 0; g < partition.size(); ++g) {
    for (const auto& rule : partition.groups[g].rules) {
      const Column& c = rows.column(rule.source);
      if (rule.is_threshold() && !c.has_numeric_values()) {
        throw Error("threshold rule on non-numeric column '" + rule.source + "'");
      }
      if (!rule.is_threshold() && c.labels.empty() && rows.rows() > 0) {
        throw Error("membership rule on non-discrete column '" + rule.source + "'");
      }
      bound[g].push_back({&rule, &c});
    }
  }
  std::vector<std::size_t> out(rows.rows());
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    std::size_t hits = 0;
    for (std::size_t g = 0; g < bound.size(); ++g) {
      const bool all = std::all_of(bound[g].begin(), bound[g].end(), [&](const Bound& b) {
        return b.rule->is_threshold() ? b.rule->matches(b.column->values[i])
                                      : b.rule->matches(b.column->labels[i]);
      });
      if (all) {
        if (hits == 0) out[i] = g;
        ++hits;
      }
    }
    if (hits != 1) {
      throw Error("partition does not assign row " + std::to_string(i + 1) +
                  " to exactly one group (" + std::to_string(hits) + " matches)");
    }
  }
  return out;
}

Partition probability_partition(std::span<const double> scores, std::size_t k,
                                const std::string& source) {
  if (k < 2) throw Error("probability_partition: K must be at least 2");
  if (scores.empty()) throw Error("probability_partition: no training scores");
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  if (!(sorted.front() >= 0.0 && sorted.back() <= 1.0)) {
    throw Error("probability_partition: scores must lie in [0, 1]");
  }
  std::vector<double> cuts;
  for (std::size_t j = 1; j < k; ++j) {
    const double t =
        numkit::lower_quantile_sorted(sorted, static_cast<double>(j) / static_cast<double>(k));
    if (t >= sorted.back()) continue;  // nothing would lie above the cut
    if (cuts.empty() || cuts.back() != t) cuts.push_back(t);
  }

  Partition p;
  p.sources = {source};
  auto count_in = [&](double lo, bool has_lo, double hi, bool has_hi) {
    return static_cast<std::size_t>(std::count_if(sorted.begin(), sorted.end(), [&](double s) {
      return (!has_lo || s > lo) && (!has_hi || s <= hi);
    }));
  };
  if (cuts.empty()) {
    p.groups.push_back(Group{{}, sorted.size()});
    p.degenerate = true;
    return p;
  }
  for (std::size_t g = 0; g <= cuts.size(); ++g) {
    Group group;
    const bool has_lo = g > 0;
    const bool has_hi = g < cuts.size();
    if (has_lo) group.rules.push_back(AxisRule{source, ThresholdTest{cuts[g - 1], Side::Greater}});
    if (has_hi) group.rules.push_back(AxisRule{source, ThresholdTest{cuts[g], Side::LessEqual}});
    group.train_count = count_in(has_lo ? cuts[g - 1] : 0.0, has_lo, has_hi ? cuts[g] : 0.0, has_hi);
    p.groups.push_back(std::move(group));
  }
  return p;
}

}  // namespace bagoft::partition
