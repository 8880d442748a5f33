#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "bagoft/gof.hpp"
#include "bagoft/numkit.hpp"
#include "bagoft/random.hpp"
#include "bagoft/sim.hpp"
#include "oracles.hpp"

using namespace bagoft;
using namespace bagoft::gof;

namespace {

struct Grouped {
  std::vector<int> y;
  std::vector<double> p;
  std::vector<std::size_t> g;
};

Grouped load_grouped(const std::string& name) {
  const auto t = oracle::read_table(oracle::fixture_path(name));
  Grouped out;
  for (double v : t.column("y")) out.y.push_back(static_cast<int>(v));
  out.p = t.column("phat");
  for (double v : t.column("group")) out.g.push_back(static_cast<std::size_t>(v));
  return out;
}

Eigen::VectorXd as_vector(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Model fitted on glm20, scored on 60 seeded rows grouped by x1 and x2.
struct GradientFixture {
  glm::FittedGlm model;
  glm::DesignMatrix test;
  std::vector<int> y;
  std::vector<std::size_t> groups;
};

GradientFixture gradient_fixture() {
  const auto train = oracle::read_table(oracle::fixture_path("glm20.csv"));
  glm::DesignMatrix d;
  d.x.resize(static_cast<Eigen::Index>(train.rows.size()), 3);
  std::vector<int> y;
  for (std::size_t i = 0; i < train.rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    d.x(r, 0) = 1;
    d.x(r, 1) = train.rows[i][1];
    d.x(r, 2) = train.rows[i][2];
    y.push_back(static_cast<int>(train.rows[i][0]));
  }
  GradientFixture f;
  f.model = glm::fit_logistic(d, y);
  RandomSource r(31);
  const Eigen::Index n = 60;
  f.test.x.resize(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    f.test.x(i, 0) = 1;
    f.test.x(i, 1) = r.uniform(-2, 2);
    f.test.x(i, 2) = r.gaussian(0, 1);
    f.y.push_back(r.bernoulli(0.5));
    f.groups.push_back(f.test.x(i, 1) <= -0.5 ? 0 : (f.test.x(i, 2) <= 0 ? 1 : 2));
  }
  return f;
}

Dataset setting1_data(std::uint64_t seed, std::size_t n) {
  RandomSource r(seed);
  return sim::generate(sim::setting1(n, 0.651), r).data;
}

}  // namespace

TEST(HlTest, AlternatingResponseAtHalf) {
  std::vector<int> y;
  for (int i = 0; i < 12; ++i) y.push_back(i % 2);
  const std::vector<double> p(12, 0.5);
  const auto r = hl_test(y, p, 3);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_EQ(r.p_value, 1.0);
  EXPECT_EQ(r.df, 1u);
}

TEST(HlTest, FixtureMatchesResummation) {
  const auto t = oracle::read_table(oracle::fixture_path("hl10.csv"));
  std::vector<int> y;
  for (double v : t.column("y")) y.push_back(static_cast<int>(v));
  const auto p = t.column("phat");
  for (std::size_t k : {3u, 4u, 5u, 10u}) {
    std::size_t used = 0;
    const double expected = oracle::hl_statistic(y, p, k, &used);
    const auto r = hl_test(y, p, k);
    EXPECT_NEAR(r.statistic, expected, 1e-12) << "k=" << k;
    EXPECT_EQ(r.groups, used);
    EXPECT_EQ(r.df, k - 2);
    EXPECT_NEAR(r.p_value, oracle::chi2_sf(expected, static_cast<unsigned>(k - 2)), 1e-10);
  }
}

TEST(HlTest, TiedProbabilitiesMatchResummation) {
  RandomSource r(8);
  std::vector<int> y;
  std::vector<double> p;
  for (int i = 0; i < 300; ++i) {
    p.push_back(std::round(r.uniform(1, 7)) / 8);
    y.push_back(r.bernoulli(p.back()));
  }
  std::size_t used = 0;
  const double expected = oracle::hl_statistic(y, p, 10, &used);
  const auto res = hl_test(y, p, 10);
  EXPECT_NEAR(res.statistic, expected, 1e-10);
  EXPECT_EQ(res.groups, used);
  EXPECT_LT(res.groups, 10u);
}

TEST(HlTest, Errors) {
  const std::vector<int> y{0, 1, 0, 1};
  const std::vector<double> p{0.2, 0.4, 0.6, 0.8};
  EXPECT_THROW(hl_test(y, p, 2), Error);
  EXPECT_THROW(hl_test(y, p, 5), Error);
  const std::vector<double> short_p{0.2};
  EXPECT_THROW(hl_test(y, short_p, 3), DimensionError);
  const std::vector<double> zeros(4, 0.0);
  EXPECT_THROW(hl_test(y, zeros, 3), DegenerateGroupError);
}

TEST(BagStatistic, Examples) {
  const std::vector<std::size_t> g4(4, 0), g2(2, 0);
  EXPECT_EQ(bag_statistic(std::vector<int>{1, 0, 1, 0}, std::vector<double>(4, 0.5), g4, 1).statistic, 0.0);
  EXPECT_DOUBLE_EQ(bag_statistic(std::vector<int>{1, 1}, std::vector<double>(2, 0.5), g2, 1).statistic, 2.0);
  EXPECT_DOUBLE_EQ(bag_statistic(std::vector<int>{1, 0}, std::vector<double>(2, 0.5), g2, 1).statistic, 0.0);
}

TEST(BagStatistic, FixtureMatchesResummation) {
  const auto f = load_grouped("bag30.csv");
  const auto b = bag_statistic(f.y, f.p, f.g, 3);
  EXPECT_NEAR(b.statistic, oracle::grouped_statistic(f.y, f.p, f.g, 3), 1e-12);
  EXPECT_EQ(b.realized_groups, 3u);
  EXPECT_EQ(b.counts, (std::vector<std::size_t>{10, 10, 10}));
}

TEST(BagStatistic, EmptyGroupsReduceRealizedK) {
  const auto f = load_grouped("bag30.csv");
  const auto b = bag_statistic(f.y, f.p, f.g, 5);
  EXPECT_EQ(b.realized_groups, 3u);
  EXPECT_EQ(b.contributions[3], 0.0);
  EXPECT_EQ(b.contributions[4], 0.0);
  const std::vector<int> none;
  const std::vector<double> nop;
  const std::vector<std::size_t> nog;
  EXPECT_THROW(bag_statistic(none, nop, nog, 2), Error);
}

TEST(BagStatistic, AdditiveOverGroups) {
  const auto f = load_grouped("bag30.csv");
  const auto whole = bag_statistic(f.y, f.p, f.g, 3);
  double sum = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    std::vector<int> y;
    std::vector<double> p;
    for (std::size_t i = 0; i < f.y.size(); ++i) {
      if (f.g[i] != k) continue;
      y.push_back(f.y[i]);
      p.push_back(f.p[i]);
    }
    const std::vector<std::size_t> zero(y.size(), 0);
    const double single = bag_statistic(y, p, zero, 1).statistic;
    EXPECT_NEAR(single, whole.contributions[k], 1e-14);
    sum += single;
  }
  EXPECT_NEAR(whole.statistic, sum, 1e-12);
}

TEST(BagStatistic, InvariantToRowOrderAndGroupLabels) {
  const auto f = load_grouped("bag30.csv");
  const double base = bag_statistic(f.y, f.p, f.g, 3).statistic;
  RandomSource r(4);
  for (int rep = 0; rep < 20; ++rep) {
    const auto perm = r.permutation(f.y.size());
    const std::vector<std::size_t> relabel{2, 0, 1};
    Grouped s;
    for (auto i : perm) {
      s.y.push_back(f.y[i]);
      s.p.push_back(f.p[i]);
      s.g.push_back(relabel[f.g[i]]);
    }
    EXPECT_NEAR(bag_statistic(s.y, s.p, s.g, 3).statistic, base, 1e-12);
  }
}

TEST(Correction, ZeroGradientLeavesStatistic) {
  const auto c = apply_correction(3.7, Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2));
  EXPECT_EQ(c.adjusted, 3.7);
  EXPECT_EQ(c.standard_error, 0.0);
}

TEST(Correction, ClampsAtZero) {
  Eigen::VectorXd g(1);
  g << 2.5 / correction_z();
  const auto c = apply_correction(1.0, g, Eigen::MatrixXd::Identity(1, 1));
  EXPECT_NEAR(c.standard_error * correction_z(), 2.5, 1e-12);
  EXPECT_EQ(c.adjusted, 0.0);
}

TEST(Correction, SeFromQuadraticForm) {
  Eigen::MatrixXd j(2, 2);
  j << 4, 1, 1, 3;
  const Eigen::VectorXd g = as_vector({0.5, -1.0});
  const auto c = apply_correction(10.0, g, j);
  const double se = std::sqrt(g.dot(j.inverse() * g));
  EXPECT_NEAR(c.standard_error, se, 1e-14);
  EXPECT_NEAR(c.adjusted, 10.0 - se * oracle::normal_quantile(0.95), 1e-8);
  EXPECT_FALSE(c.singular_information);
}

TEST(Correction, SingularInformationSkipped) {
  Eigen::MatrixXd j(2, 2);
  j << 1, 1, 1, 1;
  const auto c = apply_correction(5.0, as_vector({1.0, 2.0}), j);
  EXPECT_TRUE(c.singular_information);
  EXPECT_EQ(c.adjusted, 5.0);
}

TEST(Correction, GradientMatchesRichardsonOracle) {
  const auto f = gradient_fixture();
  const auto g = bag_gradient(f.model.coefficients, f.test.x, f.y, f.groups, 3);
  const auto bag_of = [&](const Eigen::VectorXd& beta) {
    std::vector<double> p;
    for (Eigen::Index i = 0; i < f.test.x.rows(); ++i) {
      p.push_back(1 / (1 + std::exp(-f.test.x.row(i).dot(beta))));
    }
    return oracle::grouped_statistic(f.y, p, f.groups, 3);
  };
  const auto o = oracle::richardson_gradient(bag_of, f.model.coefficients, 1e-3);
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    EXPECT_NEAR(g[j], o[j], 1e-3 * std::max(std::fabs(o[j]), 1e-8)) << j;
  }
  EXPECT_NEAR(bag_at(f.model.coefficients, f.test.x, f.y, f.groups, 3), bag_of(f.model.coefficients), 1e-10);
}

TEST(Correction, AdjustedNeverExceedsRaw) {
  const auto f = gradient_fixture();
  const double bag = bag_at(f.model.coefficients, f.test.x, f.y, f.groups, 3);
  const auto c = corrected_statistic(bag, f.model, f.test, f.y, f.groups, 3);
  EXPECT_LE(c.adjusted, bag);
  EXPECT_GT(c.standard_error, 0.0);
  EXPECT_NEAR(c.standard_error, std::sqrt(c.gradient.dot(f.model.information.inverse() * c.gradient)), 1e-10);
}

TEST(Correction, StandardErrorHalvesWhenTrainingQuadruples) {
  // Fixed test rows and grouping; training sets of n1 and 4 n1 rows. The
  // gradient also carries the fit error on the test rows, of order m/sqrt(n1),
  // so n1 is kept large against the m = 200 test rows to hold it near fixed.
  const auto setting = sim::setting1(200, 0.651);
  RandomSource test_rng(501);
  const auto test = sim::generate(setting, test_rng);
  const auto design_test = setting.model_a.design(test.data);
  std::vector<std::size_t> groups;
  for (double p : test.true_prob) groups.push_back(std::min<std::size_t>(4, static_cast<std::size_t>(p * 5)));

  double se_small = 0, se_large = 0;
  const int reps = 10;
  for (int r = 0; r < reps; ++r) {
    for (std::size_t n1 : {2000u, 8000u}) {
      auto train_setting = sim::setting1(n1, 0.651);
      RandomSource rng = RandomSource(502).child(static_cast<std::uint64_t>(r)).child(n1);
      const auto train = sim::generate(train_setting, rng);
      const auto fit = glm::fit_logistic(train_setting.model_a.design(train.data), train.data.response());
      const auto p = glm::predict_prob(fit, design_test);
      const double bag = bag_statistic(test.data.response(), p, groups, 5).statistic;
      const auto c = corrected_statistic(bag, fit, design_test, test.data.response(), groups, 5);
      (n1 == 2000 ? se_small : se_large) += c.standard_error / reps;
    }
  }
  const double ratio = se_small / se_large;
  EXPECT_GT(ratio, 2.0 / 1.3) << ratio;
  EXPECT_LT(ratio, 2.0 * 1.3) << ratio;
}

TEST(MedianRule, AllSmallRejects) {
  const std::vector<double> p(100, 0.001);
  const auto d = median_rule(p, 100, 0.05);
  EXPECT_NEAR(d.threshold, 0.45252, 1e-4);
  EXPECT_NEAR(d.threshold, 0.5 + oracle::normal_quantile(0.05) / std::sqrt(1200.0), 1e-9);
  EXPECT_TRUE(d.reject);
}

TEST(MedianRule, AllLargeAccepts) {
  const std::vector<double> p(100, 0.999);
  EXPECT_FALSE(median_rule(p, 100, 0.05).reject);
}

TEST(MedianRule, SingleSplit) {
  EXPECT_NEAR(median_threshold(1, 0.05), 0.0251, 1e-3);
  EXPECT_TRUE(median_rule(std::vector<double>{0.02}, 1, 0.05).reject);
  EXPECT_FALSE(median_rule(std::vector<double>{0.03}, 1, 0.05).reject);
}

TEST(MedianRule, LowerMiddleMedian) {
  const std::vector<double> p{0.9, 0.1, 0.4, 0.6};
  EXPECT_EQ(median_rule(p, 4, 0.05).median_p, 0.4);
  EXPECT_EQ(median_rule(std::vector<double>{0.3, 0.1, 0.2}, 3, 0.05).median_p, 0.2);
}

TEST(MedianRule, LoweringPValuesNeverUndoesRejection) {
  RandomSource r(55);
  for (int rep = 0; rep < 2000; ++rep) {
    const std::size_t s = 1 + r.uniform_index(60);
    std::vector<double> p(s);
    for (auto& v : p) v = r.uniform_open() * (r.bernoulli(0.5) ? 1.0 : 0.6);
    std::vector<double> lower = p;
    for (auto& v : lower) v *= r.uniform();
    const bool before = median_rule(p, s, 0.05).reject;
    const bool after = median_rule(lower, s, 0.05).reject;
    ASSERT_TRUE(!before || after) << "rep " << rep;
  }
}

TEST(CovariateCounts, CountingRule) {
  using namespace bagoft::partition;
  SplitOutcome o;
  o.ok = true;
  o.partition.groups = {
      Group{{AxisRule{"x1", ThresholdTest{0.0, Side::LessEqual}}}, 0},
      Group{{AxisRule{"x1", ThresholdTest{0.0, Side::Greater}}, AxisRule{"x2", ThresholdTest{1.0, Side::LessEqual}}}, 0},
      Group{{AxisRule{"x1", ThresholdTest{0.0, Side::Greater}}, AxisRule{"x2", ThresholdTest{1.0, Side::Greater}}}, 0},
  };
  o.max_group = 1;
  o.counts = partition_counts(o.partition, o.max_group);
  const std::vector<SplitOutcome> one{o};
  const auto r = covariate_counts(one);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].name, "x1");
  EXPECT_EQ(r[0].total, 3u);
  EXPECT_EQ(r[0].max_group, 1u);
  EXPECT_EQ(r[1].name, "x2");
  EXPECT_EQ(r[1].total, 2u);
  EXPECT_EQ(r[1].max_group, 1u);

  o.partition.groups.pop_back();
  o.partition.groups[1].rules[0].test = ThresholdTest{0.0, Side::Greater};
  const auto two = partition_counts(o.partition, std::nullopt);
  EXPECT_EQ(two[0].name, "x1");
  EXPECT_EQ(two[0].total, 2u);
  EXPECT_EQ(two[1].total, 1u);
}

TEST(CovariateCounts, EmptyAndTies) {
  EXPECT_TRUE(covariate_counts(std::vector<SplitOutcome>{}).empty());
  using namespace bagoft::partition;
  SplitOutcome o;
  o.ok = true;
  o.partition.groups = {Group{{AxisRule{"zeta", ThresholdTest{0, Side::LessEqual}}}, 0},
                        Group{{AxisRule{"alpha", ThresholdTest{0, Side::LessEqual}}}, 0}};
  o.counts = partition_counts(o.partition, std::nullopt);
  SplitOutcome failed;
  failed.ok = false;
  failed.partition = o.partition;
  failed.counts = o.counts;
  const auto r = covariate_counts(std::vector<SplitOutcome>{o, failed});
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].name, "alpha");
  EXPECT_EQ(r[0].total, 1u);
}

TEST(Strategy, ParseAndPrint) {
  std::string col;
  EXPECT_EQ(parse_strategy("covariates", col), PartitionStrategy::Covariates);
  EXPECT_EQ(parse_strategy("mta-prob", col), PartitionStrategy::MtaQuantiles);
  EXPECT_EQ(parse_strategy("score:nn_p", col), PartitionStrategy::ScoreQuantiles);
  EXPECT_EQ(col, "nn_p");
  EXPECT_THROW(parse_strategy("score:", col), Error);
  EXPECT_THROW(parse_strategy("trees", col), Error);
}

TEST(Resolve, DefaultsAndValidation) {
  const auto data = setting1_data(1, 1000);
  const auto f = Formula::parse("x1 + x2");
  TestConfig c;
  const auto rc = resolve(c, data, f);
  EXPECT_EQ(rc.train_size, 900u);
  EXPECT_EQ(rc.test_size, 100u);
  EXPECT_EQ(rc.partition.n_min, 100u);
  EXPECT_EQ(rc.partition.continuous, (std::vector<std::string>{"x1", "x2", "x3"}));
  EXPECT_EQ(default_train_size(200), 150u);
  EXPECT_EQ(default_train_size(500), 425u);
  EXPECT_EQ(default_train_size(1000), 900u);
  EXPECT_EQ(default_train_size(300), 270u);

  auto bad = c;
  bad.alpha = 1.0;
  EXPECT_THROW(resolve(bad, data, f), Error);
  bad = c;
  bad.k = 1;
  EXPECT_THROW(resolve(bad, data, f), Error);
  bad = c;
  bad.train_size = 997;
  EXPECT_THROW(resolve(bad, data, f), Error);
  bad = c;
  bad.n_min = 500;
  EXPECT_THROW(resolve(bad, data, f), Error);
  bad = c;
  bad.splits = 0;
  EXPECT_THROW(resolve(bad, data, f), Error);
  bad = c;
  bad.continuous = {"nope"};
  EXPECT_THROW(resolve(bad, data, f), Error);
  EXPECT_THROW(resolve(c, data, Formula::parse("x9")), Error);
  bad = c;
  bad.train_fraction = 0.5;
  EXPECT_EQ(resolve(bad, data, f).train_size, 500u);
}

TEST(SingleSplit, Deterministic) {
  const auto data = setting1_data(2, 1000);
  const auto f = Formula::parse("x1 + x2");
  const TestConfig c;
  const auto a = single_split_test(data, f, c, RandomSource(5), 0);
  const auto b = single_split_test(data, f, c, RandomSource(5), 0);
  ASSERT_TRUE(a.ok) << a.error;
  EXPECT_EQ(a.statistic, b.statistic);
  EXPECT_EQ(a.adjusted_statistic, b.adjusted_statistic);
  EXPECT_EQ(a.p_value, b.p_value);
  EXPECT_EQ(a.contributions, b.contributions);
  ASSERT_EQ(a.partition.size(), b.partition.size());
  for (std::size_t g = 0; g < a.partition.size(); ++g) {
    EXPECT_EQ(a.partition.groups[g].rules, b.partition.groups[g].rules);
  }
  EXPECT_LE(a.adjusted_statistic, a.statistic);
  EXPECT_EQ(a.p_value, numkit::chi2_sf(a.adjusted_statistic, static_cast<unsigned>(a.groups)));
  const auto c2 = single_split_test(data, f, c, RandomSource(6), 0);
  EXPECT_NE(a.statistic, c2.statistic);
}

TEST(SingleSplit, FailuresAreMarkedNotThrown) {
  auto data = setting1_data(3, 200);
  data.add_continuous("dup", data.column("x1").values);
  const auto o = single_split_test(data, Formula::parse("x1 + dup"), TestConfig{}, RandomSource(1));
  EXPECT_FALSE(o.ok);
  EXPECT_FALSE(o.error.empty());
}

TEST(SingleSplit, ScoreAndMtaStrategies) {
  auto data = setting1_data(4, 1000);
  RandomSource r(4);
  const auto gen = sim::generate(sim::setting1(1000, 0.651), r);
  const auto scored = sim::score_injection(gen.data, "truth", gen.true_prob);
  TestConfig c;
  c.strategy = PartitionStrategy::ScoreQuantiles;
  c.score_column = "truth";
  const auto o = single_split_test(scored, Formula::parse("x1 + x2"), c, RandomSource(7));
  ASSERT_TRUE(o.ok) << o.error;
  EXPECT_EQ(o.partition.size(), 5u);
  EXPECT_EQ(o.partition.sources, std::vector<std::string>{"truth"});

  c.strategy = PartitionStrategy::MtaQuantiles;
  const auto m = single_split_test(data, Formula::parse("x1 + x2"), c, RandomSource(7));
  ASSERT_TRUE(m.ok) << m.error;
  EXPECT_EQ(m.partition.size(), 5u);

  auto flat = sim::score_injection(gen.data, "flat", std::vector<double>(1000, 0.5));
  c.strategy = PartitionStrategy::ScoreQuantiles;
  c.score_column = "flat";
  const auto d = single_split_test(flat, Formula::parse("x1 + x2"), c, RandomSource(7));
  ASSERT_TRUE(d.ok) << d.error;
  EXPECT_TRUE(d.partition.degenerate);
  EXPECT_EQ(d.groups, 1u);
}

TEST(MultiSplit, ThreadCountDoesNotChangeResult) {
  const auto data = setting1_data(5, 500);
  const auto f = Formula::parse("x1 + x2");
  TestConfig c;
  c.splits = 24;
  const auto a = multi_split_test(data, f, c, RandomSource(9));
  c.threads = 3;
  const auto b = multi_split_test(data, f, c, RandomSource(9));
  ASSERT_EQ(a.outcomes.size(), 24u);
  for (std::size_t i = 0; i < 24; ++i) {
    EXPECT_EQ(a.outcomes[i].p_value, b.outcomes[i].p_value);
    EXPECT_EQ(a.outcomes[i].stream_seed, RandomSource(9).child(i).seed());
  }
  EXPECT_EQ(a.decision.median_p, b.decision.median_p);
  EXPECT_EQ(a.ranking.size(), b.ranking.size());
}

TEST(MultiSplit, MostlyFailedIsInconclusive) {
  auto data = setting1_data(6, 300);
  data.add_continuous("dup", data.column("x1").values);
  TestConfig c;
  c.splits = 9;
  const auto r = multi_split_test(data, Formula::parse("x1 + dup"), c, RandomSource(1));
  EXPECT_EQ(r.failed, 9u);
  EXPECT_TRUE(r.inconclusive);
  EXPECT_FALSE(r.decision.reject);
}
