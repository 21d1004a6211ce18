#include <random>
#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "slcgc/cluster_metrics.hpp"

using namespace slcgc;
using namespace slcgc::cluster;

TEST(Kmeans, RecoversSeparatedGroups) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 0.05);
  Eigen::MatrixXd pts(60, 2);
  for (int i = 0; i < 60; ++i) {
    const int g = i / 20;
    pts(i, 0) = 3.0 * g + n(rng);
    pts(i, 1) = -2.0 * g + n(rng);
  }
  const KmeansResult r = kmeans(pts, {.clusters = 3});
  for (int g = 0; g < 3; ++g) {
    std::set<int> ids;
    for (int i = 0; i < 20; ++i) ids.insert(r.labels[static_cast<std::size_t>(20 * g + i)]);
    EXPECT_EQ(ids.size(), 1u);
  }
  std::set<int> all(r.labels.begin(), r.labels.end());
  EXPECT_EQ(all.size(), 3u);
}

TEST(Kmeans, OneClusterPerPointHasZeroInertia) {
  const Eigen::MatrixXd pts = Eigen::MatrixXd::Random(7, 3);
  const KmeansResult r = kmeans(pts, {.clusters = 7});
  EXPECT_EQ(r.inertia, 0.0);
  EXPECT_EQ(std::set<int>(r.labels.begin(), r.labels.end()).size(), 7u);
}

TEST(Kmeans, DeterministicAndMonotone) {
  const Eigen::MatrixXd pts = Eigen::MatrixXd::Random(200, 4);
  const KmeansParams p{.clusters = 5, .restarts = 4, .seed = 42};
  const KmeansResult a = kmeans(pts, p);
  const KmeansResult b = kmeans(pts, p);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.centroids, b.centroids);
  ASSERT_FALSE(a.inertia_trace.empty());
  for (std::size_t i = 1; i < a.inertia_trace.size(); ++i) EXPECT_LE(a.inertia_trace[i], a.inertia_trace[i - 1] + 1e-12);
}

TEST(Kmeans, RejectsBadInput) {
  EXPECT_THROW(kmeans(Eigen::MatrixXd::Random(3, 2), {.clusters = 4}), Error);
  EXPECT_THROW(kmeans(Eigen::MatrixXd::Random(3, 2), {.clusters = 0}), Error);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(3, 2);
  bad(1, 1) = std::nan("");
  EXPECT_THROW(kmeans(bad, {.clusters = 2}), Error);
}

TEST(Hungarian, HandTable) {
  const Contingency conf{{5, 1}, {2, 8}};
  const Assignment a = hungarian_map(conf);
  EXPECT_EQ(a.matched, 13);
  EXPECT_EQ(a.cluster_to_class, (std::vector<int>{0, 1}));
}

TEST(Hungarian, RectangularTables) {
  // More clusters than classes leaves one cluster unmatched, and vice versa.
  const Assignment wide = hungarian_map({{1, 9, 3}});
  EXPECT_EQ(wide.matched, 9);
  EXPECT_EQ(wide.cluster_to_class, (std::vector<int>{-1, 0, -1}));
  const Assignment tall = hungarian_map({{2}, {7}, {4}});
  EXPECT_EQ(tall.matched, 7);
  EXPECT_EQ(tall.cluster_to_class, (std::vector<int>{1}));
}

TEST(Hungarian, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> dim(1, 6), cell(0, 20);
  for (int trial = 0; trial < 300; ++trial) {
    Contingency conf(static_cast<std::size_t>(dim(rng)));
    const int m = dim(rng);
    for (auto& row : conf) {
      row.resize(static_cast<std::size_t>(m));
      for (long& v : row) v = cell(rng);
    }
    const Assignment a = hungarian_map(conf);
    EXPECT_EQ(a.matched, oracle::exhaustive_matching(conf));
    long check = 0;
    std::set<int> used;
    for (std::size_t k = 0; k < a.cluster_to_class.size(); ++k) {
      const int c = a.cluster_to_class[k];
      if (c < 0) continue;
      EXPECT_TRUE(used.insert(c).second);
      check += conf[static_cast<std::size_t>(c)][k];
    }
    EXPECT_EQ(check, a.matched);
  }
}

TEST(Metrics, PerfectRelabelingScoresOne) {
  const std::vector<int> classes{1, 1, 2, 2, 3, 3};
  const std::vector<int> clusters{2, 2, 0, 0, 1, 1};
  const MetricsReport r = compute_metrics(classes, clusters);
  EXPECT_DOUBLE_EQ(r.oa, 1.0);
  EXPECT_DOUBLE_EQ(r.kappa, 1.0);
  EXPECT_NEAR(r.nmi, 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(r.ari, 1.0);
  EXPECT_DOUBLE_EQ(r.purity, 1.0);
  for (double pa : r.pa) EXPECT_DOUBLE_EQ(pa, 1.0);
}

TEST(Metrics, SingleClusterOnBalancedClasses) {
  const MetricsReport r = compute_metrics(std::vector<int>{1, 1, 2, 2}, std::vector<int>{0, 0, 0, 0});
  EXPECT_DOUBLE_EQ(r.purity, 0.5);
  EXPECT_DOUBLE_EQ(r.oa, 0.5);
  EXPECT_NEAR(r.ari, 0.0, 1e-15);
  EXPECT_NEAR(r.nmi, 0.0, 1e-15);
  EXPECT_NEAR(r.kappa, 0.0, 1e-15);
}

TEST(Metrics, UnlabeledAndIgnoredPixelsAreSkipped) {
  const MetricsReport r = compute_metrics(std::vector<int>{0, 1, 1, 2, 2}, std::vector<int>{1, 0, ClusterMap::kIgnored, 1, 1});
  EXPECT_EQ(r.evaluated, 3);
  EXPECT_DOUBLE_EQ(r.oa, 1.0);
  EXPECT_THROW(compute_metrics(std::vector<int>{0, 0}, std::vector<int>{1, 1}), Error);
  EXPECT_THROW(compute_metrics(std::vector<int>{1}, std::vector<int>{1, 1}), Error);
}

TEST(Metrics, MatchOraclesOnRandomLabelings) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> classes(1, 4), clusters(0, 4);
  for (int trial = 0; trial < 200; ++trial) {
    oracle::Labels l;
    for (int i = 0; i < 30; ++i) {
      l.classes.push_back(classes(rng));
      l.clusters.push_back(clusters(rng));
    }
    const MetricsReport r = compute_metrics(l.classes, l.clusters);
    EXPECT_NEAR(r.oa, oracle::oa(l), 1e-12);
    EXPECT_NEAR(r.kappa, oracle::kappa(l, r.mapping), 1e-10);
    EXPECT_NEAR(r.nmi, oracle::nmi(l), 1e-10);
    EXPECT_NEAR(r.ari, oracle::ari(l), 1e-10);
    EXPECT_NEAR(r.purity, oracle::purity(l), 1e-12);
    EXPECT_GE(r.purity + 1e-12, r.oa);
  }
}

TEST(Metrics, KappaOfIdentityMapping) {
  // 2x2 table [[20,5],[10,15]]: po = 0.7, pe = 0.5 * 0.6 + 0.5 * 0.4 = 0.5.
  const Contingency conf{{20, 5}, {10, 15}};
  EXPECT_NEAR(cohen_kappa(conf, {0, 1}), 0.4, 1e-15);
}

TEST(Metrics, JsonHasEveryScore) {
  const auto j = compute_metrics(std::vector<int>{1, 2, 2}, std::vector<int>{0, 1, 1}).to_json();
  for (const char* key : {"oa", "kappa", "nmi", "ari", "purity"}) EXPECT_TRUE(j.contains(key)) << key;
}
