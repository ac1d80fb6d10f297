#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "entrogd/analytics.hpp"
#include "entrogd/codec.hpp"
#include "entrogd/error.hpp"
#include "entrogd/cli/synthetic.hpp"
#include "oracles.hpp"

using namespace entrogd;

namespace {

double hand_silhouette(const std::vector<double>& x, const std::vector<std::uint32_t>& labels) {
  const std::size_t n = x.size();
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double own = 0, other = 0;
    std::size_t n_own = 0, n_other = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (labels[j] == labels[i]) {
        own += std::abs(x[i] - x[j]);
        ++n_own;
      } else {
        other += std::abs(x[i] - x[j]);
        ++n_other;
      }
    }
    const double a = own / n_own, b = other / n_other;
    total += (b - a) / std::max(a, b);
  }
  return total / n;
}

}  // namespace

TEST(KMeans, KEqualsPointCountGivesZeroError) {
  const std::vector<double> pts{0, 0, 5, 1, -3, 2, 8, 8};
  KMeansOptions o;
  o.k = 4;
  const auto r = kmeans(pts, 2, o);
  EXPECT_EQ(r.sse, 0.0);
  std::vector<std::uint32_t> labels = r.labels;
  std::sort(labels.begin(), labels.end());
  EXPECT_EQ(labels, (std::vector<std::uint32_t>{0, 1, 2, 3}));
}

TEST(KMeans, WeightedCenterIsWeightedMean) {
  const std::vector<double> pts{0, 10};
  const std::vector<double> w{1, 3};
  KMeansOptions o;
  o.k = 1;
  const auto r = weighted_kmeans(pts, 1, w, o);
  EXPECT_DOUBLE_EQ(r.centers[0], 7.5);
  EXPECT_DOUBLE_EQ(r.sse, 75.0);
}

TEST(KMeans, FindsOptimalTwoPartitionOnTinyInput) {
  const std::vector<double> x{0.0, 1.0, 1.5, 6.0, 7.5, 9.0};
  double best = INFINITY;
  for (unsigned mask = 1; mask + 1 < (1u << x.size()); ++mask) {
    double s[2] = {0, 0}, c[2] = {0, 0};
    for (std::size_t i = 0; i < x.size(); ++i) {
      s[(mask >> i) & 1] += x[i];
      c[(mask >> i) & 1] += 1;
    }
    double sse = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const int g = (mask >> i) & 1;
      sse += std::pow(x[i] - s[g] / c[g], 2);
    }
    best = std::min(best, sse);
  }
  KMeansOptions o;
  o.k = 2;
  EXPECT_NEAR(kmeans(x, 1, o).sse, best, 1e-12);
}

TEST(KMeans, UnitWeightsMatchUnweighted) {
  const auto mix = cli::gaussian_mixture(600, 3, 4, 11);
  std::vector<double> pts;
  for (std::size_t r = 0; r < mix.table.rows(); ++r)
    for (std::size_t c = 0; c < mix.table.cols(); ++c) pts.push_back(mix.table.column(c).as_double(r));
  KMeansOptions o;
  o.k = 4;
  o.seed = 5;
  const std::vector<double> ones(600, 1.0);
  const auto a = kmeans(pts, 3, o);
  const auto b = weighted_kmeans(pts, 3, ones, o);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.centers, b.centers);
}

TEST(KMeans, WeightedLloydMatchesExpandedMultiset) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 30, d = 2, k = 3;
    std::vector<double> pts, w, expanded;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = static_cast<double>(rng() % 1000) / 10.0, y = static_cast<double>(rng() % 1000) / 10.0;
      const unsigned c = 1 + rng() % 5;
      pts.insert(pts.end(), {x, y});
      w.push_back(c);
      for (unsigned t = 0; t < c; ++t) expanded.insert(expanded.end(), {x, y});
    }
    const std::vector<double> init(pts.begin(), pts.begin() + k * d);
    const auto got = lloyd(pts, d, w, init);
    const auto want = oracle::naive_lloyd(expanded, d, init);
    ASSERT_EQ(got.centers.size(), want.centers.size());
    for (std::size_t i = 0; i < got.centers.size(); ++i) EXPECT_NEAR(got.centers[i], want.centers[i], 1e-9);
    EXPECT_NEAR(got.sse, want.sse, 1e-6 * std::max(1.0, want.sse));
  }
}

TEST(KMeans, RejectsBadArguments) {
  const std::vector<double> pts{1, 2, 3};
  KMeansOptions o;
  o.k = 4;
  EXPECT_THROW(kmeans(pts, 1, o), InvalidArgument);
  o.k = 2;
  EXPECT_THROW(weighted_kmeans(pts, 1, std::vector<double>{1, 0, 1}, o), InvalidArgument);
  EXPECT_THROW(weighted_kmeans(pts, 1, std::vector<double>{1, 1}, o), InvalidArgument);
  EXPECT_THROW(kmeans(pts, 2, o), InvalidArgument);
}

TEST(Metrics, ApproximationRatio) {
  EXPECT_EQ(approximation_ratio(4.0, 4.0), 1.0);
  EXPECT_EQ(approximation_ratio(8.0, 4.0), 2.0);
  EXPECT_FALSE(approximation_ratio(1.0, 0.0).has_value());
}

TEST(Metrics, AmiIdenticalAndRelabelled) {
  const std::vector<std::uint32_t> a{0, 0, 1, 1, 2, 2, 2};
  const std::vector<std::uint32_t> b{5, 5, 3, 3, 9, 9, 9};
  EXPECT_NEAR(adjusted_mutual_information(a, a), 1.0, 1e-12);
  EXPECT_NEAR(adjusted_mutual_information(a, b), 1.0, 1e-12);
}

TEST(Metrics, AmiReferenceValues) {
  const std::vector<std::uint32_t> a{0, 0, 0, 1, 1, 1, 2, 2, 2, 2};
  const std::vector<std::uint32_t> b{0, 0, 1, 1, 1, 2, 2, 2, 0, 0};
  EXPECT_NEAR(adjusted_mutual_information(a, b), 0.17152423540072848, 1e-12);
  EXPECT_NEAR(adjusted_mutual_information(b, a), 0.17152423540072848, 1e-12);
  EXPECT_NEAR(adjusted_mutual_information(a, b), oracle::ami_by_permutation(a, b), 1e-9);

  const std::vector<std::uint32_t> a2{0, 1, 0, 1, 0, 1, 0, 1, 2, 2};
  const std::vector<std::uint32_t> b2{0, 0, 0, 0, 1, 1, 1, 1, 1, 1};
  EXPECT_NEAR(adjusted_mutual_information(a2, b2), -0.02776624756988024, 1e-12);
}

TEST(Metrics, AmiSingleClusterIsZero) {
  const std::vector<std::uint32_t> a{0, 0, 0, 0};
  const std::vector<std::uint32_t> b{0, 1, 0, 1};
  EXPECT_EQ(adjusted_mutual_information(a, b), 0.0);
  EXPECT_EQ(adjusted_mutual_information(b, a), 0.0);
}

TEST(Metrics, SilhouetteReferenceValue) {
  const std::vector<double> x{0, 1, 3, 10, 11, 15};
  const std::vector<std::uint32_t> labels{0, 0, 0, 1, 1, 1};
  const auto s = silhouette(x, 1, labels);
  ASSERT_TRUE(s.has_value());
  EXPECT_NEAR(*s, 0.7475248484499956, 1e-12);
  EXPECT_NEAR(*s, hand_silhouette(x, labels), 1e-12);
}

TEST(Metrics, SilhouetteEdgeCases) {
  const std::vector<double> far{0, 0.001, 1000, 1000.001};
  const std::vector<std::uint32_t> two{0, 0, 1, 1};
  EXPECT_NEAR(*silhouette(far, 1, two), 1.0, 1e-5);

  const std::vector<double> same{1, 1, 1, 1};
  EXPECT_EQ(*silhouette(same, 1, two), 0.0);

  const std::vector<std::uint32_t> one{0, 0, 0, 0};
  EXPECT_FALSE(silhouette(far, 1, one).has_value());
}

TEST(Metrics, SilhouetteSamplingIsSeeded) {
  const auto mix = cli::gaussian_mixture(3000, 2, 3, 4);
  std::vector<double> pts;
  for (std::size_t r = 0; r < mix.table.rows(); ++r)
    for (std::size_t c = 0; c < 2; ++c) pts.push_back(mix.table.column(c).as_double(r));
  const SilhouetteOptions o{500, 9};
  const auto a = silhouette(pts, 2, mix.component, o);
  const auto b = silhouette(pts, 2, mix.component, o);
  const auto full = silhouette(pts, 2, mix.component, {10000, 0});
  ASSERT_TRUE(a && b && full);
  EXPECT_EQ(*a, *b);
  EXPECT_NEAR(*a, *full, 0.05);
}

TEST(Ratios, AnalyticsBytesNeverExceedArchive) {
  const auto t = cli::gaussian_mixture(2000, 3, 4, 8).table;
  const auto result = compress(t, {});
  for (auto mode : {AnalyticsMode::Condensed, AnalyticsMode::Centroid}) {
    const auto r = compute_ratios(result.archive, 1000, mode);
    EXPECT_LE(r.adr, r.cr);
    EXPECT_EQ(r.archive_bytes, result.archive.total_size());
  }
  // Tiny originals are not clamped: a ratio above one is reported as is.
  EXPECT_GT(compute_ratios(result.archive, 10, AnalyticsMode::Condensed).cr, 1.0);
  EXPECT_THROW(compute_ratios(result.archive, 0, AnalyticsMode::Condensed), InvalidArgument);
}

TEST(Evaluation, IdenticalSummaryScoresPerfectly) {
  const auto mix = cli::gaussian_mixture(800, 2, 3, 21);
  std::vector<double> pts;
  for (std::size_t r = 0; r < mix.table.rows(); ++r)
    for (std::size_t c = 0; c < 2; ++c) pts.push_back(mix.table.column(c).as_double(r));
  EvaluationOptions o;
  o.k = 3;
  const auto e = evaluate_clustering(pts, pts, std::vector<double>(800, 1.0), 2, o);
  ASSERT_TRUE(e.ar.has_value());
  EXPECT_NEAR(*e.ar, 1.0, 1e-12);
  EXPECT_NEAR(e.ami, 1.0, 1e-12);
  EXPECT_EQ(e.summary_points, 800u);
}
