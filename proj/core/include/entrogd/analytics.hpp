#pragma once

// Clustering on compressed summaries and the metrics used to judge it.
//
// Point sets are row-major spans of doubles with an explicit dimension d.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "entrogd/archive.hpp"

namespace entrogd {

struct ClusteringResult {
  std::size_t k = 0;
  std::size_t d = 0;
  std::vector<std::uint32_t> labels;
  std::vector<double> centers;  // k x d
  double sse = 0.0;             // weighted
  unsigned iterations = 0;
  std::uint64_t seed = 0;
};

struct KMeansOptions {
  std::size_t k = 5;
  unsigned inits = 10;
  std::uint64_t seed = 0;
  unsigned max_iterations = 300;
};

/// Best-of-`inits` weighted Lloyd's algorithm with weighted k-means++ seeding.
/// An emptied cluster is re-seeded with the point farthest from its current
/// center (lowest index on ties).
ClusteringResult weighted_kmeans(std::span<const double> points, std::size_t d, std::span<const double> weights,
                                 const KMeansOptions& options);

/// weighted_kmeans with unit weights.
ClusteringResult kmeans(std::span<const double> points, std::size_t d, const KMeansOptions& options);

/// A single Lloyd run from the given initial centers (k = centers.size() / d).
ClusteringResult lloyd(std::span<const double> points, std::size_t d, std::span<const double> weights,
                       std::span<const double> initial_centers, unsigned max_iterations = 300);

/// Index of the nearest center for every point (lowest index on ties).
std::vector<std::uint32_t> assign_nearest(std::span<const double> points, std::size_t d,
                                          std::span<const double> centers);

/// Sum of (weighted) squared distances to the nearest center. Empty weights mean unit weights.
double sum_squared_error(std::span<const double> points, std::size_t d, std::span<const double> weights,
                         std::span<const double> centers);

/// sse_compressed / sse_original; empty when sse_original is zero.
std::optional<double> approximation_ratio(double sse_compressed, double sse_original);

/// Adjusted mutual information with arithmetic-mean normalisation. Defined as
/// 0 when either labeling has a single cluster.
double adjusted_mutual_information(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);

struct SilhouetteOptions {
  std::size_t sample_size = 10000;
  std::uint64_t seed = 0;
};

/// Mean silhouette over a seeded random sample (all points if n <= sample_size).
/// Empty when fewer than two clusters appear in the sample.
std::optional<double> silhouette(std::span<const double> points, std::size_t d,
                                 std::span<const std::uint32_t> labels, const SilhouetteOptions& options = {});

enum class AnalyticsMode : std::uint8_t {
  Condensed = 0,  // weighted condensed samples
  Centroid = 1,   // base-range midpoints weighted by base counts
};

struct Ratios {
  double cr = 0.0;
  double adr = 0.0;
  std::uint64_t archive_bytes = 0;
  std::uint64_t analytics_bytes = 0;
};

/// CR = archive bytes / original bytes. ADR counts the header plus the bytes an
/// analytics pass reads: params + weights + condensed sections in Condensed
/// mode, params + base table + one l_w-bit count per base in Centroid mode.
Ratios compute_ratios(const Archive& archive, std::uint64_t original_size_bytes, AnalyticsMode mode);

struct EvaluationOptions {
  std::size_t k = 5;
  unsigned repeats = 3;
  unsigned inits = 10;
  std::uint64_t seed = 0;
  std::size_t silhouette_sample = 10000;
};

/// Medians over repeats of clustering a weighted summary versus clustering the
/// full data. Both sides' centers are scored against the full data; AMI
/// compares full-data labels with labels transferred from summary centers.
struct Evaluation {
  std::optional<double> ar;
  double ami = 0.0;
  std::optional<double> silhouette;
  double clustering_seconds = 0.0;  // summary side, median per repeat
  double reference_seconds = 0.0;   // full data, median per repeat
  double sse_summary = 0.0;
  double sse_reference = 0.0;
  std::size_t summary_points = 0;
};

Evaluation evaluate_clustering(std::span<const double> full, std::span<const double> summary,
                               std::span<const double> summary_weights, std::size_t d,
                               const EvaluationOptions& options);

struct MetricsReport {
  double cr = 0.0;
  double adr = 0.0;
  std::optional<double> ar;
  double ami = 0.0;
  std::optional<double> silhouette;
  double configuration_seconds = 0.0;
  double clustering_seconds = 0.0;
  double reference_clustering_seconds = 0.0;
};

}  // namespace entrogd
