#include "entrogd/analytics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>

#include "entrogd/codec.hpp"
#include "entrogd/error.hpp"

namespace entrogd {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform in [0, 1); independent of the standard library's distribution implementations.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double squared_distance(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

std::size_t point_count(std::span<const double> points, std::size_t d) {
  if (d == 0) throw InvalidArgument("dimension must be positive");
  if (points.size() % d != 0) throw InvalidArgument("point buffer is not a multiple of the dimension");
  return points.size() / d;
}

double weight_at(std::span<const double> weights, std::size_t i) { return weights.empty() ? 1.0 : weights[i]; }

// Weighted k-means++: first center drawn by weight, then by weight * D^2.
std::vector<double> seed_centers(std::span<const double> points, std::size_t d, std::span<const double> weights,
                                 std::size_t k, std::mt19937_64& rng) {
  const std::size_t n = points.size() / d;
  std::vector<double> centers;
  centers.reserve(k * d);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());

  auto draw = [&](const std::vector<double>& mass) {
    const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
    if (!(total > 0.0)) return static_cast<std::size_t>(rng() % n);
    const double target = uniform01(rng) * total;
    double run = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      run += mass[i];
      if (run > target && mass[i] > 0.0) return i;
    }
    for (std::size_t i = n; i-- > 0;)
      if (mass[i] > 0.0) return i;
    return n - 1;
  };

  std::vector<double> mass(n);
  for (std::size_t i = 0; i < n; ++i) mass[i] = weight_at(weights, i);
  std::size_t pick = draw(mass);
  for (std::size_t c = 0; c < k; ++c) {
    centers.insert(centers.end(), points.begin() + static_cast<std::ptrdiff_t>(pick * d),
                   points.begin() + static_cast<std::ptrdiff_t>((pick + 1) * d));
    if (c + 1 == k) break;
    const double* center = centers.data() + c * d;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(points.data() + i * d, center, d));
      mass[i] = weight_at(weights, i) * nearest[i];
    }
    pick = draw(mass);
  }
  return centers;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace

std::vector<std::uint32_t> assign_nearest(std::span<const double> points, std::size_t d,
                                          std::span<const double> centers) {
  const std::size_t n = point_count(points, d);
  const std::size_t k = point_count(centers, d);
  if (k == 0) throw InvalidArgument("no centers");
  std::vector<std::uint32_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t arg = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const double dist = squared_distance(points.data() + i * d, centers.data() + c * d, d);
      if (dist < best) {
        best = dist;
        arg = static_cast<std::uint32_t>(c);
      }
    }
    labels[i] = arg;
  }
  return labels;
}

double sum_squared_error(std::span<const double> points, std::size_t d, std::span<const double> weights,
                         std::span<const double> centers) {
  const std::size_t n = point_count(points, d);
  const auto labels = assign_nearest(points, d, centers);
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    sse += weight_at(weights, i) * squared_distance(points.data() + i * d, centers.data() + labels[i] * d, d);
  return sse;
}

ClusteringResult lloyd(std::span<const double> points, std::size_t d, std::span<const double> weights,
                       std::span<const double> initial_centers, unsigned max_iterations) {
  const std::size_t n = point_count(points, d);
  const std::size_t k = point_count(initial_centers, d);
  if (k == 0 || k > n) throw InvalidArgument("k must be in [1, point count]");
  if (!weights.empty() && weights.size() != n) throw InvalidArgument("weight count does not match point count");

  ClusteringResult r;
  r.k = k;
  r.d = d;
  r.centers.assign(initial_centers.begin(), initial_centers.end());
  r.labels.assign(n, std::numeric_limits<std::uint32_t>::max());

  std::vector<double> sums(k * d);
  std::vector<double> mass(k);
  for (unsigned iter = 0; iter < max_iterations; ++iter) {
    auto labels = assign_nearest(points, d, r.centers);
    const bool changed = labels != r.labels;
    r.labels = std::move(labels);
    r.iterations = iter + 1;

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(mass.begin(), mass.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = weight_at(weights, i);
      mass[r.labels[i]] += w;
      for (std::size_t j = 0; j < d; ++j) sums[r.labels[i] * d + j] += w * points[i * d + j];
    }

    bool reseeded = false;
    std::vector<std::uint8_t> taken(n, 0);
    for (std::size_t c = 0; c < k; ++c) {
      if (mass[c] > 0.0) {
        for (std::size_t j = 0; j < d; ++j) r.centers[c * d + j] = sums[c * d + j] / mass[c];
        continue;
      }
      // Empty cluster: move its center onto the point farthest from its own center.
      std::size_t far = n;
      double far_dist = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i]) continue;
        const double dist = squared_distance(points.data() + i * d, r.centers.data() + r.labels[i] * d, d);
        if (dist > far_dist) {
          far_dist = dist;
          far = i;
        }
      }
      taken[far] = 1;
      std::copy_n(points.begin() + static_cast<std::ptrdiff_t>(far * d), d,
                  r.centers.begin() + static_cast<std::ptrdiff_t>(c * d));
      reseeded = true;
    }
    if (!changed && !reseeded) break;
  }

  r.labels = assign_nearest(points, d, r.centers);
  r.sse = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    r.sse += weight_at(weights, i) * squared_distance(points.data() + i * d, r.centers.data() + r.labels[i] * d, d);
  return r;
}

ClusteringResult weighted_kmeans(std::span<const double> points, std::size_t d, std::span<const double> weights,
                                 const KMeansOptions& options) {
  const std::size_t n = point_count(points, d);
  if (options.k == 0 || options.k > n) throw InvalidArgument("k must be in [1, point count]");
  if (!weights.empty() && weights.size() != n) throw InvalidArgument("weight count does not match point count");
  for (double w : weights)
    if (!(w > 0.0)) throw InvalidArgument("weights must be positive");
  if (options.inits == 0) throw InvalidArgument("inits must be positive");

  ClusteringResult best;
  bool have = false;
  for (unsigned init = 0; init < options.inits; ++init) {
    std::mt19937_64 rng(splitmix64(options.seed * 0x100000001b3ULL + init));
    const auto centers = seed_centers(points, d, weights, options.k, rng);
    ClusteringResult r = lloyd(points, d, weights, centers, options.max_iterations);
    if (!have || r.sse < best.sse) {
      best = std::move(r);
      have = true;
    }
  }
  best.seed = options.seed;
  return best;
}

ClusteringResult kmeans(std::span<const double> points, std::size_t d, const KMeansOptions& options) {
  return weighted_kmeans(points, d, {}, options);
}

std::optional<double> approximation_ratio(double sse_compressed, double sse_original) {
  if (!(sse_original > 0.0)) return std::nullopt;
  return sse_compressed / sse_original;
}

double adjusted_mutual_information(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  if (a.size() != b.size()) throw InvalidArgument("label vectors differ in length");
  const std::size_t n = a.size();
  if (n == 0) throw InvalidArgument("empty labelings");

  std::map<std::uint32_t, std::size_t> ia, ib;
  for (auto x : a) ia.emplace(x, ia.size());
  for (auto x : b) ib.emplace(x, ib.size());
  const std::size_t ra = ia.size(), rb = ib.size();
  if (ra < 2 || rb < 2) return 0.0;

  std::vector<double> table(ra * rb, 0.0), rows(ra, 0.0), cols(rb, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t x = ia[a[i]], y = ib[b[i]];
    table[x * rb + y] += 1.0;
    rows[x] += 1.0;
    cols[y] += 1.0;
  }
  const double N = static_cast<double>(n);

  auto entropy = [&](const std::vector<double>& counts) {
    double h = 0.0;
    for (double c : counts)
      if (c > 0) h -= (c / N) * std::log(c / N);
    return h;
  };
  const double ha = entropy(rows), hb = entropy(cols);

  double mi = 0.0;
  for (std::size_t x = 0; x < ra; ++x)
    for (std::size_t y = 0; y < rb; ++y) {
      const double nij = table[x * rb + y];
      if (nij > 0) mi += (nij / N) * std::log(N * nij / (rows[x] * cols[y]));
    }

  // Expected MI under the hypergeometric (permutation) model.
  const double lg_n = std::lgamma(N + 1);
  double emi = 0.0;
  for (std::size_t x = 0; x < ra; ++x) {
    const double ai = rows[x];
    for (std::size_t y = 0; y < rb; ++y) {
      const double bj = cols[y];
      const double lo = std::max(1.0, ai + bj - N);
      const double hi = std::min(ai, bj);
      const double log_front = std::lgamma(ai + 1) + std::lgamma(bj + 1) + std::lgamma(N - ai + 1) +
                               std::lgamma(N - bj + 1) - lg_n;
      for (double nij = lo; nij <= hi; nij += 1.0) {
        const double log_p = log_front - std::lgamma(nij + 1) - std::lgamma(ai - nij + 1) -
                             std::lgamma(bj - nij + 1) - std::lgamma(N - ai - bj + nij + 1);
        emi += (nij / N) * std::log(N * nij / (ai * bj)) * std::exp(log_p);
      }
    }
  }

  const double denominator = 0.5 * (ha + hb) - emi;
  if (std::fabs(denominator) < 1e-15) return mi - emi >= 0 ? 1.0 : 0.0;
  return (mi - emi) / denominator;
}

std::optional<double> silhouette(std::span<const double> points, std::size_t d, std::span<const std::uint32_t> labels,
                                 const SilhouetteOptions& options) {
  const std::size_t n = point_count(points, d);
  if (labels.size() != n) throw InvalidArgument("label count does not match point count");

  std::vector<std::size_t> sample(n);
  std::iota(sample.begin(), sample.end(), 0);
  if (n > options.sample_size) {
    std::mt19937_64 rng(splitmix64(options.seed));
    for (std::size_t i = 0; i < options.sample_size; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
      std::swap(sample[i], sample[j]);
    }
    sample.resize(options.sample_size);
    std::sort(sample.begin(), sample.end());
  }

  std::map<std::uint32_t, std::size_t> cluster_index;
  for (std::size_t i : sample) cluster_index.emplace(labels[i], cluster_index.size());
  const std::size_t k = cluster_index.size();
  if (k < 2) return std::nullopt;

  const std::size_t s = sample.size();
  std::vector<std::size_t> cluster(s);
  std::vector<double> sizes(k, 0.0);
  for (std::size_t i = 0; i < s; ++i) {
    cluster[i] = cluster_index[labels[sample[i]]];
    sizes[cluster[i]] += 1.0;
  }

  double total = 0.0;
  std::vector<double> dist_sum(k);
  for (std::size_t i = 0; i < s; ++i) {
    std::fill(dist_sum.begin(), dist_sum.end(), 0.0);
    const double* p = points.data() + sample[i] * d;
    for (std::size_t j = 0; j < s; ++j) {
      if (j == i) continue;
      dist_sum[cluster[j]] += std::sqrt(squared_distance(p, points.data() + sample[j] * d, d));
    }
    const std::size_t own = cluster[i];
    if (sizes[own] <= 1.0) continue;  // singleton: s(i) = 0
    const double a = dist_sum[own] / (sizes[own] - 1.0);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c)
      if (c != own && sizes[c] > 0) b = std::min(b, dist_sum[c] / sizes[c]);
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(s);
}

Ratios compute_ratios(const Archive& archive, std::uint64_t original_size_bytes, AnalyticsMode mode) {
  if (original_size_bytes == 0) throw InvalidArgument("original size must be positive");
  Ratios r;
  r.archive_bytes = archive.total_size();
  if (mode == AnalyticsMode::Condensed) {
    archive.reset_bytes_read();
    (void)extract_condensed(archive);
    r.analytics_bytes = kHeaderSize + archive.bytes_read();
  } else {
    const ArchiveParams p = read_params(archive);
    const std::uint64_t count_bits = p.n_b * weight_width(p.n);
    r.analytics_bytes = kHeaderSize + archive.section_size(Section::Params) + archive.section_size(Section::Bases) +
                        (count_bits + 7) / 8;
  }
  r.cr = static_cast<double>(r.archive_bytes) / static_cast<double>(original_size_bytes);
  r.adr = static_cast<double>(r.analytics_bytes) / static_cast<double>(original_size_bytes);
  return r;
}

Evaluation evaluate_clustering(std::span<const double> full, std::span<const double> summary,
                               std::span<const double> summary_weights, std::size_t d,
                               const EvaluationOptions& options) {
  using clock = std::chrono::steady_clock;
  const std::size_t m = point_count(summary, d);
  point_count(full, d);
  if (options.repeats == 0) throw InvalidArgument("repeats must be positive");

  std::vector<double> ars, amis, sils, times, ref_times, sse_s, sse_r;
  bool ar_defined = true, sil_defined = true;
  for (unsigned rep = 0; rep < options.repeats; ++rep) {
    KMeansOptions km;
    km.k = options.k;
    km.inits = options.inits;
    km.seed = splitmix64(options.seed + rep);

    auto t0 = clock::now();
    const ClusteringResult reference = kmeans(full, d, km);
    auto t1 = clock::now();
    KMeansOptions km_summary = km;
    km_summary.k = std::min(options.k, m);
    const ClusteringResult compact = weighted_kmeans(summary, d, summary_weights, km_summary);
    auto t2 = clock::now();
    ref_times.push_back(std::chrono::duration<double>(t1 - t0).count());
    times.push_back(std::chrono::duration<double>(t2 - t1).count());

    const double sse_reference = sum_squared_error(full, d, {}, reference.centers);
    const double sse_summary = sum_squared_error(full, d, {}, compact.centers);
    sse_r.push_back(sse_reference);
    sse_s.push_back(sse_summary);
    if (auto ar = approximation_ratio(sse_summary, sse_reference))
      ars.push_back(*ar);
    else
      ar_defined = false;

    const auto transferred = assign_nearest(full, d, compact.centers);
    amis.push_back(adjusted_mutual_information(reference.labels, transferred));
    if (auto s = silhouette(full, d, transferred, {options.silhouette_sample, km.seed}))
      sils.push_back(*s);
    else
      sil_defined = false;
  }

  Evaluation e;
  if (ar_defined) e.ar = median(ars);
  e.ami = median(amis);
  if (sil_defined) e.silhouette = median(sils);
  e.clustering_seconds = median(times);
  e.reference_seconds = median(ref_times);
  e.sse_summary = median(sse_s);
  e.sse_reference = median(sse_r);
  e.summary_points = m;
  return e;
}

}  // namespace entrogd
