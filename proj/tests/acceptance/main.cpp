// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "entrogd/entrogd.hpp"
#include "entrogd/cli/bench.hpp"
#include "entrogd/cli/csv.hpp"
#include "entrogd/cli/synthetic.hpp"
#include "oracles.hpp"

using namespace entrogd;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Check {
  bool ok = true;
  std::string first_failure;
  void expect(bool cond, const std::string& what) {
    if (!cond && ok) first_failure = what;
    ok = ok && cond;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : (v[h - 1] + v[h]) / 2;
}

std::vector<std::pair<std::string, Table>> load_corpus(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".csv") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<std::pair<std::string, Table>> out;
  for (const auto& f : files) out.emplace_back(f.filename().string(), cli::read_csv(f));
  return out;
}

// Size model truth for one compression: reported S against an independent
// recomputation, and every section against its term of the formula.
void check_size(Check& c, const Table& t, const Compressed& z, const std::string& label) {
  const ArchiveParams p = read_params(z.archive);
  const auto& a = z.archive;
  const std::uint64_t s_params = 8 * (a.section_size(Section::Params) + a.section_size(Section::Condensed));
  const std::uint64_t l_c = p.chunk_width, l_b = p.base_bits.positions.size();
  const std::uint64_t expect = oracle::eq4(t.rows(), p.m, p.n_b, l_c, l_b, s_params);
  c.expect(z.stats.size_bits == expect, label + ": S " + std::to_string(z.stats.size_bits) + " != " +
                                            std::to_string(expect));
  const std::uint64_t l_id = p.n_b <= 1 ? 0 : oracle::ceil_log2(p.n_b);
  const std::uint64_t l_w = t.rows() <= 1 ? 1 : oracle::ceil_log2(t.rows());
  const std::uint64_t rows = t.rows() + p.m;
  const std::pair<Section, std::uint64_t> terms[] = {{Section::Bases, p.n_b * l_b},
                                                     {Section::Ids, rows * l_id},
                                                     {Section::Deviations, rows * (l_c - l_b)},
                                                     {Section::Weights, p.m * l_w}};
  for (const auto& [s, bits] : terms) {
    const std::uint64_t bytes = a.section_size(s);
    c.expect(bytes * 8 >= bits && bytes * 8 < bits + 8,
             label + ": section " + std::string(section_name(s)) + " is " + std::to_string(bytes) +
                 " bytes for " + std::to_string(bits) + " bits");
  }
}

Outcome criterion1(const std::vector<std::pair<std::string, Table>>& corpus) {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  std::mt19937_64 rng(1);
  std::size_t cells = 0;
  for (int i = 0; i < 20; ++i) {
    // Log-uniform n in [1, 1e5], with both ends always covered.
    std::size_t n = static_cast<std::size_t>(std::llround(std::pow(10.0, 5.0 * (rng() % 10001) / 10000.0)));
    if (i == 0) n = 1;
    if (i == 1) n = 100000;
    const std::size_t d = 1 + rng() % 16;
    const Table t = cli::random_table(n, d, 1000 + i);
    const Compressed z = compress(t);
    const Table back = decompress(Archive::from_bytes(z.archive.to_bytes()));
    const auto mm = first_mismatch(t, back);
    c.expect(!mm, "random table " + std::to_string(i) + ": " + (mm ? mm->detail : ""));
    cells += n * d;
  }
  for (const auto& [name, t] : corpus) {
    const Table back = decompress(compress(t).archive);
    const auto mm = first_mismatch(t, back);
    c.expect(!mm, name + ": " + (mm ? mm->detail : ""));
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 120, "runtime " + fmt("%.1f", secs) + " s");
  return {c.ok, c.ok ? "20 random tables (" + std::to_string(cells) + " cells) + " + std::to_string(corpus.size()) +
                           " corpus files bit-exact, " + fmt("%.1f", secs) + " s"
                     : c.first_failure};
}

QuantizedMatrix random_matrix(std::mt19937_64& rng) {
  const std::size_t n = 1 + rng() % 400, d = 1 + rng() % 5;
  std::vector<ColumnParams> params;
  std::vector<std::vector<std::uint64_t>> cols;
  for (std::size_t k = 0; k < d; ++k) {
    ColumnParams p;
    p.bit_width = 1 + static_cast<unsigned>(rng() % 10);
    const std::uint64_t mask = (std::uint64_t{1} << p.bit_width) - 1;
    const std::uint64_t distinct = 1 + rng() % 12;
    std::vector<std::uint64_t> pool(distinct);
    for (auto& v : pool) v = rng() & mask;
    std::vector<std::uint64_t> col(n);
    for (auto& v : col) v = pool[rng() % distinct];
    params.push_back(p);
    cols.push_back(std::move(col));
  }
  return QuantizedMatrix(params, cols);
}

Outcome criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  std::mt19937_64 rng(2);
  std::size_t adds = 0;
  for (int i = 0; i < 100; ++i) {
    const QuantizedMatrix q = random_matrix(rng);
    std::vector<BitPos> seq(q.chunk_width());
    std::iota(seq.begin(), seq.end(), 0u);
    std::shuffle(seq.begin(), seq.end(), rng);
    seq.resize(1 + rng() % seq.size());
    BaseTree tree(q);
    std::vector<BitPos> chosen;
    for (BitPos b : seq) {
      chosen.push_back(b);
      const std::size_t got = tree.add_bit(b);
      ++adds;
      c.expect(got == oracle::distinct_projections(q, chosen) && got == tree.leaf_count(),
               "case " + std::to_string(i) + ": leaf count after " + std::to_string(chosen.size()) + " bits");
    }
    const auto groups = oracle::partition(q, chosen);
    const auto leaves = tree.leaves();
    bool same = groups.size() == leaves.size();
    std::size_t j = 0;
    for (const auto& [proj, rows] : groups) {
      if (!same) break;
      same = leaves[j++].rows == rows;
    }
    c.expect(same, "case " + std::to_string(i) + ": final partition differs");
  }
  return {c.ok, c.ok ? "100 cases, " + std::to_string(adds) + " add_bit calls match brute force, " +
                           fmt("%.2f", seconds_since(t0)) + " s"
                     : c.first_failure};
}

std::vector<std::pair<std::string, Table>> size_suite(const std::vector<std::pair<std::string, Table>>& corpus) {
  auto suite = corpus;
  for (int i = 0; i < 10; ++i)
    suite.emplace_back("random" + std::to_string(i), cli::random_table(50 + 997 * i, 1 + i % 9, 2000 + i));
  suite.emplace_back("mixture", cli::gaussian_mixture(20000, 4, 5, 3).table);
  return suite;
}

Outcome criterion3(const std::vector<std::pair<std::string, Table>>& corpus) {
  Check c;
  std::size_t runs = 0;
  for (const auto& [name, t] : size_suite(corpus)) {
    CompressConfig cfg;
    for (auto strategy : {Strategy::Entropy, Strategy::Greedy})
      for (bool exact : {false, true}) {
        cfg.strategy = strategy;
        cfg.exact_truncation = exact;
        const Compressed z = compress(t, cfg);
        check_size(c, t, z, name);
        ++runs;
      }
  }
  return {c.ok, c.ok ? std::to_string(runs) + " compress runs: S exact, every section within 1 byte of its term"
                     : c.first_failure};
}

Outcome criterion4(const std::vector<std::pair<std::string, Table>>& corpus) {
  Check c;
  const double spot = binary_entropy(0.25);
  c.expect(std::abs(spot - 0.8112781244591328639) <= 1e-12, "H(0.25) = " + fmt("%.17g", spot));
  double worst = 0;
  std::size_t steps = 0;
  for (const auto& [name, t] : size_suite(corpus)) {
    const QuantizedMatrix q = quantize_dataset(t);
    const BitStats stats = bit_stats(q);
    for (BitPos b = 0; b < q.chunk_width(); ++b) {
      const double e = std::abs(stats.positions[b].entropy - oracle::entropy_hp(stats.positions[b].ones, q.rows()));
      worst = std::max(worst, e);
    }
    const SelectionResult r = select_compression_bits(q, stats, 0, 10, 0);
    for (std::size_t i = 1; i < r.trace.size(); ++i)
      c.expect(r.trace[i - 1].entropy <= r.trace[i].entropy, name + ": trace entropy decreases at step " +
                                                                   std::to_string(i));
    steps += r.trace.size();
    // The codec path emits the same ordering over the extended matrix.
    const Compressed z = compress(t);
    for (std::size_t i = 1; i < z.stats.selection.trace.size(); ++i)
      c.expect(z.stats.selection.trace[i - 1].entropy <= z.stats.selection.trace[i].entropy,
               name + ": codec trace entropy decreases");
  }
  c.expect(worst <= 1e-12, "entropy error " + fmt("%.3g", worst));
  return {c.ok, c.ok ? "H(0.25) = " + fmt("%.16f", spot) + ", max |H - H_ref| = " + fmt("%.2g", worst) + ", " +
                           std::to_string(steps) + " trace steps non-decreasing"
                     : c.first_failure};
}

Outcome criterion5(const std::vector<std::pair<std::string, Table>>& corpus) {
  Check c;
  double worst_ratio = 0;  // |error| / (0.5 * quantum * n), worst over columns and modes
  for (const auto& [name, t] : corpus) {
    const QuantizedMatrix q = quantize_dataset(t);
    for (bool exact : {false, true}) {
      CondensedOptions o;
      o.m_max = default_m_max(q.rows());
      o.exact_truncation = exact;
      const CondensedSampleSet cs = generate_condensed_samples(q, o);
      const std::size_t d = q.cols(), n = q.rows();
      c.expect(cs.total_weight() == n, name + ": weights do not sum to n");
      for (std::size_t col = 0; col < d; ++col) {
        // Exact quantized sums before rounding.
        WideSum full = 0, sampled = 0, rounded = 0;
        for (std::size_t r = 0; r < n; ++r) full += q.value(r, col);
        for (std::size_t j = 0; j < cs.size(); ++j) {
          sampled += cs.quantized_sums[j * d + col];
          rounded += static_cast<WideSum>(cs.requantized[j * d + col]) * cs.weights[j];
        }
        c.expect(full == sampled, name + ": quantized sums differ in column " + std::to_string(col));
        // Quantized units are exact multiples of the quantum, so this is the
        // bound 0.5 * quantum * n without floating-point summation error.
        const long double unit_err = std::fabs(static_cast<long double>(rounded) - static_cast<long double>(full));
        worst_ratio = std::max(worst_ratio, static_cast<double>(unit_err / (0.5L * n)));
        c.expect(unit_err <= 0.5L * n, name + ": column " + std::to_string(col) + " requantized sum off by " +
                                           std::to_string(static_cast<double>(unit_err)) + " quanta");

        // Original-domain samples, where a quantum exists. Summing n doubles
        // rounds on its own, so that rounding is allowed on top of the bound.
        const double quantum = q.params(col).quantum();
        if (quantum <= 0) continue;
        long double domain_full = 0, domain_samples = 0, magnitude = 0;
        for (std::size_t r = 0; r < n; ++r) {
          domain_full += t.as_double(r, col);
          magnitude += std::fabs(t.as_double(r, col));
        }
        for (std::size_t j = 0; j < cs.size(); ++j)
          domain_samples += static_cast<long double>(cs.weights[j]) * cs.sample(j)[col];
        const long double err = std::fabs(domain_samples - domain_full);
        c.expect(err <= 0.5L * quantum * n + 0x1p-52L * magnitude,
                 name + ": column " + std::to_string(col) + " domain sum off by " +
                     std::to_string(static_cast<double>(err)));
      }
    }
  }
  return {c.ok, c.ok ? std::to_string(corpus.size()) + " corpus files: exact quantized sums, worst error " +
                           fmt("%.3f", worst_ratio) + " of 0.5*quantum*n"
                     : c.first_failure};
}

Outcome criterion6() {
  const auto t0 = std::chrono::steady_clock::now();
  cli::ScalingConfig cfg;  // n = 20000, d in {4, 8, 16, 32}
  const cli::ScalingResult r = cli::run_scaling(cfg);
  const auto& last = r.points.back();
  const double speedup = last.greedy_seconds / last.entropy_seconds;
  const double secs = seconds_since(t0);
  Check c;
  c.expect(r.entropy_slope <= 1.3, "entropy slope " + fmt("%.2f", r.entropy_slope));
  c.expect(r.greedy_slope >= 1.7, "greedy slope " + fmt("%.2f", r.greedy_slope));
  c.expect(speedup >= 5.0, "speedup at d=32 " + fmt("%.1f", speedup));
  c.expect(secs < 600, "runtime " + fmt("%.0f", secs) + " s");
  const std::string summary = "slopes entropy " + fmt("%.2f", r.entropy_slope) + ", greedy " +
                              fmt("%.2f", r.greedy_slope) + "; speedup at d=32 " + fmt("%.1f", speedup) + "x, " +
                              fmt("%.0f", secs) + " s";
  return {c.ok, c.ok ? summary : c.first_failure + " (" + summary + ")"};
}

struct MixtureRun {
  double ar_condensed = 0, ami_condensed = 0, ar_centroid = 0;
  double t_condensed = 0, t_full = 0;
};

std::vector<MixtureRun> mixture_suite() {
  std::vector<MixtureRun> runs;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto mix = cli::gaussian_mixture(50000, 5, 5, seed);
    CompressConfig cfg;
    cfg.m_max = 1024;
    const Compressed z = compress(mix.table, cfg);
    const std::vector<double> full = mix.table.to_row_major();
    EvaluationOptions eo;
    eo.k = 5;
    eo.repeats = 1;
    eo.seed = seed;

    const CondensedSampleSet cs = extract_condensed(z.archive);
    const std::vector<double> w(cs.weights.begin(), cs.weights.end());
    const Evaluation ev = evaluate_clustering(full, cs.samples, w, 5, eo);

    const BaseCentroids bc = base_centroids(z.archive);
    const std::vector<double> bw(bc.counts.begin(), bc.counts.end());
    const Evaluation evc = evaluate_clustering(full, bc.centroids, bw, 5, eo);

    MixtureRun r;
    r.ar_condensed = ev.ar.value_or(INFINITY);
    r.ami_condensed = ev.ami;
    r.ar_centroid = evc.ar.value_or(INFINITY);
    r.t_condensed = ev.clustering_seconds;
    r.t_full = ev.reference_seconds;
    runs.push_back(r);
  }
  return runs;
}

Outcome criterion7(const std::vector<MixtureRun>& runs, double secs) {
  std::vector<double> ar, ami, tc, tf;
  for (const auto& r : runs) {
    ar.push_back(r.ar_condensed);
    ami.push_back(r.ami_condensed);
    tc.push_back(r.t_condensed);
    tf.push_back(r.t_full);
  }
  Check c;
  const double m_ar = median(ar), m_ami = median(ami), m_tc = median(tc), m_tf = median(tf);
  c.expect(m_ar <= 1.05, "median AR " + fmt("%.4f", m_ar));
  c.expect(m_ami >= 0.90, "median AMI " + fmt("%.4f", m_ami));
  c.expect(m_tc < m_tf, "condensed clustering not faster");
  c.expect(secs < 300, "runtime " + fmt("%.0f", secs) + " s");
  const std::string summary = "median AR " + fmt("%.4f", m_ar) + ", AMI " + fmt("%.4f", m_ami) + ", clustering " +
                              fmt("%.4f", m_tc) + " s vs full " + fmt("%.3f", m_tf) + " s (" +
                              fmt("%.0f", m_tf / m_tc) + "x)";
  return {c.ok, c.ok ? summary : c.first_failure + " (" + summary + ")"};
}

Outcome criterion8(const std::vector<MixtureRun>& runs) {
  std::vector<double> condensed, centroid;
  for (const auto& r : runs) {
    condensed.push_back(r.ar_condensed);
    centroid.push_back(r.ar_centroid);
  }
  const double a = median(condensed), b = median(centroid);
  return {a <= b, "median AR condensed " + fmt("%.4f", a) + " vs base-centroid " + fmt("%.4f", b)};
}

Outcome criterion9() {
  Check c;
  std::mt19937_64 rng(9);
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t m = 2 + rng() % 11, d = 1 + rng() % 3, k = 1 + rng() % std::min<std::size_t>(m, 4);
    std::vector<double> pts, w, expanded;
    std::vector<std::size_t> source;
    std::set<std::vector<double>> seen;
    while (pts.size() < m * d) {
      std::vector<double> p(d);
      for (auto& x : p) x = static_cast<double>(static_cast<int>(rng() % 2001) - 1000) / 8.0;
      if (!seen.insert(p).second) continue;
      const unsigned copies = 1 + rng() % 6;
      pts.insert(pts.end(), p.begin(), p.end());
      w.push_back(copies);
      for (unsigned t = 0; t < copies; ++t) {
        expanded.insert(expanded.end(), p.begin(), p.end());
        source.push_back(w.size() - 1);
      }
    }
    const std::vector<double> init(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(k * d));
    const ClusteringResult got = lloyd(pts, d, w, init);
    const oracle::LloydResult want = oracle::naive_lloyd(expanded, d, init);
    const double err = std::abs(got.sse - want.sse);
    worst = std::max(worst, err);
    c.expect(err <= 1e-9, "instance " + std::to_string(i) + ": SSE " + fmt("%.12g", got.sse) + " vs " +
                              fmt("%.12g", want.sse));
    bool same = true;
    for (std::size_t e = 0; e < source.size(); ++e) same = same && got.labels[source[e]] == want.labels[e];
    c.expect(same, "instance " + std::to_string(i) + ": partitions differ");
  }
  return {c.ok, c.ok ? "50 instances: same partition, max SSE difference " + fmt("%.2g", worst) : c.first_failure};
}

Outcome criterion10() {
  Check c;
  std::mt19937_64 rng(10);
  std::size_t runs = 0;
  for (int i = 0; i < 60; ++i) {
    const Table t = cli::random_table(1 + rng() % 3000, 1 + rng() % 6, 3000 + i);
    const QuantizedMatrix q = quantize_dataset(t);
    std::set<std::vector<std::uint64_t>> rows;
    for (std::size_t r = 0; r < q.rows(); ++r) {
      std::vector<std::uint64_t> row(q.cols());
      for (std::size_t col = 0; col < q.cols(); ++col) row[col] = q.value(r, col);
      rows.insert(std::move(row));
    }
    CondensedOptions o;
    o.m_max = 2 + rng() % 200;
    const CondensedSampleSet cs = generate_condensed_samples(q, o);
    if (cs.count_before_last_bit)
      c.expect(*cs.count_before_last_bit < o.m_max, "run " + std::to_string(i) + ": " +
                                                        std::to_string(*cs.count_before_last_bit) +
                                                        " leaves before the last bit, m_max " +
                                                        std::to_string(o.m_max));
    o.exact_truncation = true;
    const CondensedSampleSet ex = generate_condensed_samples(q, o);
    c.expect(ex.size() == std::min(o.m_max, rows.size()), "run " + std::to_string(i) + ": m " +
                                                               std::to_string(ex.size()) + ", expected " +
                                                               std::to_string(std::min(o.m_max, rows.size())));
    c.expect(ex.total_weight() == q.rows(), "run " + std::to_string(i) + ": weights do not sum to n");
    ++runs;
  }
  return {c.ok, c.ok ? std::to_string(runs) + " randomized runs hold the contract" : c.first_failure};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  fs::path data;
  std::vector<int> only;
  app.add_option("--data", data, "Corpus directory")->required()->check(CLI::ExistingDirectory);
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const auto corpus = load_corpus(data);
  auto wanted = [&](int i) { return only.empty() || std::count(only.begin(), only.end(), i); };

  int failed = 0;
  auto report = [&](int i, const char* name, const std::function<Outcome()>& run) {
    if (!wanted(i)) return;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %2d %-4s %-26s %s\n", i, o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  };

  report(1, "lossless round trip", [&] { return criterion1(corpus); });
  report(2, "base tree oracle", [] { return criterion2(); });
  report(3, "size model truth", [&] { return criterion3(corpus); });
  report(4, "entropy order", [&] { return criterion4(corpus); });
  report(5, "mass conservation", [&] { return criterion5(corpus); });
  report(6, "configuration scaling", [] { return criterion6(); });

  std::vector<MixtureRun> runs;
  double mixture_secs = 0;
  if (wanted(7) || wanted(8)) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      runs = mixture_suite();
    } catch (const std::exception& e) {
      std::printf("mixture suite failed: %s\n", e.what());
    }
    mixture_secs = seconds_since(t0);
  }
  report(7, "clustering fidelity", [&] {
    return runs.empty() ? Outcome{false, "no mixture runs"} : criterion7(runs, mixture_secs);
  });
  report(8, "condensed vs centroid", [&] {
    return runs.empty() ? Outcome{false, "no mixture runs"} : criterion8(runs);
  });
  report(9, "weighted k-means", [] { return criterion9(); });
  report(10, "m_max contract", [] { return criterion10(); });

  std::printf("%s\n", failed ? "acceptance: FAILED" : "acceptance: all criteria passed");
  return failed ? 1 : 0;
}
