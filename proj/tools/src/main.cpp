#include <iostream>

#include <CLI11.hpp>

#include "entrogd/cli/bench.hpp"
#include "entrogd/cli/commands.hpp"

using namespace entrogd;
using namespace entrogd::cli;

namespace {

void print(const Json& j, bool json) {
  if (json) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  for (const auto& [key, value] : j.items()) {
    if (key == "config" || key == "command") continue;
    if (value.is_object() || (value.is_array() && value.size() > 16)) {
      std::cout << key << ": " << value.dump() .substr(0, 200) << (value.dump().size() > 200 ? " ..." : "") << "\n";
    } else {
      std::cout << key << ": " << value.dump() << "\n";
    }
  }
}

void add_ingest_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--kinds", cfg.kinds, "Per-column kind: auto, int or float")->delimiter(',');
  cmd->add_option_function<int>(
         "--float-precision",
         [&cfg](int bits) {
           if (bits != 32 && bits != 64) throw CLI::ValidationError("--float-precision", "must be 32 or 64");
           cfg.float_precision = bits == 32 ? Precision::Bits32 : Precision::Bits64;
         },
         "Float column precision in bits (32 or 64)")
      ->default_str("64");
  cmd->add_flag_function(
      "--no-raw-bits", [&cfg](std::int64_t) { cfg.allow_raw_bits = false; },
      "Fail instead of storing raw IEEE-754 bits when no decimal scale fits");
}

void add_codec_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--m-max", cfg.m_max, "Condensed sample budget (default min(4096, max(16, n/100)))");
  cmd->add_option("--tau", cfg.tau, "Stop after this many non-improving bits")->capture_default_str();
  cmd->add_option("--importance", cfg.importance, "Per-column importance weights")->delimiter(',');
  cmd->add_flag("--exact-truncation", cfg.exact_truncation, "Merge samples down to exactly m_max");
  cmd->add_option("--strategy", "Bit selection strategy")
      ->check(CLI::IsMember({"entropy", "greedy"}))
      ->each([&cfg](const std::string& v) { cfg.strategy = v == "greedy" ? Strategy::Greedy : Strategy::Entropy; })
      ->default_str("entropy");
}

void add_analytics_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("-k,--clusters", cfg.k, "Number of clusters")->capture_default_str();
  cmd->add_option("--repeats", cfg.repeats, "Repeats (medians are reported)")->capture_default_str();
  cmd->add_option("--inits", cfg.inits, "k-means++ initialisations per run")->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  cmd->add_option("--mode", "Summary used for clustering")
      ->check(CLI::IsMember({"condensed", "centroid"}))
      ->each([&cfg](const std::string& v) {
        cfg.mode = v == "centroid" ? AnalyticsMode::Centroid : AnalyticsMode::Condensed;
      })
      ->default_str("condensed");
  cmd->add_option("--silhouette-sample", cfg.silhouette_sample, "Points sampled for the silhouette")
      ->capture_default_str();
  cmd->add_option("--plot-dir", cfg.plot_dir, "Write summary points and metrics here");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"egd: entropy-guided generalized deduplication"};
  app.require_subcommand(1);
  bool json = false;
  app.add_flag("--json", json, "Machine-readable JSON on stdout");

  RunConfig cfg;
  auto* compress = app.add_subcommand("compress", "Compress a CSV into an archive");
  compress->add_option("input", cfg.input, "Input CSV")->required()->check(CLI::ExistingFile);
  compress->add_option("-o,--output", cfg.output, "Archive path")->required();
  add_ingest_flags(compress, cfg);
  add_codec_flags(compress, cfg);

  auto* decompress = app.add_subcommand("decompress", "Restore the original CSV");
  decompress->add_option("input", cfg.input, "Archive")->required()->check(CLI::ExistingFile);
  decompress->add_option("-o,--output", cfg.output, "CSV path")->required();

  auto* verify = app.add_subcommand("verify", "Check an archive against the original CSV");
  verify->add_option("input", cfg.input, "Archive")->required()->check(CLI::ExistingFile);
  verify->add_option("original", cfg.original, "Original CSV")->required()->check(CLI::ExistingFile);

  auto* analyze = app.add_subcommand("analyze", "Cluster on the compressed summary and report metrics");
  analyze->add_option("input", cfg.input, "Archive, or a CSV to compress in memory")
      ->required()
      ->check(CLI::ExistingFile);
  add_ingest_flags(analyze, cfg);
  add_codec_flags(analyze, cfg);
  add_analytics_flags(analyze, cfg);

  auto* stats = app.add_subcommand("stats", "Describe an archive");
  stats->add_option("input", cfg.input, "Archive")->required()->check(CLI::ExistingFile);

  BenchConfig bench_cfg;
  ScalingConfig scaling_cfg;
  bool scaling = false;
  bool no_greedy = false;
  auto* bench = app.add_subcommand("bench", "Compare against external compressors, or measure scaling");
  bench->add_option("datasets", bench_cfg.datasets, "CSV datasets")->check(CLI::ExistingFile);
  bench->add_option("--tools", bench_cfg.tools, "External compressors (bzip2,lz4,snappy,zlib,zstd,gzip,xz)")
      ->delimiter(',');
  bench->add_option("--workdir", bench_cfg.workdir, "Scratch directory");
  bench->add_flag("--no-greedy", no_greedy, "Skip the greedy baseline");
  bench->add_flag("--scaling", scaling, "Configuration-time scaling over synthetic tables");
  bench->add_option("--rows", scaling_cfg.rows, "Scaling: rows per table")->capture_default_str();
  bench->add_option("--dims", scaling_cfg.dims, "Scaling: column counts")->delimiter(',');
  bench->add_option("--timing-repeats", scaling_cfg.repeats, "Scaling: best-of repeats")->capture_default_str();
  add_ingest_flags(bench, cfg);
  add_codec_flags(bench, cfg);
  bench->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (compress->parsed()) {
      print(cmd_compress(cfg), json);
    } else if (decompress->parsed()) {
      print(cmd_decompress(cfg), json);
    } else if (verify->parsed()) {
      VerifyResult r = cmd_verify(cfg);
      print(r.report, json);
      if (!r.pass && !json) {
        std::cerr << "mismatch at row " << r.mismatch->row << ", column " << r.mismatch->column << ": "
                  << r.mismatch->detail << "\n";
      }
      return r.pass ? kExitOk : kExitMismatch;
    } else if (analyze->parsed()) {
      print(cmd_analyze(cfg), json);
    } else if (stats->parsed()) {
      print(cmd_stats(cfg), json);
    } else if (bench->parsed()) {
      if (scaling) {
        scaling_cfg.tau = cfg.tau;
        scaling_cfg.seed = cfg.seed;
        scaling_cfg.include_greedy = !no_greedy;
        print(scaling_report(scaling_cfg, run_scaling(scaling_cfg)), json);
      } else {
        if (bench_cfg.datasets.empty()) throw InvalidArgument("bench needs datasets, or --scaling");
        bench_cfg.include_greedy = !no_greedy;
        bench_cfg.run = cfg;
        print(cmd_bench(bench_cfg), json);
      }
    }
  } catch (const IntegrityError& e) {
    std::cerr << "integrity error: " << e.what() << "\n";
    if (json) std::cout << Json{{"error", "integrity"}, {"section", e.section()}, {"message", e.what()}}.dump(2) << "\n";
    return kExitIntegrity;
  } catch (const CsvError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    if (json) std::cout << Json{{"error", "input"}, {"row", e.row()}, {"column", e.column()}, {"message", e.what()}}.dump(2) << "\n";
    return kExitError;
  } catch (const QuantizationError& e) {
    std::cerr << "quantization error: " << e.what() << "\n";
    if (json) std::cout << Json{{"error", "quantization"}, {"row", e.row()}, {"column", e.column()}, {"message", e.what()}}.dump(2) << "\n";
    return kExitError;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitOk;
}
