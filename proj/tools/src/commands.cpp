#include "entrogd/cli/commands.hpp"

#include <chrono>
#include <fstream>

namespace entrogd::cli {

namespace {

const char* kind_name(ColumnKind k) { return k == ColumnKind::Integer ? "int" : "float"; }

const char* encoding_name(Encoding e) {
  switch (e) {
    case Encoding::Offset: return "offset";
    case Encoding::Scaled: return "scaled";
    case Encoding::RawBits: return "raw_bits";
  }
  return "?";
}

Json model_json(const SizeModel& m) {
  return Json{{"n", m.n},       {"m", m.m},         {"n_b", m.n_b},           {"l_b", m.l_b},
              {"l_d", m.l_d},   {"l_w", m.l_w},     {"l_id", m.l_id},         {"S_params", m.s_params},
              {"S", compressed_size(m)}};
}

/// The size formula recomputed from the stored fields alone, independent of SizeModel.
std::uint64_t recompute_size(const SizeModel& m) {
  return m.n_b * m.l_b + (m.n + m.m) * (m.l_d + m.l_id) + m.m * m.l_w + m.s_params;
}

Json columns_json(const std::vector<ColumnParams>& columns, const std::vector<std::string>& names) {
  Json out = Json::array();
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const auto& p = columns[c];
    out.push_back({{"name", c < names.size() ? names[c] : ""},
                   {"kind", kind_name(p.kind)},
                   {"encoding", encoding_name(p.encoding)},
                   {"precision", static_cast<int>(p.precision)},
                   {"decimal_scale", p.decimal_scale},
                   {"offset", p.offset},
                   {"bit_width", p.bit_width}});
  }
  return out;
}

Json sections_json(const Archive& archive) {
  Json out = Json::object();
  for (std::size_t s = 0; s < kSectionCount; ++s)
    out[std::string(section_name(static_cast<Section>(s)))] = archive.section_size(static_cast<Section>(s));
  return out;
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

bool looks_like_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[4] = {};
  in.read(magic, 4);
  return in.gcount() == 4 && std::string(magic, 4) == "EGD1";
}

void write_points(const std::filesystem::path& path, const std::vector<double>& points, std::size_t d,
                  const std::vector<double>& weights) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (std::size_t c = 0; c < d; ++c) out << "x" << c << ",";
  out << "weight\n";
  out.precision(17);
  for (std::size_t j = 0; j < weights.size(); ++j) {
    for (std::size_t c = 0; c < d; ++c) out << points[j * d + c] << ",";
    out << weights[j] << "\n";
  }
}

}  // namespace

Json config_echo(const RunConfig& config) {
  Json j;
  j["input"] = config.input.string();
  j["output"] = config.output.string();
  if (!config.original.empty()) j["original"] = config.original.string();
  j["kinds"] = config.kinds;
  j["float_precision"] = static_cast<int>(config.float_precision);
  j["allow_raw_bits"] = config.allow_raw_bits;
  j["m_max"] = config.m_max ? Json(*config.m_max) : Json("auto");
  j["tau"] = config.tau;
  j["importance"] = config.importance ? Json(*config.importance) : Json(nullptr);
  j["exact_truncation"] = config.exact_truncation;
  j["strategy"] = config.strategy == Strategy::Entropy ? "entropy" : "greedy";
  j["k"] = config.k;
  j["repeats"] = config.repeats;
  j["inits"] = config.inits;
  j["seed"] = config.seed;
  j["mode"] = config.mode == AnalyticsMode::Condensed ? "condensed" : "centroid";
  j["silhouette_sample"] = config.silhouette_sample;
  return j;
}

CsvOptions csv_options(const RunConfig& config) {
  CsvOptions o;
  for (const auto& k : config.kinds) o.kinds.push_back(parse_kind(k));
  o.float_precision = config.float_precision;
  return o;
}

CompressConfig compress_config(const RunConfig& config) {
  CompressConfig c;
  c.m_max = config.m_max;
  c.tau = config.tau;
  c.importance = config.importance;
  c.exact_truncation = config.exact_truncation;
  c.strategy = config.strategy;
  c.quantize.allow_raw_bits = config.allow_raw_bits;
  return c;
}

Json compress_report(const Table& table, const Compressed& compressed) {
  const auto& st = compressed.stats;
  const SizeModel stored = stored_size_model(compressed.archive);
  const std::uint64_t original = table.original_size_bytes();
  Json j;
  j["n"] = table.rows();
  j["d"] = table.cols();
  j["m"] = st.model.m;
  j["m_max"] = st.m_max;
  j["n_b"] = st.model.n_b;
  j["selected_bits"] = st.selection.best.sorted();
  j["analytic_bits"] = st.condensed.analytic_bits.sorted();
  j["size_model"] = model_json(st.model);
  j["S"] = st.size_bits;
  j["S_recomputed"] = recompute_size(stored);
  j["S_matches"] = st.size_bits == recompute_size(stored);
  j["archive_bytes"] = compressed.archive.total_size();
  j["original_bytes"] = original;
  j["CR"] = original ? static_cast<double>(compressed.archive.total_size()) / static_cast<double>(original) : 0.0;
  j["configuration_seconds"] = st.configuration_seconds;
  j["sections"] = sections_json(compressed.archive);
  return j;
}

Json cmd_compress(const RunConfig& config) {
  if (config.output.empty()) throw InvalidArgument("compress needs an output path");
  const Table table = read_csv(config.input, csv_options(config));
  const Compressed compressed = compress(table, compress_config(config));
  compressed.archive.save(config.output);
  Json j{{"command", "compress"}, {"config", config_echo(config)}};
  j.update(compress_report(table, compressed));
  return j;
}

Json cmd_decompress(const RunConfig& config) {
  if (config.output.empty()) throw InvalidArgument("decompress needs an output path");
  const Archive archive = Archive::open(config.input);
  const Table table = decompress(archive);
  write_csv(config.output, table);
  return Json{{"command", "decompress"}, {"config", config_echo(config)}, {"rows", table.rows()},
              {"cols", table.cols()}};
}

VerifyResult cmd_verify(const RunConfig& config) {
  if (config.original.empty()) throw InvalidArgument("verify needs the original CSV");
  const Archive archive = Archive::open(config.input);
  const ArchiveParams params = read_params(archive);
  const Table decoded = decompress(archive);
  const Table reference = read_csv_like(config.original, params.columns);

  VerifyResult result;
  result.mismatch = first_mismatch(reference, decoded);
  result.pass = !result.mismatch;
  result.report = Json{{"command", "verify"}, {"config", config_echo(config)}, {"pass", result.pass}};
  if (result.mismatch) {
    result.report["mismatch"] = {{"row", result.mismatch->row},
                                 {"column", result.mismatch->column},
                                 {"column_name", result.mismatch->column < params.names.size()
                                                     ? params.names[result.mismatch->column]
                                                     : ""},
                                 {"detail", result.mismatch->detail}};
  }
  return result;
}

Json cmd_analyze(const RunConfig& config) {
  std::optional<Archive> archive;
  std::optional<double> configuration_seconds;
  Json compression = nullptr;
  if (looks_like_archive(config.input)) {
    archive = Archive::open(config.input);
  } else {
    const Table table = read_csv(config.input, csv_options(config));
    Compressed compressed = compress(table, compress_config(config));
    configuration_seconds = compressed.stats.configuration_seconds;
    compression = compress_report(table, compressed);
    archive = compressed.archive;
  }
  const ArchiveParams params = read_params(*archive);
  const Ratios ratios = compute_ratios(*archive, params.original_size_bytes(), config.mode);

  std::vector<double> points;
  std::vector<double> weights;
  if (config.mode == AnalyticsMode::Condensed) {
    if (params.m == 0) throw InvalidArgument("archive holds no condensed samples; use --mode centroid");
    CondensedSampleSet set = extract_condensed(*archive);
    points = std::move(set.samples);
    weights.assign(set.weights.begin(), set.weights.end());
  } else {
    BaseCentroids bc = base_centroids(*archive);
    points = std::move(bc.centroids);
    weights.assign(bc.counts.begin(), bc.counts.end());
  }
  const std::vector<double> full = decompress(*archive).to_row_major();

  EvaluationOptions eo;
  eo.k = config.k;
  eo.repeats = config.repeats;
  eo.inits = config.inits;
  eo.seed = config.seed;
  eo.silhouette_sample = config.silhouette_sample;
  const Evaluation ev = evaluate_clustering(full, points, weights, params.d(), eo);

  Json metrics{{"CR", ratios.cr},
               {"ADR", ratios.adr},
               {"AR", optional_number(ev.ar)},
               {"AMI", ev.ami},
               {"silhouette", optional_number(ev.silhouette)},
               {"configuration_seconds", configuration_seconds ? Json(*configuration_seconds) : Json(nullptr)},
               {"clustering_seconds", ev.clustering_seconds},
               {"reference_clustering_seconds", ev.reference_seconds}};
  Json j{{"command", "analyze"},
         {"config", config_echo(config)},
         {"metrics", metrics},
         {"summary_points", ev.summary_points},
         {"sse_summary_centers", ev.sse_summary},
         {"sse_reference_centers", ev.sse_reference},
         {"archive_bytes", ratios.archive_bytes},
         {"analytics_bytes", ratios.analytics_bytes}};
  if (!compression.is_null()) j["compression"] = compression;

  if (!config.plot_dir.empty()) {
    std::filesystem::create_directories(config.plot_dir);
    write_points(config.plot_dir / "summary_points.csv", points, params.d(), weights);
    std::ofstream(config.plot_dir / "metrics.json") << j.dump(2) << "\n";
    j["plot_files"] = {(config.plot_dir / "summary_points.csv").string(),
                       (config.plot_dir / "metrics.json").string()};
  }
  return j;
}

Json cmd_stats(const RunConfig& config) {
  const Archive archive = Archive::open(config.input);
  const ArchiveParams p = read_params(archive);
  const SizeModel model = stored_size_model(archive);
  std::uint64_t predicted = 0;  // section bytes implied by the size model
  predicted += (model.n_b * model.l_b + 7) / 8;
  predicted += ((model.n + model.m) * model.l_id + 7) / 8;
  predicted += ((model.n + model.m) * model.l_d + 7) / 8;
  predicted += (model.m * model.l_w + 7) / 8;
  predicted += model.s_params / 8;
  Json j{{"command", "stats"},
         {"config", config_echo(config)},
         {"n", p.n},
         {"d", p.d()},
         {"m", p.m},
         {"m_max", p.m_max},
         {"n_b", p.n_b},
         {"chunk_width", p.chunk_width},
         {"tau", p.tau},
         {"strategy", p.strategy == Strategy::Entropy ? "entropy" : "greedy"},
         {"exact_truncation", p.exact_truncation},
         {"base_bits", p.base_bits.positions},
         {"analytic_bits", p.analytic_bits.positions},
         {"columns", columns_json(p.columns, p.names)},
         {"size_model", model_json(model)},
         {"payload_bytes", archive.total_size() - kHeaderSize},
         {"payload_bytes_from_model", predicted},
         {"archive_bytes", archive.total_size()},
         {"original_bytes", p.original_size_bytes()},
         {"CR", p.original_size_bytes()
                    ? static_cast<double>(archive.total_size()) / static_cast<double>(p.original_size_bytes())
                    : 0.0},
         {"sections", sections_json(archive)}};
  return j;
}

}  // namespace entrogd::cli
