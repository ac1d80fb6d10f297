#include "entrogd/cli/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <random>

#include "entrogd/cli/synthetic.hpp"

namespace entrogd::cli {

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char ch : s) {
    if (ch == '\'') out += "'\\''";
    else out += ch;
  }
  return out + "'";
}

double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Json box_json(const std::vector<double>& values) {
  if (values.empty()) return nullptr;
  const BoxStats b = box_stats(values);
  return Json{{"min", b.min}, {"q1", b.q1}, {"median", b.median}, {"q3", b.q3}, {"max", b.max}};
}

std::filesystem::path make_workdir() {
  std::random_device rd;
  auto dir = std::filesystem::temp_directory_path() / ("egd-bench-" + std::to_string(rd()));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

std::vector<ExternalTool> default_tools() {
  return {
      {"bzip2", "bzip2", {"-9", "-c"}},
      {"lz4", "lz4", {"-12", "-c"}},
      {"snappy", "snzip", {"-c"}},
      {"zlib", "pigz", {"-z", "-11", "-c"}},
      {"zstd", "zstd", {"--ultra", "-22", "-c", "-q"}},
  };
}

std::optional<ExternalTool> find_tool(const std::string& name) {
  for (auto& t : default_tools())
    if (t.name == name) return t;
  if (name == "gzip") return ExternalTool{"gzip", "gzip", {"-9", "-c"}};
  if (name == "xz") return ExternalTool{"xz", "xz", {"-9e", "-c"}};
  return std::nullopt;
}

bool tool_available(const ExternalTool& tool) {
  const std::string cmd = "command -v " + shell_quote(tool.program) + " >/dev/null 2>&1";
  return std::system(cmd.c_str()) == 0;
}

std::optional<std::uint64_t> run_external(const ExternalTool& tool, const std::filesystem::path& input,
                                          const std::filesystem::path& workdir) {
  if (!tool_available(tool)) return std::nullopt;
  const auto out = workdir / (input.filename().string() + "." + tool.name);
  std::string cmd = shell_quote(tool.program);
  for (const auto& a : tool.args) cmd += " " + shell_quote(a);
  cmd += " < " + shell_quote(input.string()) + " > " + shell_quote(out.string()) + " 2>/dev/null";
  if (std::system(cmd.c_str()) != 0) return std::nullopt;
  std::error_code ec;
  const auto size = std::filesystem::file_size(out, ec);
  std::filesystem::remove(out, ec);
  if (ec) return std::nullopt;
  return size;
}

void write_binary(const Table& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (const Column& col : table.columns()) {
      unsigned char buf[8];
      std::size_t width = static_cast<std::size_t>(col.precision) / 8;
      std::uint64_t bits = 0;
      if (col.kind == ColumnKind::Integer) {
        bits = static_cast<std::uint64_t>(col.ints[r]);
      } else if (col.precision == Precision::Bits32) {
        float f = static_cast<float>(col.reals[r]);
        std::uint32_t u;
        std::memcpy(&u, &f, 4);
        bits = u;
      } else {
        std::memcpy(&bits, &col.reals[r], 8);
      }
      for (std::size_t i = 0; i < width; ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
      out.write(reinterpret_cast<const char*>(buf), static_cast<std::streamsize>(width));
    }
  }
}

BoxStats box_stats(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("box_stats of an empty set");
  std::sort(values.begin(), values.end());
  return {values.front(), quantile(values, 0.25), quantile(values, 0.5), quantile(values, 0.75), values.back()};
}

Json cmd_bench(const BenchConfig& config) {
  std::vector<ExternalTool> tools;
  if (config.tools.empty()) {
    tools = default_tools();
  } else {
    for (const auto& name : config.tools) {
      auto t = find_tool(name);
      tools.push_back(t ? *t : ExternalTool{name, name, {}});
    }
  }
  const bool own_workdir = config.workdir.empty();
  const auto workdir = own_workdir ? make_workdir() : config.workdir;
  std::filesystem::create_directories(workdir);

  std::vector<std::string> methods{"entrogd"};
  if (config.include_greedy) methods.push_back("greedy");
  for (const auto& t : tools) methods.push_back(t.name);
  std::map<std::string, std::vector<double>> crs;

  Json rows = Json::array();
  for (const auto& path : config.datasets) {
    const Table table = read_csv(path, csv_options(config.run));
    const double original = static_cast<double>(table.original_size_bytes());
    Json row{{"dataset", path.filename().string()}, {"n", table.rows()}, {"d", table.cols()},
             {"original_bytes", table.original_size_bytes()}};

    CompressConfig cc = compress_config(config.run);
    cc.strategy = Strategy::Entropy;
    const Compressed entropy = compress(table, cc);
    row["entrogd"] = {{"CR", static_cast<double>(entropy.archive.total_size()) / original},
                      {"configuration_seconds", entropy.stats.configuration_seconds},
                      {"n_b", entropy.stats.model.n_b},
                      {"m", entropy.stats.model.m}};
    crs["entrogd"].push_back(row["entrogd"]["CR"].get<double>());

    if (config.include_greedy) {
      cc.strategy = Strategy::Greedy;
      const Compressed greedy = compress(table, cc);
      row["greedy"] = {{"CR", static_cast<double>(greedy.archive.total_size()) / original},
                       {"configuration_seconds", greedy.stats.configuration_seconds},
                       {"n_b", greedy.stats.model.n_b}};
      crs["greedy"].push_back(row["greedy"]["CR"].get<double>());
    }

    const auto raw = workdir / (path.stem().string() + ".bin");
    write_binary(table, raw);
    for (const auto& tool : tools) {
      const auto size = run_external(tool, raw, workdir);
      if (size) {
        row[tool.name] = {{"CR", static_cast<double>(*size) / original}};
        crs[tool.name].push_back(static_cast<double>(*size) / original);
      } else {
        row[tool.name] = "unavailable";
      }
    }
    std::error_code ec;
    std::filesystem::remove(raw, ec);
    rows.push_back(std::move(row));
  }
  if (own_workdir) {
    std::error_code ec;
    std::filesystem::remove_all(workdir, ec);
  }

  Json box = Json::object();
  for (const auto& m : methods) box[m] = box_json(crs[m]);
  Json tool_json = Json::array();
  for (const auto& t : tools) {
    Json args = t.args;
    tool_json.push_back({{"name", t.name}, {"program", t.program}, {"args", args}, {"available", tool_available(t)}});
  }
  return Json{{"command", "bench"}, {"config", config_echo(config.run)}, {"tools", tool_json},
              {"datasets", rows}, {"cr_boxplot", box}};
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("slope needs at least two paired points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

ScalingResult run_scaling(const ScalingConfig& config) {
  ScalingResult result;
  std::vector<Table> tables;
  for (std::size_t d : config.dims) {
    tables.push_back(latent_cluster_table(config.rows, d, config.seed + d));
    ScalingPoint pt;
    pt.d = d;
    pt.entropy_seconds = pt.greedy_seconds = INFINITY;
    result.points.push_back(pt);
  }
  CompressConfig cc;
  cc.tau = config.tau;
  // Repeats go round-robin over the dimensions so a slow spell on the machine
  // does not land on a single d.
  for (unsigned rep = 0; rep < std::max(1u, config.repeats); ++rep) {
    for (std::size_t i = 0; i < tables.size(); ++i) {
      ScalingPoint& pt = result.points[i];
      cc.strategy = Strategy::Entropy;
      const Compressed e = compress(tables[i], cc);
      pt.entropy_seconds = std::min(pt.entropy_seconds, e.stats.configuration_seconds);
      pt.entropy_bases = e.stats.model.n_b;
      if (config.include_greedy) {
        cc.strategy = Strategy::Greedy;
        const Compressed g = compress(tables[i], cc);
        pt.greedy_seconds = std::min(pt.greedy_seconds, g.stats.configuration_seconds);
        pt.greedy_bases = g.stats.model.n_b;
      }
    }
  }
  std::vector<double> xs, ys_entropy, ys_greedy;
  for (const auto& pt : result.points) {
    xs.push_back(static_cast<double>(pt.d));
    ys_entropy.push_back(pt.entropy_seconds);
    ys_greedy.push_back(pt.greedy_seconds);
  }
  if (xs.size() >= 2) {
    result.entropy_slope = loglog_slope(xs, ys_entropy);
    if (config.include_greedy) result.greedy_slope = loglog_slope(xs, ys_greedy);
  }
  return result;
}

Json scaling_report(const ScalingConfig& config, const ScalingResult& result) {
  Json points = Json::array();
  for (const auto& p : result.points) {
    Json pt{{"d", p.d}, {"entropy_seconds", p.entropy_seconds}, {"entropy_bases", p.entropy_bases}};
    if (config.include_greedy) {
      pt["greedy_seconds"] = p.greedy_seconds;
      pt["greedy_bases"] = p.greedy_bases;
      pt["speedup"] = p.greedy_seconds / p.entropy_seconds;
    }
    points.push_back(pt);
  }
  Json j{{"command", "bench"},
         {"mode", "scaling"},
         {"config", {{"rows", config.rows}, {"dims", config.dims}, {"repeats", config.repeats},
                     {"tau", config.tau}, {"seed", config.seed}}},
         {"points", points},
         {"entropy_slope", result.entropy_slope}};
  if (config.include_greedy) j["greedy_slope"] = result.greedy_slope;
  return j;
}

}  // namespace entrogd::cli
