#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vprbench/error.hpp"
#include "vprbench/harness/config.hpp"
#include "vprbench/matching.hpp"
#include "vprbench/rmf.hpp"
#include "vprbench/telemetry.hpp"

namespace vpr {

inline constexpr std::string_view kToolName = "vpr-bench";
inline constexpr std::string_view kToolVersion = "0.1.0";

struct PowerReport {
  PhaseEnergy whole_run;
  double trace_mean_watts = 0.0;
  // Aligned with BenchmarkReport::phases; empty when the phase lies outside the log.
  std::vector<std::optional<PhaseEnergy>> phases;

  friend bool operator==(const PowerReport&, const PowerReport&) = default;
};

struct BenchmarkReport {
  std::string tool_version{kToolVersion};
  std::string started_at;
  std::string finished_at;
  RunConfig config;
  Metric metric = Metric::Cosine;

  std::string dataset_name;
  std::size_t n_queries = 0;
  std::size_t n_refs = 0;

  double map_build_seconds = 0.0;
  std::size_t reference_encodings = 0;  // images encoded while building the map
  std::vector<PhaseRecord> phases;
  double mean_processing_time = 0.0;    // t_R
  double median_processing_time = 0.0;

  std::vector<std::size_t> best_indices;
  std::vector<std::size_t> gt_indices;
  std::vector<std::uint8_t> matches_list;
  double accuracy = 0.0;
  RmfResult rmf;

  ResourceSummary resources;
  std::vector<ResourceSample> resource_trace;
  std::optional<PowerReport> power;

  friend bool operator==(const BenchmarkReport&, const BenchmarkReport&) = default;
};

inline std::string utc_timestamp(std::chrono::system_clock::time_point tp = std::chrono::system_clock::now()) {
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// ---------------------------------------------------------------------------
// Recomputation

struct ReportCheck {
  bool ok = true;
  std::vector<std::string> mismatches;
};

/// Recomputes accuracy, t_R, and the RMF chain from the report's own matches
/// list and phase timings and compares them with the stored values exactly.
inline ReportCheck verify_report(const BenchmarkReport& r) {
  ReportCheck check;
  auto fail = [&](std::string what) {
    check.ok = false;
    check.mismatches.push_back(std::move(what));
  };
  if (r.matches_list.size() != r.n_queries) fail("matches_list length differs from n_queries");

  std::size_t correct = 0;
  for (std::uint8_t m : r.matches_list) correct += m;
  const double accuracy =
      r.matches_list.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(r.matches_list.size());
  if (accuracy != r.accuracy) fail("accuracy");

  const std::vector<double> per_query = per_query_processing_time(r.phases, r.n_queries);
  const double t_r = mean_of(per_query);
  if (t_r != r.mean_processing_time) fail("mean processing time");
  if (median_of(per_query) != r.median_processing_time) fail("median processing time");

  RmfParams params = r.config.rmf;
  params.retrieval_time = t_r;
  try {
    const RmfResult rmf = evaluate_rmf(params, r.matches_list);
    if (rmf.incoming_rate != r.rmf.incoming_rate) fail("incoming frame rate");
    if (rmf.vpr_rate != r.rmf.vpr_rate) fail("VPR frame rate");
    if (rmf.frame_interval != r.rmf.frame_interval) fail("G");
    if (rmf.matched != r.rmf.matched) fail("M_q");
    if (rmf.rmf != r.rmf.rmf) fail("RMF");
    if (rmf.n_queries != r.rmf.n_queries) fail("N_q");
    if (rmf.used_unfloored_rate != r.rmf.used_unfloored_rate) fail("unfloored-rate flag");
  } catch (const Error& e) {
    fail(std::string("RMF recomputation failed: ") + e.what());
  }
  return check;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

using nlohmann::json;

inline json optional_path(const std::optional<std::filesystem::path>& p) {
  return p ? json(p->string()) : json(nullptr);
}

inline std::optional<std::filesystem::path> read_optional_path(const json& j) {
  if (j.is_null()) return std::nullopt;
  return std::filesystem::path(j.get<std::string>());
}

inline json positive_or_null(double v) { return v > 0.0 ? json(v) : json(nullptr); }
inline double read_positive_or_null(const json& j) { return j.is_null() ? 0.0 : j.get<double>(); }

inline json to_json(const PhaseEnergy& e) {
  return {{"avg_watts", e.avg_watts}, {"energy_joules", e.energy_joules}};
}
inline PhaseEnergy phase_energy_from_json(const json& j) {
  return {j.at("avg_watts").get<double>(), j.at("energy_joules").get<double>()};
}

inline json config_to_json(const RunConfig& c) {
  return {
      {"technique", to_string(c.technique)},
      {"dataset", c.dataset_dir.string()},
      {"ground_truth", c.ground_truth.string()},
      {"query_descriptors", optional_path(c.query_descriptors)},
      {"ref_descriptors", optional_path(c.ref_descriptors)},
      {"resolution", {{"width", c.width}, {"height", c.height}}},
      {"hog",
       {{"cell_size", c.hog.cell_size},
        {"block_size", c.hog.block_size},
        {"block_stride", c.hog.block_stride},
        {"bins", c.hog.bins}}},
      {"cohog",
       {{"region_size", c.cohog.region_size},
        {"entropy_threshold", c.cohog.entropy_threshold},
        {"aggregation", "mean_of_region_maxima"},
        {"hog",
         {{"cell_size", c.cohog.hog.cell_size},
          {"block_size", c.cohog.hog.block_size},
          {"block_stride", c.cohog.hog.block_stride},
          {"bins", c.cohog.hog.bins}}}}},
      {"rmf",
       {{"fps", c.rmf.fps},
        {"k", c.rmf.k},
        {"frames_per_meter", positive_or_null(c.rmf.frames_per_meter)},
        {"velocity", positive_or_null(c.rmf.velocity)}}},
      {"gt_tolerance", c.gt_tolerance},
      {"workers", c.workers},
      {"telemetry_interval_s", c.telemetry_interval},
      {"power_log", optional_path(c.power_log)},
      {"power_clock_offset_s", c.power_clock_offset},
  };
}

inline HogParams hog_from_json(const json& j) {
  HogParams h;
  h.cell_size = j.at("cell_size").get<int>();
  h.block_size = j.at("block_size").get<int>();
  h.block_stride = j.at("block_stride").get<int>();
  h.bins = j.at("bins").get<int>();
  return h;
}

inline RunConfig config_from_json(const json& j) {
  RunConfig c;
  const auto technique = parse_technique(j.at("technique").get<std::string>());
  if (!technique) throw Error(ErrorCode::FormatError, "unknown technique in report");
  c.technique = *technique;
  c.dataset_dir = j.at("dataset").get<std::string>();
  c.ground_truth = j.at("ground_truth").get<std::string>();
  c.query_descriptors = read_optional_path(j.at("query_descriptors"));
  c.ref_descriptors = read_optional_path(j.at("ref_descriptors"));
  c.width = j.at("resolution").at("width").get<int>();
  c.height = j.at("resolution").at("height").get<int>();
  c.hog = hog_from_json(j.at("hog"));
  const json& ch = j.at("cohog");
  c.cohog.region_size = ch.at("region_size").get<int>();
  c.cohog.entropy_threshold = ch.at("entropy_threshold").get<double>();
  c.cohog.hog = hog_from_json(ch.at("hog"));
  const json& rm = j.at("rmf");
  c.rmf.fps = rm.at("fps").get<double>();
  c.rmf.k = rm.at("k").get<double>();
  c.rmf.frames_per_meter = read_positive_or_null(rm.at("frames_per_meter"));
  c.rmf.velocity = read_positive_or_null(rm.at("velocity"));
  c.gt_tolerance = j.at("gt_tolerance").get<std::size_t>();
  c.workers = j.at("workers").get<std::size_t>();
  c.telemetry_interval = j.at("telemetry_interval_s").get<double>();
  c.power_log = read_optional_path(j.at("power_log"));
  c.power_clock_offset = j.at("power_clock_offset_s").get<double>();
  return c;
}

}  // namespace detail

inline nlohmann::json report_to_json(const BenchmarkReport& r) {
  using nlohmann::json;
  json phases = json::array();
  for (const PhaseRecord& p : r.phases) {
    phases.push_back({{"query", p.query}, {"label", to_string(p.label)}, {"t_start", p.t_start}, {"t_end", p.t_end}});
  }
  json trace = json::array();
  for (const ResourceSample& s : r.resource_trace) {
    trace.push_back({{"t", s.t}, {"cpu_pct", s.cpu_pct}, {"mem_pct", s.mem_pct}, {"sys_mem_pct", s.sys_mem_pct}});
  }
  json power = nullptr;
  if (r.power) {
    json per_phase = json::array();
    for (const auto& e : r.power->phases) per_phase.push_back(e ? detail::to_json(*e) : json(nullptr));
    power = {{"whole_run", detail::to_json(r.power->whole_run)},
             {"trace_mean_watts", r.power->trace_mean_watts},
             {"phases", per_phase}};
  }
  return {
      {"tool", {{"name", kToolName}, {"version", r.tool_version}}},
      {"started_at", r.started_at},
      {"finished_at", r.finished_at},
      {"config", detail::config_to_json(r.config)},
      {"metric", to_string(r.metric)},
      {"dataset_name", r.dataset_name},
      {"n_queries", r.n_queries},
      {"n_refs", r.n_refs},
      {"map_build_s", r.map_build_seconds},
      {"reference_encodings", r.reference_encodings},
      {"phases", phases},
      {"processing_time", {{"mean_s", r.mean_processing_time}, {"median_s", r.median_processing_time}}},
      {"best_indices", r.best_indices},
      {"gt_indices", r.gt_indices},
      {"matches_list", r.matches_list},
      {"accuracy", r.accuracy},
      {"rmf",
       {{"t_r_s", r.mean_processing_time},
        {"incoming_rate", r.rmf.incoming_rate},
        {"vpr_rate", r.rmf.vpr_rate},
        {"used_unfloored_rate", r.rmf.used_unfloored_rate},
        {"G", r.rmf.frame_interval},
        {"N_q", r.rmf.n_queries},
        {"M_q", r.rmf.matched},
        {"RMF", r.rmf.rmf}}},
      {"resources",
       {{"samples", r.resources.samples},
        {"logical_cores", r.resources.logical_cores},
        {"mean_cpu_pct", r.resources.mean_cpu_pct},
        {"max_cpu_pct", r.resources.max_cpu_pct},
        {"mean_mem_pct", r.resources.mean_mem_pct},
        {"max_mem_pct", r.resources.max_mem_pct},
        {"mean_sys_mem_pct", r.resources.mean_sys_mem_pct},
        {"max_sys_mem_pct", r.resources.max_sys_mem_pct}}},
      {"resource_trace", trace},
      {"power", power},
  };
}

inline BenchmarkReport report_from_json(const nlohmann::json& j) {
  BenchmarkReport r;
  try {
    r.tool_version = j.at("tool").at("version").get<std::string>();
    r.started_at = j.at("started_at").get<std::string>();
    r.finished_at = j.at("finished_at").get<std::string>();
    r.config = detail::config_from_json(j.at("config"));
    const auto metric = parse_metric(j.at("metric").get<std::string>());
    if (!metric) throw Error(ErrorCode::FormatError, "unknown metric in report");
    r.metric = *metric;
    r.dataset_name = j.at("dataset_name").get<std::string>();
    r.n_queries = j.at("n_queries").get<std::size_t>();
    r.n_refs = j.at("n_refs").get<std::size_t>();
    r.map_build_seconds = j.at("map_build_s").get<double>();
    r.reference_encodings = j.at("reference_encodings").get<std::size_t>();
    for (const auto& p : j.at("phases")) {
      const auto label = parse_phase(p.at("label").get<std::string>());
      if (!label) throw Error(ErrorCode::FormatError, "unknown phase label in report");
      r.phases.push_back({*label, p.at("query").get<std::size_t>(), p.at("t_start").get<double>(),
                          p.at("t_end").get<double>()});
    }
    r.mean_processing_time = j.at("processing_time").at("mean_s").get<double>();
    r.median_processing_time = j.at("processing_time").at("median_s").get<double>();
    r.best_indices = j.at("best_indices").get<std::vector<std::size_t>>();
    r.gt_indices = j.at("gt_indices").get<std::vector<std::size_t>>();
    r.matches_list = j.at("matches_list").get<std::vector<std::uint8_t>>();
    r.accuracy = j.at("accuracy").get<double>();
    const auto& rm = j.at("rmf");
    r.rmf.incoming_rate = rm.at("incoming_rate").get<double>();
    r.rmf.vpr_rate = rm.at("vpr_rate").get<std::int64_t>();
    r.rmf.used_unfloored_rate = rm.at("used_unfloored_rate").get<bool>();
    r.rmf.frame_interval = rm.at("G").get<std::int64_t>();
    r.rmf.n_queries = rm.at("N_q").get<std::size_t>();
    r.rmf.matched = rm.at("M_q").get<std::size_t>();
    r.rmf.rmf = rm.at("RMF").get<std::size_t>();
    const auto& res = j.at("resources");
    r.resources.samples = res.at("samples").get<std::size_t>();
    r.resources.logical_cores = res.at("logical_cores").get<unsigned>();
    r.resources.mean_cpu_pct = res.at("mean_cpu_pct").get<double>();
    r.resources.max_cpu_pct = res.at("max_cpu_pct").get<double>();
    r.resources.mean_mem_pct = res.at("mean_mem_pct").get<double>();
    r.resources.max_mem_pct = res.at("max_mem_pct").get<double>();
    r.resources.mean_sys_mem_pct = res.at("mean_sys_mem_pct").get<double>();
    r.resources.max_sys_mem_pct = res.at("max_sys_mem_pct").get<double>();
    for (const auto& s : j.at("resource_trace")) {
      r.resource_trace.push_back({s.at("t").get<double>(), s.at("cpu_pct").get<double>(),
                                  s.at("mem_pct").get<double>(), s.at("sys_mem_pct").get<double>()});
    }
    const auto& pw = j.at("power");
    if (!pw.is_null()) {
      PowerReport p;
      p.whole_run = detail::phase_energy_from_json(pw.at("whole_run"));
      p.trace_mean_watts = pw.at("trace_mean_watts").get<double>();
      for (const auto& e : pw.at("phases")) {
        p.phases.push_back(e.is_null() ? std::nullopt : std::optional(detail::phase_energy_from_json(e)));
      }
      r.power = std::move(p);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("malformed report: ") + e.what());
  }
  return r;
}

inline BenchmarkReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::NotFound, "report " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, path.string() + ": " + e.what());
  }
  return report_from_json(j);
}

// ---------------------------------------------------------------------------
// CSV

/// One row per query: timings per phase, the chosen and expected reference,
/// and whether the match counted.
inline void write_report_csv(const BenchmarkReport& r, std::ostream& out) {
  std::vector<double> load(r.n_queries, 0.0), encode(r.n_queries, 0.0), match(r.n_queries, 0.0);
  for (const PhaseRecord& p : r.phases) {
    if (p.query >= r.n_queries) continue;
    auto& dst = p.label == Phase::Load ? load : (p.label == Phase::Encode ? encode : match);
    dst[p.query] += p.duration();
  }
  const std::vector<double> total = per_query_processing_time(r.phases, r.n_queries);
  out << "query_index,best_ref_index,gt_ref_index,match,load_s,encode_s,match_s,processing_s";
  if (r.power) out << ",energy_j";
  out << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);

  std::vector<std::optional<double>> energy(r.n_queries);
  if (r.power) {
    for (std::size_t i = 0; i < r.phases.size() && i < r.power->phases.size(); ++i) {
      const auto& e = r.power->phases[i];
      const std::size_t q = r.phases[i].query;
      if (q >= r.n_queries) continue;
      if (e) energy[q] = energy[q].value_or(0.0) + e->energy_joules;
    }
  }
  for (std::size_t q = 0; q < r.n_queries; ++q) {
    out << q << ',' << (q < r.best_indices.size() ? std::to_string(r.best_indices[q]) : "") << ','
        << (q < r.gt_indices.size() ? std::to_string(r.gt_indices[q]) : "") << ','
        << (q < r.matches_list.size() ? static_cast<int>(r.matches_list[q]) : 0) << ',' << load[q] << ','
        << encode[q] << ',' << match[q] << ',' << total[q];
    if (r.power) {
      out << ',';
      if (energy[q]) out << *energy[q];
    }
    out << '\n';
  }
}

inline void emit_report(const BenchmarkReport& r, const std::filesystem::path& path, ReportFormat format) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  if (format == ReportFormat::Json) {
    out << report_to_json(r).dump(2) << '\n';
  } else {
    write_report_csv(r, out);
  }
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

/// Table-style summary mirroring the columns of a CPU / memory / time table.
inline void print_summary(const BenchmarkReport& r, std::ostream& out) {
  auto row = [&](std::string_view key, const std::string& value) {
    out << std::left << std::setw(30) << key << value << '\n';
  };
  auto fixed = [](double v, int digits) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
  };
  row("technique", std::string(to_string(r.config.technique)));
  row("dataset", r.dataset_name);
  row("metric", std::string(to_string(r.metric)));
  row("resolution", std::to_string(r.config.width) + "x" + std::to_string(r.config.height));
  row("queries / references", std::to_string(r.n_queries) + " / " + std::to_string(r.n_refs));
  row("CPU mean / max (%)", fixed(r.resources.mean_cpu_pct, 2) + " / " + fixed(r.resources.max_cpu_pct, 2));
  row("memory mean / max (%)", fixed(r.resources.mean_mem_pct, 2) + " / " + fixed(r.resources.max_mem_pct, 2));
  row("system memory mean (%)", fixed(r.resources.mean_sys_mem_pct, 2));
  row("processing time mean (s)", fixed(r.mean_processing_time, 4));
  row("processing time median (s)", fixed(r.median_processing_time, 4));
  row("map build (s)", fixed(r.map_build_seconds, 4));
  row("accuracy", fixed(r.accuracy, 4));
  row("incoming frame rate", fixed(r.rmf.incoming_rate, 3));
  row("VPR frame rate",
      std::to_string(r.rmf.vpr_rate) + (r.rmf.used_unfloored_rate ? " (unfloored 1/t_R used for G)" : ""));
  row("G", std::to_string(r.rmf.frame_interval));
  row("M_q / N_q", std::to_string(r.rmf.matched) + " / " + std::to_string(r.rmf.n_queries));
  row("RMF", std::to_string(r.rmf.rmf));
  if (r.power) {
    row("power avg (W)", fixed(r.power->whole_run.avg_watts, 3));
    row("energy (J)", fixed(r.power->whole_run.energy_joules, 3));
  } else {
    row("power", "n/a (no power log)");
  }
}

}  // namespace vpr
