#pragma once

#include <unistd.h>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vprbench/cohog.hpp"
#include "vprbench/error.hpp"
#include "vprbench/harness/config.hpp"
#include "vprbench/harness/dataset.hpp"
#include "vprbench/harness/descriptor_io.hpp"
#include "vprbench/harness/report.hpp"
#include "vprbench/hog.hpp"
#include "vprbench/image_io.hpp"
#include "vprbench/matching.hpp"
#include "vprbench/rmf.hpp"
#include "vprbench/telemetry.hpp"

namespace vpr {

inline void validate_config(const RunConfig& c) {
  if (c.width < 2 || c.height < 2) throw Error(ErrorCode::InvalidParam, "resolution must be at least 2x2");
  if (c.workers < 1) throw Error(ErrorCode::InvalidParam, "worker count must be >= 1");
  if (!(c.telemetry_interval >= 0.01)) throw Error(ErrorCode::InvalidParam, "telemetry interval must be >= 0.01 s");
  if (!(c.rmf.fps > 0.0) || !(c.rmf.k > 0.0)) throw Error(ErrorCode::InvalidParam, "F and K must be positive");
  if ((c.rmf.frames_per_meter > 0.0) != (c.rmf.velocity > 0.0)) {
    throw Error(ErrorCode::InvalidParam, "frames-per-meter and velocity must be given together");
  }
  if (c.technique == Technique::Hog) (void)hog_layout(c.width, c.height, c.hog);
  if (c.technique == Technique::Cohog) {
    c.cohog.validate();
    if (c.width % c.cohog.region_size != 0 || c.height % c.cohog.region_size != 0) {
      throw Error(ErrorCode::GridMismatch, "region size does not divide the working resolution");
    }
    (void)hog_layout(c.cohog.region_size, c.cohog.region_size, c.cohog.hog);
  }
  if (c.technique == Technique::External && (!c.query_descriptors || !c.ref_descriptors)) {
    throw Error(ErrorCode::InvalidParam, "external technique needs query and reference descriptor files");
  }
}

/// Load + preprocess: decode to luminance and resize to the working resolution.
inline GrayImage load_and_preprocess(const std::filesystem::path& path, const RunConfig& c) {
  return resize(load_image(path), c.width, c.height);
}

inline Descriptor encode_image(const GrayImage& img, const RunConfig& c) {
  switch (c.technique) {
    case Technique::Hog: return hog_describe(img, c.hog);
    case Technique::Cohog: return cohog_describe(img, c.cohog);
    case Technique::External: break;
  }
  throw Error(ErrorCode::InvalidParam, "external descriptors are not computed from images");
}

/// Runs one benchmark end to end. Reference descriptors are built once up
/// front (timed separately as map building); then each query goes through
/// load, encode, and match phases in order. Any error aborts the run.
inline BenchmarkReport run_benchmark(const RunConfig& cfg) {
  validate_config(cfg);
  const Dataset ds = load_dataset(cfg.dataset_dir, cfg.ground_truth, cfg.gt_tolerance);

  std::optional<PowerTrace> power_trace;
  if (cfg.power_log) power_trace = ingest_power_log(*cfg.power_log, cfg.power_clock_offset);

  Metric metric = cfg.technique == Technique::Cohog ? Metric::Regional : Metric::Cosine;
  std::vector<Descriptor> external_queries;
  std::vector<Descriptor> refs(ds.n_refs());
  if (cfg.technique == Technique::External) {
    ExternalDescriptors q = ingest_external_descriptors(*cfg.query_descriptors, ds.n_queries());
    ExternalDescriptors r = ingest_external_descriptors(*cfg.ref_descriptors, ds.n_refs());
    if (q.metric != r.metric) {
      throw Error(ErrorCode::FormatError, "query and reference descriptor files declare different metrics");
    }
    metric = q.metric;
    for (auto& d : q.descriptors) external_queries.emplace_back(std::move(d));
    for (std::size_t i = 0; i < r.descriptors.size(); ++i) refs[i] = std::move(r.descriptors[i]);
  }

  BenchmarkReport report;
  report.config = cfg;
  report.metric = metric;
  report.dataset_name = ds.name;
  report.n_queries = ds.n_queries();
  report.n_refs = ds.n_refs();
  report.gt_indices = ds.ground_truth.ref_for_query;
  report.started_at = utc_timestamp();

  const RunClock clock;
  PhaseLog log(clock);
  ResourceSampler sampler(::getpid(), cfg.telemetry_interval, clock);
  sampler.start();

  const double map_start = clock.now();
  if (cfg.technique != Technique::External) {
    parallel_for(ds.n_refs(), cfg.workers, [&](std::size_t i) {
      refs[i] = encode_image(load_and_preprocess(ds.ref_paths[i], cfg), cfg);
    });
    report.reference_encodings = ds.n_refs();
  }
  report.map_build_seconds = clock.now() - map_start;
  check_kind(refs, metric);

  SimilarityMatrix matrix;
  matrix.n_queries = ds.n_queries();
  matrix.n_refs = ds.n_refs();
  matrix.metric = metric;
  matrix.scores.resize(matrix.n_queries * matrix.n_refs);

  for (std::size_t q = 0; q < ds.n_queries(); ++q) {
    std::optional<GrayImage> image;
    std::optional<Descriptor> stored;
    log.measure(Phase::Load, q, [&] {
      if (cfg.technique == Technique::External) stored = external_queries[q];
      else image = load_and_preprocess(ds.query_paths[q], cfg);
    });
    const Descriptor query = log.measure(Phase::Encode, q, [&]() -> Descriptor {
      return cfg.technique == Technique::External ? std::move(*stored) : encode_image(*image, cfg);
    });
    log.measure(Phase::Match, q, [&] {
      parallel_for(ds.n_refs(), cfg.workers, [&](std::size_t r) {
        matrix.scores[q * matrix.n_refs + r] = score_pair(query, refs[r], metric);
      });
    });
  }
  const double run_end = clock.now();
  const ResourceTrace trace = sampler.stop();

  const MatchOutcome outcome = evaluate_matches(matrix, ds.ground_truth);
  report.best_indices = outcome.best_indices;
  report.matches_list = outcome.matches_list;
  report.accuracy = outcome.accuracy;
  report.phases = log.records();

  const std::vector<double> per_query = per_query_processing_time(report.phases, report.n_queries);
  report.mean_processing_time = mean_of(per_query);
  report.median_processing_time = median_of(per_query);

  RmfParams rmf = cfg.rmf;
  rmf.retrieval_time = report.mean_processing_time;
  if (!(rmf.retrieval_time > 0.0)) {
    throw Error(ErrorCode::InvalidParam, "measured retrieval time is zero; cannot evaluate the VPR frame rate");
  }
  report.rmf = evaluate_rmf(rmf, report.matches_list);

  report.resource_trace = trace.samples;
  report.resources = summarize(trace);

  if (power_trace) {
    PowerReport p;
    p.whole_run = phase_power(*power_trace, 0.0, run_end);
    p.trace_mean_watts = mean_power_watts(*power_trace);
    p.phases.reserve(report.phases.size());
    for (const PhaseRecord& ph : report.phases) {
      try {
        p.phases.push_back(phase_power(*power_trace, ph));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::EmptyWindow) throw;
        p.phases.push_back(std::nullopt);
      }
    }
    report.power = std::move(p);
  }
  report.finished_at = utc_timestamp();
  return report;
}

}  // namespace vpr
