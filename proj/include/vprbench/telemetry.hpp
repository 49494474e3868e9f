#pragma once

// Process CPU/memory sampling, phase timing on a shared monotonic clock, and
// power-meter log ingestion with trapezoidal energy integration.

#include <sys/types.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <stop_token>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "vprbench/error.hpp"

namespace vpr {

/// Seconds on the steady clock, measured from a fixed epoch (typically the
/// start of a benchmark run). Phases, resource samples, and aligned power
/// samples all share this time base.
class RunClock {
 public:
  using clock = std::chrono::steady_clock;

  RunClock() : epoch_(clock::now()) {}
  explicit RunClock(clock::time_point epoch) : epoch_(epoch) {}

  double now() const { return std::chrono::duration<double>(clock::now() - epoch_).count(); }
  clock::time_point epoch() const noexcept { return epoch_; }

 private:
  clock::time_point epoch_;
};

// ---------------------------------------------------------------------------
// Resource sampling

/// CPU time consumed over a wall interval, normalized so that 100 means every
/// logical core was busy for the whole interval.
inline double cpu_percent(double cpu_seconds, double wall_seconds, unsigned logical_cores) {
  if (!(wall_seconds > 0.0) || logical_cores == 0) return 0.0;
  return std::clamp(cpu_seconds / (wall_seconds * logical_cores) * 100.0, 0.0, 100.0);
}

inline double mem_percent(std::uint64_t resident_bytes, std::uint64_t total_bytes) {
  if (total_bytes == 0) return 0.0;
  return std::clamp(static_cast<double>(resident_bytes) / static_cast<double>(total_bytes) * 100.0, 0.0, 100.0);
}

struct ProcessUsage {
  double cpu_seconds = 0.0;  // user + system
  std::uint64_t resident_bytes = 0;
};

struct SystemMemory {
  std::uint64_t total_bytes = 0;
  std::uint64_t available_bytes = 0;
};

inline unsigned logical_core_count() {
  const long n = ::sysconf(_SC_NPROCESSORS_ONLN);
  return n > 0 ? static_cast<unsigned>(n) : 1U;
}

/// Reads /proc/<pid>/stat and /proc/<pid>/statm. Empty optional when the
/// process does not exist.
inline std::optional<ProcessUsage> read_process_usage(pid_t pid) {
  const std::filesystem::path proc = "/proc/" + std::to_string(pid);
  std::ifstream stat(proc / "stat");
  std::string content;
  if (!stat || !std::getline(stat, content)) return std::nullopt;

  // The command name is parenthesized and may contain spaces; fields after
  // the closing paren start with the state (field 3).
  const auto close = content.rfind(')');
  if (close == std::string::npos) return std::nullopt;
  std::istringstream fields(content.substr(close + 2));
  std::string tok;
  unsigned long long utime = 0, stime = 0;
  for (int field = 3; field <= 15 && fields >> tok; ++field) {
    if (field == 14) utime = std::stoull(tok);
    if (field == 15) stime = std::stoull(tok);
  }
  const double ticks = static_cast<double>(::sysconf(_SC_CLK_TCK));

  std::ifstream statm(proc / "statm");
  unsigned long long size_pages = 0, resident_pages = 0;
  if (!statm || !(statm >> size_pages >> resident_pages)) return std::nullopt;

  ProcessUsage usage;
  usage.cpu_seconds = static_cast<double>(utime + stime) / ticks;
  usage.resident_bytes = resident_pages * static_cast<std::uint64_t>(::sysconf(_SC_PAGESIZE));
  return usage;
}

inline SystemMemory read_system_memory() {
  std::ifstream meminfo("/proc/meminfo");
  SystemMemory mem;
  std::string key;
  std::uint64_t value = 0;
  std::string unit;
  while (meminfo >> key >> value) {
    std::getline(meminfo, unit);
    if (key == "MemTotal:") mem.total_bytes = value * 1024;
    if (key == "MemAvailable:") mem.available_bytes = value * 1024;
  }
  return mem;
}

struct ResourceSample {
  double t = 0.0;
  double cpu_pct = 0.0;
  double mem_pct = 0.0;       // process resident set / physical memory
  double sys_mem_pct = 0.0;   // system-wide used memory / physical memory

  friend bool operator==(const ResourceSample&, const ResourceSample&) = default;
};

struct ResourceTrace {
  std::vector<ResourceSample> samples;
  unsigned logical_cores = 1;
  double interval = 0.1;
};

/// Background sampler of one process. Samples are taken every `interval`
/// seconds from start() until stop(); the baseline reading at start() only
/// seeds the CPU delta and is not emitted.
class ResourceSampler {
 public:
  ResourceSampler(pid_t target, double interval, RunClock clock = RunClock())
      : target_(target), interval_(interval), clock_(clock), cores_(logical_core_count()) {
    if (!(interval >= 0.01)) {
      throw Error(ErrorCode::InvalidParam, "sampling interval must be at least 0.01 s");
    }
    if (!read_process_usage(target)) {
      throw Error(ErrorCode::NotFound, "process " + std::to_string(target));
    }
  }

  ResourceSampler(const ResourceSampler&) = delete;
  ResourceSampler& operator=(const ResourceSampler&) = delete;
  ~ResourceSampler() { stop(); }

  void start() {
    if (thread_.joinable()) throw Error(ErrorCode::ProtocolError, "sampler already running");
    samples_.clear();
    thread_ = std::jthread([this](std::stop_token token) { run(token); });
  }

  /// Stops sampling and returns the trace; only valid once stopped.
  ResourceTrace stop() {
    if (thread_.joinable()) {
      thread_.request_stop();
      thread_.join();
    }
    ResourceTrace trace;
    trace.samples = samples_;
    trace.logical_cores = cores_;
    trace.interval = interval_;
    return trace;
  }

 private:
  void run(std::stop_token token) {
    auto prev = read_process_usage(target_);
    double prev_t = clock_.now();
    const SystemMemory mem0 = read_system_memory();
    const auto period = std::chrono::duration<double>(interval_);
    auto next = RunClock::clock::now() + std::chrono::duration_cast<RunClock::clock::duration>(period);

    auto take_sample = [&]() -> bool {
      const auto usage = read_process_usage(target_);
      const double t = clock_.now();
      if (!usage || !prev) return false;  // target exited
      SystemMemory mem = read_system_memory();
      if (mem.total_bytes == 0) mem = mem0;

      ResourceSample s;
      s.t = t;
      s.cpu_pct = cpu_percent(usage->cpu_seconds - prev->cpu_seconds, t - prev_t, cores_);
      s.mem_pct = mem_percent(usage->resident_bytes, mem.total_bytes);
      s.sys_mem_pct = mem_percent(mem.total_bytes - std::min(mem.available_bytes, mem.total_bytes), mem.total_bytes);
      if (samples_.empty() || t > samples_.back().t) samples_.push_back(s);
      prev = usage;
      prev_t = t;
      return true;
    };

    std::mutex m;
    std::condition_variable_any cv;
    while (!token.stop_requested()) {
      {
        std::unique_lock lock(m);
        cv.wait_until(lock, token, next, [] { return false; });
      }
      if (token.stop_requested()) break;
      next += std::chrono::duration_cast<RunClock::clock::duration>(period);
      if (!take_sample()) return;
    }
    // Closing sample so runs shorter than one interval still get a reading;
    // skipped when the last sample is too recent for a meaningful CPU delta.
    if (clock_.now() - prev_t >= kMinFinalSampleWall) take_sample();
  }

  static constexpr double kMinFinalSampleWall = 0.005;

  pid_t target_;
  double interval_;
  RunClock clock_;
  unsigned cores_;
  std::vector<ResourceSample> samples_;
  std::jthread thread_;
};

struct ResourceSummary {
  std::size_t samples = 0;
  double mean_cpu_pct = 0.0;
  double max_cpu_pct = 0.0;
  double mean_mem_pct = 0.0;
  double max_mem_pct = 0.0;
  double mean_sys_mem_pct = 0.0;
  double max_sys_mem_pct = 0.0;
  unsigned logical_cores = 1;

  friend bool operator==(const ResourceSummary&, const ResourceSummary&) = default;
};

inline ResourceSummary summarize(const ResourceTrace& trace) {
  ResourceSummary s;
  s.samples = trace.samples.size();
  s.logical_cores = trace.logical_cores;
  if (trace.samples.empty()) return s;
  for (const ResourceSample& r : trace.samples) {
    s.mean_cpu_pct += r.cpu_pct;
    s.mean_mem_pct += r.mem_pct;
    s.mean_sys_mem_pct += r.sys_mem_pct;
    s.max_cpu_pct = std::max(s.max_cpu_pct, r.cpu_pct);
    s.max_mem_pct = std::max(s.max_mem_pct, r.mem_pct);
    s.max_sys_mem_pct = std::max(s.max_sys_mem_pct, r.sys_mem_pct);
  }
  const double n = static_cast<double>(trace.samples.size());
  s.mean_cpu_pct /= n;
  s.mean_mem_pct /= n;
  s.mean_sys_mem_pct /= n;
  return s;
}

// ---------------------------------------------------------------------------
// Phase timing

enum class Phase { Load, Encode, Match };

constexpr std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Load: return "load";
    case Phase::Encode: return "encode";
    case Phase::Match: return "match";
  }
  return "unknown";
}

inline std::optional<Phase> parse_phase(std::string_view s) {
  if (s == "load") return Phase::Load;
  if (s == "encode") return Phase::Encode;
  if (s == "match") return Phase::Match;
  return std::nullopt;
}

struct PhaseRecord {
  Phase label = Phase::Load;
  std::size_t query = 0;
  double t_start = 0.0;
  double t_end = 0.0;

  double duration() const noexcept { return t_end - t_start; }
  friend bool operator==(const PhaseRecord&, const PhaseRecord&) = default;
};

/// Ordered list of timed phases. One phase may be open at a time.
class PhaseLog {
 public:
  explicit PhaseLog(RunClock clock = RunClock()) : clock_(clock) {}

  void begin(Phase label, std::size_t query) {
    if (open_) throw Error(ErrorCode::ProtocolError, "phase begun while another is open");
    open_ = PhaseRecord{label, query, clock_.now(), 0.0};
  }

  const PhaseRecord& end() {
    const double t = clock_.now();
    if (!open_) throw Error(ErrorCode::ProtocolError, "phase ended without begin");
    open_->t_end = std::max(t, open_->t_start);
    records_.push_back(*open_);
    open_.reset();
    return records_.back();
  }

  template <typename Fn>
  decltype(auto) measure(Phase label, std::size_t query, Fn&& fn) {
    begin(label, query);
    struct Closer {
      PhaseLog* log;
      ~Closer() {
        if (log->open_) log->end();
      }
    } closer{this};
    return fn();
  }

  const std::vector<PhaseRecord>& records() const noexcept { return records_; }
  const RunClock& clock() const noexcept { return clock_; }

 private:
  RunClock clock_;
  std::optional<PhaseRecord> open_;
  std::vector<PhaseRecord> records_;
};

/// Sum of phase durations per query index (load + encode + match).
inline std::vector<double> per_query_processing_time(const std::vector<PhaseRecord>& phases,
                                                     std::size_t n_queries) {
  std::vector<double> totals(n_queries, 0.0);
  for (const PhaseRecord& p : phases) {
    if (p.query < n_queries) totals[p.query] += p.duration();
  }
  return totals;
}

inline double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------------------
// Power logs

struct PowerSample {
  double t = 0.0;         // seconds on the benchmark clock (offset applied)
  double power_mw = 0.0;

  friend bool operator==(const PowerSample&, const PowerSample&) = default;
};

struct PowerTrace {
  std::vector<PowerSample> samples;
  double clock_offset = 0.0;
};

inline constexpr std::string_view kPowerLogHeader = "timestamp_ms,voltage_mV,current_mA,power_mW";

/// Parses a power-meter CSV. Each timestamp (ms since the logger's epoch) is
/// mapped onto the benchmark clock as t = timestamp_ms / 1000 + clock_offset.
inline PowerTrace ingest_power_log(const std::filesystem::path& path, double clock_offset) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::NotFound, "power log " + path.string());

  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  auto parse_real = [](std::string_view s, std::size_t line, const char* what) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
      throw ParseError(line, std::string(what) + " '" + std::string(s) + "' is not a number");
    }
    return v;
  };

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw Error(ErrorCode::EmptyLog, path.string() + " is empty");
  ++line_no;
  if (trim(line) != kPowerLogHeader) {
    throw ParseError(line_no, "expected header '" + std::string(kPowerLogHeader) + "'");
  }

  PowerTrace trace;
  trace.clock_offset = clock_offset;
  double last_ms = -INFINITY;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
      const auto comma = row.find(',', pos);
      fields.push_back(trim(row.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (fields.size() != 4) throw ParseError(line_no, "expected 4 fields, got " + std::to_string(fields.size()));
    const double ms = parse_real(fields[0], line_no, "timestamp_ms");
    const double mw = parse_real(fields[3], line_no, "power_mW");
    if (!fields[1].empty()) parse_real(fields[1], line_no, "voltage_mV");
    if (!fields[2].empty()) parse_real(fields[2], line_no, "current_mA");
    if (mw < 0.0) throw ParseError(line_no, "negative power");
    if (ms < last_ms) throw ParseError(line_no, "timestamp decreases");
    last_ms = ms;
    trace.samples.push_back({ms / 1000.0 + clock_offset, mw});
  }
  if (trace.samples.empty()) throw Error(ErrorCode::EmptyLog, path.string() + " has no samples");
  return trace;
}

struct PhaseEnergy {
  double avg_watts = 0.0;
  double energy_joules = 0.0;

  friend bool operator==(const PhaseEnergy&, const PhaseEnergy&) = default;
};

/// Integrates power over [t_start, t_end] with the trapezoid rule. Power is
/// linear between samples and held at the end values outside the trace, but
/// the window must intersect the trace's [first, last] span.
inline PhaseEnergy phase_power(const PowerTrace& trace, double t_start, double t_end) {
  if (t_end < t_start) throw Error(ErrorCode::InvalidParam, "phase ends before it starts");
  const auto& s = trace.samples;
  if (s.empty() || t_end < s.front().t || t_start > s.back().t) {
    throw Error(ErrorCode::EmptyWindow, "no power samples overlap the phase window");
  }
  auto watts = [](const PowerSample& p) { return p.power_mw / 1000.0; };

  if (t_end == t_start) {
    // Instantaneous power at t_start.
    const auto it = std::upper_bound(s.begin(), s.end(), t_start,
                                     [](double t, const PowerSample& p) { return t < p.t; });
    double w;
    if (it == s.begin()) w = watts(s.front());
    else if (it == s.end()) w = watts(s.back());
    else {
      const auto& a = *(it - 1);
      const auto& b = *it;
      w = watts(a) + (watts(b) - watts(a)) * (t_start - a.t) / (b.t - a.t);
    }
    return {w, 0.0};
  }

  double energy = 0.0;
  if (t_start < s.front().t) energy += (std::min(t_end, s.front().t) - t_start) * watts(s.front());
  if (t_end > s.back().t) energy += (t_end - std::max(t_start, s.back().t)) * watts(s.back());
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const PowerSample& a = s[i];
    const PowerSample& b = s[i + 1];
    if (b.t <= a.t) continue;
    const double lo = std::max(a.t, t_start);
    const double hi = std::min(b.t, t_end);
    if (hi <= lo) continue;
    const double slope = (watts(b) - watts(a)) / (b.t - a.t);
    const double p_lo = watts(a) + slope * (lo - a.t);
    const double p_hi = watts(a) + slope * (hi - a.t);
    energy += 0.5 * (p_lo + p_hi) * (hi - lo);
  }
  energy = std::max(energy, 0.0);
  return {energy / (t_end - t_start), energy};
}

inline PhaseEnergy phase_power(const PowerTrace& trace, const PhaseRecord& phase) {
  return phase_power(trace, phase.t_start, phase.t_end);
}

/// Average power over the trace's own span.
inline double mean_power_watts(const PowerTrace& trace) {
  if (trace.samples.empty()) throw Error(ErrorCode::EmptyLog, "power trace has no samples");
  if (trace.samples.size() == 1 || trace.samples.front().t == trace.samples.back().t) {
    return trace.samples.front().power_mw / 1000.0;
  }
  return phase_power(trace, trace.samples.front().t, trace.samples.back().t).avg_watts;
}

}  // namespace vpr
