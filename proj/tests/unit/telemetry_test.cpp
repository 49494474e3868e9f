#include <gtest/gtest.h>

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <random>
#include <thread>

#include "test_support.hpp"
#include "vprbench/telemetry.hpp"

using namespace vpr;
using namespace std::chrono_literals;

namespace {

/// Forks a child that sleeps until killed.
struct SleepingChild {
  pid_t pid = -1;
  SleepingChild() {
    pid = ::fork();
    if (pid == 0) {
      ::pause();
      ::_exit(0);
    }
  }
  ~SleepingChild() {
    if (pid > 0) {
      ::kill(pid, SIGKILL);
      ::waitpid(pid, nullptr, 0);
    }
  }
};

PowerTrace trace_of(std::vector<std::pair<double, double>> pts) {
  PowerTrace t;
  for (auto [s, mw] : pts) t.samples.push_back({s, mw});
  return t;
}

std::size_t parse_error_line(const test::TempDir& dir, const std::string& body) {
  test::write_text(dir / "p.csv", body);
  try {
    ingest_power_log(dir / "p.csv", 0.0);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST(CpuPercent, Definition) {
  EXPECT_DOUBLE_EQ(cpu_percent(2.0, 1.0, 4), 50.0);
  EXPECT_DOUBLE_EQ(cpu_percent(0.0, 1.0, 4), 0.0);
  EXPECT_DOUBLE_EQ(cpu_percent(9.0, 1.0, 4), 100.0);  // clamped
  EXPECT_DOUBLE_EQ(cpu_percent(1.0, 0.0, 4), 0.0);
}

TEST(MemPercent, Definition) {
  EXPECT_DOUBLE_EQ(mem_percent(1ull << 30, 4ull << 30), 25.0);
  EXPECT_DOUBLE_EQ(mem_percent(0, 4ull << 30), 0.0);
  EXPECT_DOUBLE_EQ(mem_percent(8ull << 30, 4ull << 30), 100.0);
}

TEST(ProcReaders, SelfIsVisible) {
  const auto self = read_process_usage(::getpid());
  ASSERT_TRUE(self.has_value());
  EXPECT_GT(self->resident_bytes, 0u);
  const SystemMemory mem = read_system_memory();
  EXPECT_GT(mem.total_bytes, 0u);
  EXPECT_LE(mem.available_bytes, mem.total_bytes);
  EXPECT_GE(logical_core_count(), 1u);
}

TEST(ResourceSampler, SleepingProcessIsNearIdle) {
  SleepingChild child;
  ASSERT_GT(child.pid, 0);
  ResourceSampler sampler(child.pid, 0.1);
  sampler.start();
  std::this_thread::sleep_for(1s);
  const ResourceTrace trace = sampler.stop();
  EXPECT_GE(trace.samples.size(), 8u);
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    const auto& s = trace.samples[i];
    EXPECT_GE(s.cpu_pct, 0.0);
    EXPECT_LE(s.cpu_pct, 5.0);
    EXPECT_GE(s.mem_pct, 0.0);
    EXPECT_LE(s.mem_pct, 100.0);
    EXPECT_GE(s.sys_mem_pct, 0.0);
    EXPECT_LE(s.sys_mem_pct, 100.0);
    if (i > 0) {
      EXPECT_GT(s.t, trace.samples[i - 1].t);
    }
  }
}

TEST(ResourceSampler, BusyThreadRegistersCpu) {
  ResourceSampler sampler(::getpid(), 0.05);
  sampler.start();
  const auto until = std::chrono::steady_clock::now() + 600ms;
  volatile double sink = 0.0;
  while (std::chrono::steady_clock::now() < until) sink = sink + 1.0;
  const ResourceTrace trace = sampler.stop();
  ASSERT_FALSE(trace.samples.empty());
  const ResourceSummary s = summarize(trace);
  EXPECT_GT(s.max_cpu_pct, 100.0 / (2.0 * trace.logical_cores));
  EXPECT_LE(s.max_cpu_pct, 100.0);
}

TEST(ResourceSampler, ShortRunStillGetsOneSample) {
  ResourceSampler sampler(::getpid(), 1.0);
  sampler.start();
  std::this_thread::sleep_for(50ms);
  EXPECT_EQ(sampler.stop().samples.size(), 1u);
}

TEST(ResourceSampler, Errors) {
  EXPECT_THROW(ResourceSampler(::getpid(), 0.001), Error);
  pid_t gone = ::fork();
  if (gone == 0) ::_exit(0);
  ::waitpid(gone, nullptr, 0);
  try {
    ResourceSampler s(gone, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotFound);
  }
}

TEST(PhaseLog, EmptyPhaseIsShort) {
  PhaseLog log;
  log.begin(Phase::Load, 0);
  const PhaseRecord r = log.end();
  EXPECT_GE(r.duration(), 0.0);
  EXPECT_LT(r.duration(), 0.001);
}

TEST(PhaseLog, SleepDuration) {
  PhaseLog log;
  log.measure(Phase::Encode, 3, [] { std::this_thread::sleep_for(100ms); });
  ASSERT_EQ(log.records().size(), 1u);
  const PhaseRecord& r = log.records()[0];
  EXPECT_EQ(r.label, Phase::Encode);
  EXPECT_EQ(r.query, 3u);
  EXPECT_GE(r.duration(), 0.100);
  EXPECT_LE(r.duration(), 0.150);
}

TEST(PhaseLog, ProtocolErrors) {
  PhaseLog log;
  try {
    log.end();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ProtocolError);
  }
  log.begin(Phase::Load, 0);
  EXPECT_THROW(log.begin(Phase::Match, 0), Error);
}

TEST(PhaseLog, MeasureClosesOnException) {
  PhaseLog log;
  EXPECT_THROW(log.measure(Phase::Load, 0, [] { throw std::runtime_error("x"); }), std::runtime_error);
  EXPECT_EQ(log.records().size(), 1u);
  log.begin(Phase::Load, 1);  // no phase left open
  log.end();
}

TEST(ProcessingTime, SumsPhasesPerQuery) {
  const std::vector<PhaseRecord> phases{{Phase::Load, 0, 0.0, 0.1},  {Phase::Encode, 0, 0.1, 0.3},
                                        {Phase::Match, 0, 0.3, 0.6}, {Phase::Load, 1, 0.6, 0.7},
                                        {Phase::Encode, 1, 0.7, 0.8}, {Phase::Match, 1, 0.8, 1.0}};
  const auto t = per_query_processing_time(phases, 2);
  EXPECT_NEAR(t[0], 0.6, 1e-12);
  EXPECT_NEAR(t[1], 0.4, 1e-12);
  EXPECT_NEAR(mean_of(t), 0.5, 1e-12);
  EXPECT_EQ(median_of({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median_of({4.0, 1.0, 2.0, 3.0}), 2.5);
}

TEST(PowerLog, TwoSamplesMeanIs2_5W) {
  test::TempDir dir;
  test::write_text(dir / "p.csv", "timestamp_ms,voltage_mV,current_mA,power_mW\n0,5000,480,2400\n1000,5000,520,2600\n");
  const PowerTrace t = ingest_power_log(dir / "p.csv", 0.0);
  ASSERT_EQ(t.samples.size(), 2u);
  EXPECT_DOUBLE_EQ(mean_power_watts(t), 2.5);
}

TEST(PowerLog, OffsetAndOptionalColumns) {
  test::TempDir dir;
  test::write_text(dir / "p.csv", "timestamp_ms,voltage_mV,current_mA,power_mW\n1500,,,1000\n2500,,,3000\n");
  const PowerTrace t = ingest_power_log(dir / "p.csv", -1.0);
  EXPECT_DOUBLE_EQ(t.samples[0].t, 0.5);
  EXPECT_DOUBLE_EQ(t.samples[1].t, 1.5);
}

TEST(PowerLog, SingleSampleWindowAverage) {
  test::TempDir dir;
  test::write_text(dir / "p.csv", "timestamp_ms,voltage_mV,current_mA,power_mW\n500,5000,300,1500\n");
  const PowerTrace t = ingest_power_log(dir / "p.csv", 0.0);
  EXPECT_DOUBLE_EQ(mean_power_watts(t), 1.5);
  EXPECT_DOUBLE_EQ(phase_power(t, 0.0, 3.0).avg_watts, 1.5);
  EXPECT_DOUBLE_EQ(phase_power(t, 0.5, 0.5).avg_watts, 1.5);
}

TEST(PowerLog, ParseErrorsCarryLineNumbers) {
  test::TempDir dir;
  const std::string h = "timestamp_ms,voltage_mV,current_mA,power_mW\n";
  EXPECT_EQ(parse_error_line(dir, h + "0,1,1,100\n10,1,1,abc\n"), 3u);
  EXPECT_EQ(parse_error_line(dir, h + "0,1,1\n"), 2u);
  EXPECT_EQ(parse_error_line(dir, h + "0,1,1,100\n20,1,1,100\n10,1,1,100\n"), 4u);  // time travel
  EXPECT_EQ(parse_error_line(dir, h + "0,1,1,-5\n"), 2u);
  EXPECT_EQ(parse_error_line(dir, "time,power\n0,1\n"), 1u);
}

TEST(PowerLog, EmptyLogs) {
  test::TempDir dir;
  for (const std::string& body : {std::string(), std::string("timestamp_ms,voltage_mV,current_mA,power_mW\n")}) {
    test::write_text(dir / "p.csv", body);
    try {
      ingest_power_log(dir / "p.csv", 0.0);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::EmptyLog);
    }
  }
}

TEST(PhasePower, ConstantTwoWatts) {
  const PowerTrace t = trace_of({{0.0, 2000}, {5.0, 2000}, {10.0, 2000}});
  const PhaseEnergy e = phase_power(t, 0.0, 10.0);
  EXPECT_EQ(e.energy_joules, 20.0);
  EXPECT_EQ(e.avg_watts, 2.0);
}

TEST(PhasePower, LinearRamp) {
  const PowerTrace t = trace_of({{0.0, 0}, {10.0, 2000}});
  const PhaseEnergy e = phase_power(t, PhaseRecord{Phase::Match, 0, 0.0, 10.0});
  EXPECT_DOUBLE_EQ(e.energy_joules, 10.0);
  EXPECT_DOUBLE_EQ(e.avg_watts, 1.0);
}

TEST(PhasePower, WindowOutsideTrace) {
  const PowerTrace t = trace_of({{5.0, 1000}, {6.0, 1000}});
  try {
    phase_power(t, 1.0, 4.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyWindow);
  }
  EXPECT_THROW(phase_power(t, 7.0, 8.0), Error);
  // partial overlap holds the edge value outside the trace
  EXPECT_DOUBLE_EQ(phase_power(t, 4.0, 5.5).energy_joules, 1.5);
}

TEST(PhasePower, NonNegativeAndAdditive) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> mw(0.0, 5000.0), dt(0.001, 0.5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::pair<double, double>> pts;
    double t = 0.0;
    for (int i = 0; i < 30; ++i) {
      pts.push_back({t, mw(rng)});
      t += dt(rng);
    }
    const PowerTrace trace = trace_of(pts);
    const double a = pts[2].first, b = pts[27].first;
    const double whole = phase_power(trace, a, b).energy_joules;
    EXPECT_GE(whole, 0.0);
    for (int k = 3; k < 27; ++k) {
      const double split = pts[static_cast<std::size_t>(k)].first;
      const double parts = phase_power(trace, a, split).energy_joules + phase_power(trace, split, b).energy_joules;
      EXPECT_NEAR(parts, whole, 1e-9 * whole);
    }
  }
}
