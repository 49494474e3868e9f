#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string_view>

#include "vprbench/cohog.hpp"
#include "vprbench/hog.hpp"
#include "vprbench/rmf.hpp"

namespace vpr {

enum class Technique { Hog, Cohog, External };

constexpr std::string_view to_string(Technique t) {
  switch (t) {
    case Technique::Hog: return "hog";
    case Technique::Cohog: return "cohog";
    case Technique::External: return "external";
  }
  return "unknown";
}

inline std::optional<Technique> parse_technique(std::string_view s) {
  if (s == "hog") return Technique::Hog;
  if (s == "cohog") return Technique::Cohog;
  if (s == "external") return Technique::External;
  return std::nullopt;
}

enum class ReportFormat { Json, Csv };

struct RunConfig {
  Technique technique = Technique::Hog;
  std::filesystem::path dataset_dir;
  std::filesystem::path ground_truth;
  // External technique only: one descriptor file per image set.
  std::optional<std::filesystem::path> query_descriptors;
  std::optional<std::filesystem::path> ref_descriptors;

  int width = 512;
  int height = 512;
  HogParams hog{};
  CohogParams cohog{};
  // retrieval_time is filled in by the run; D and V <= 0 mean "unset".
  RmfParams rmf{};
  std::size_t gt_tolerance = 0;

  std::size_t workers = 1;
  double telemetry_interval = 0.1;
  std::optional<std::filesystem::path> power_log;
  double power_clock_offset = 0.0;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

}  // namespace vpr
