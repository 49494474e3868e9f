#pragma once

// Text format for precomputed global descriptors:
//
//   vpr-desc v1 <count> <dim> <metric>
//   <dim whitespace-separated reals>      (count lines, in image order)
//
// <metric> is `cosine` or `l1`.
//
// Regional sets use a sibling format that keeps each region's rectangle:
//
//   vpr-rdesc v1 <images> <dim>
//   image <regions>
//   <x> <y> <w> <h> <dim reals>           (one line per region)

#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "vprbench/error.hpp"
#include "vprbench/cohog.hpp"
#include "vprbench/hog.hpp"
#include "vprbench/matching.hpp"

namespace vpr {

namespace detail {
inline std::vector<double> parse_reals(const std::string& line, std::size_t line_no) {
  std::vector<double> values;
  const char* p = line.data();
  const char* end = line.data() + line.size();
  while (true) {
    while (p < end && std::isspace(static_cast<unsigned char>(*p))) ++p;
    if (p == end) break;
    double v = 0.0;
    const auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc{} || !std::isfinite(v)) throw ParseError(line_no, "invalid real");
    values.push_back(v);
    p = next;
  }
  return values;
}
}  // namespace detail

struct ExternalDescriptors {
  Metric metric = Metric::Cosine;
  std::vector<GlobalDescriptor> descriptors;
};

inline ExternalDescriptors read_descriptor_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::NotFound, "descriptor file " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::FormatError, path.string() + " is empty");
  std::istringstream header(line);
  std::string magic, version, metric_tag, extra;
  long long count = -1, dim = -1;
  if (!(header >> magic >> version >> count >> dim >> metric_tag) || (header >> extra) ||
      magic != "vpr-desc" || version != "v1" || count < 1 || dim < 1) {
    throw Error(ErrorCode::FormatError, path.string() + ": header must be 'vpr-desc v1 <count> <dim> <metric>'");
  }
  const auto metric = parse_metric(metric_tag);
  if (!metric || *metric == Metric::Regional) {
    throw Error(ErrorCode::FormatError, path.string() + ": unknown metric tag '" + metric_tag + "'");
  }

  ExternalDescriptors out;
  out.metric = *metric;
  out.descriptors.reserve(static_cast<std::size_t>(count));
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (out.descriptors.size() == static_cast<std::size_t>(count)) {
      throw Error(ErrorCode::FormatError, path.string() + ": more vectors than the declared count " +
                                              std::to_string(count));
    }
    GlobalDescriptor d{detail::parse_reals(line, line_no)};
    if (d.values.size() != static_cast<std::size_t>(dim)) {
      throw ParseError(line_no, "expected " + std::to_string(dim) + " values, got " + std::to_string(d.values.size()));
    }
    out.descriptors.push_back(std::move(d));
  }
  if (out.descriptors.size() != static_cast<std::size_t>(count)) {
    throw Error(ErrorCode::AlignmentError, path.string() + ": header declares " + std::to_string(count) +
                                               " vectors, file holds " + std::to_string(out.descriptors.size()));
  }
  return out;
}

/// Reads a descriptor file and checks it aligns with `expected_count` images.
inline ExternalDescriptors ingest_external_descriptors(const std::filesystem::path& path,
                                                       std::size_t expected_count) {
  ExternalDescriptors d = read_descriptor_file(path);
  if (d.descriptors.size() != expected_count) {
    throw Error(ErrorCode::AlignmentError, path.string() + " holds " + std::to_string(d.descriptors.size()) +
                                               " descriptors for " + std::to_string(expected_count) + " images");
  }
  return d;
}

inline void write_descriptor_file(const std::filesystem::path& path, const std::vector<GlobalDescriptor>& descs,
                                  Metric metric) {
  if (descs.empty()) throw Error(ErrorCode::InvalidParam, "no descriptors to write");
  if (metric == Metric::Regional) throw Error(ErrorCode::FormatError, "regional sets cannot be written as v1");
  const std::size_t dim = descs.front().dim();
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "vpr-desc v1 " << descs.size() << ' ' << dim << ' ' << to_string(metric) << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const GlobalDescriptor& d : descs) {
    if (d.dim() != dim) throw Error(ErrorCode::DimMismatch, "descriptors differ in dimension");
    for (std::size_t i = 0; i < d.values.size(); ++i) out << (i ? " " : "") << d.values[i];
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}


inline void write_regional_descriptor_file(const std::filesystem::path& path,
                                           const std::vector<RegionalDescriptorSet>& sets) {
  if (sets.empty() || sets.front().regions.empty()) {
    throw Error(ErrorCode::EmptyDescriptorSet, "no regional descriptors to write");
  }
  const std::size_t dim = sets.front().regions.front().descriptor.dim();
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "vpr-rdesc v1 " << sets.size() << ' ' << dim << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const RegionalDescriptorSet& s : sets) {
    out << "image " << s.regions.size() << '\n';
    for (const Region& r : s.regions) {
      if (r.descriptor.dim() != dim) throw Error(ErrorCode::DimMismatch, "regional descriptors differ in dimension");
      out << r.rect.x << ' ' << r.rect.y << ' ' << r.rect.width << ' ' << r.rect.height;
      for (double v : r.descriptor.values) out << ' ' << v;
      out << '\n';
    }
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

inline std::vector<RegionalDescriptorSet> read_regional_descriptor_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::NotFound, "descriptor file " + path.string());
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  if (!next_line()) throw Error(ErrorCode::FormatError, path.string() + " is empty");
  std::istringstream header(line);
  std::string magic, version;
  long long images = -1, dim = -1;
  if (!(header >> magic >> version >> images >> dim) || magic != "vpr-rdesc" || version != "v1" || images < 1 ||
      dim < 1) {
    throw Error(ErrorCode::FormatError, path.string() + ": header must be 'vpr-rdesc v1 <images> <dim>'");
  }
  std::vector<RegionalDescriptorSet> sets;
  for (long long i = 0; i < images; ++i) {
    if (!next_line()) throw Error(ErrorCode::AlignmentError, path.string() + ": fewer images than declared");
    std::istringstream ih(line);
    std::string tag;
    long long regions = -1;
    if (!(ih >> tag >> regions) || tag != "image" || regions < 1) {
      throw ParseError(line_no, "expected 'image <regions>'");
    }
    RegionalDescriptorSet set;
    for (long long k = 0; k < regions; ++k) {
      if (!next_line()) throw ParseError(line_no, "truncated region list");
      const std::vector<double> v = detail::parse_reals(line, line_no);
      if (v.size() != static_cast<std::size_t>(dim) + 4) {
        throw ParseError(line_no, "expected 4 rectangle fields and " + std::to_string(dim) + " values");
      }
      Region r;
      r.rect = {static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2]), static_cast<int>(v[3])};
      r.descriptor.values.assign(v.begin() + 4, v.end());
      set.regions.push_back(std::move(r));
    }
    sets.push_back(std::move(set));
  }
  if (next_line()) throw Error(ErrorCode::FormatError, path.string() + ": more images than declared");
  return sets;
}

}  // namespace vpr
