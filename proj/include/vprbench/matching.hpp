#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <exception>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include "vprbench/cohog.hpp"
#include "vprbench/error.hpp"
#include "vprbench/hog.hpp"

namespace vpr {

enum class Metric { Cosine, L1, Regional };

constexpr std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::Cosine: return "cosine";
    case Metric::L1: return "l1";
    case Metric::Regional: return "regional";
  }
  return "unknown";
}

inline std::optional<Metric> parse_metric(std::string_view s) {
  if (s == "cosine") return Metric::Cosine;
  if (s == "l1") return Metric::L1;
  if (s == "regional") return Metric::Regional;
  return std::nullopt;
}

using Descriptor = std::variant<GlobalDescriptor, RegionalDescriptorSet>;

/// Negated L1 distance: 0 for identical vectors, more negative as they diverge.
inline double l1_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimMismatch,
                "descriptor dims " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return -sum;
}

struct SimilarityMatrix {
  std::size_t n_queries = 0;
  std::size_t n_refs = 0;
  Metric metric = Metric::Cosine;
  std::vector<double> scores;  // row-major, one row per query

  double at(std::size_t q, std::size_t r) const { return scores[q * n_refs + r]; }
  std::span<const double> row(std::size_t q) const {
    return std::span<const double>(scores).subspan(q * n_refs, n_refs);
  }
};

/// Scores one query/reference pair under `metric`; the descriptor kind must match.
inline double score_pair(const Descriptor& query, const Descriptor& ref, Metric metric) {
  if (metric == Metric::Regional) {
    const auto* q = std::get_if<RegionalDescriptorSet>(&query);
    const auto* r = std::get_if<RegionalDescriptorSet>(&ref);
    if (!q || !r) throw Error(ErrorCode::KindMismatch, "regional metric needs regional descriptor sets");
    return cohog_match(*q, *r);
  }
  const auto* q = std::get_if<GlobalDescriptor>(&query);
  const auto* r = std::get_if<GlobalDescriptor>(&ref);
  if (!q || !r) {
    throw Error(ErrorCode::KindMismatch, std::string(to_string(metric)) + " metric needs global descriptors");
  }
  return metric == Metric::Cosine ? cosine_similarity(q->values, r->values)
                                  : l1_similarity(q->values, r->values);
}

inline void check_kind(std::span<const Descriptor> descs, Metric metric) {
  const bool regional = metric == Metric::Regional;
  for (const Descriptor& d : descs) {
    if (std::holds_alternative<RegionalDescriptorSet>(d) != regional) {
      throw Error(ErrorCode::KindMismatch, "descriptor list mixes kinds or does not fit metric " +
                                               std::string(to_string(metric)));
    }
  }
}

/// Runs `fn(i)` for i in [0, n) over `workers` threads; chunks are contiguous.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> threads;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        try {
          for (std::size_t i = w * chunk; i < std::min(n, (w + 1) * chunk); ++i) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Exhaustive query x reference scoring. Rows may be split across `workers`
/// threads; each entry is computed independently, so results do not depend
/// on the worker count.
inline SimilarityMatrix similarity_matrix(std::span<const Descriptor> queries,
                                          std::span<const Descriptor> refs, Metric metric,
                                          std::size_t workers = 1) {
  if (queries.empty() || refs.empty()) {
    throw Error(ErrorCode::InvalidParam, "similarity matrix needs non-empty query and reference lists");
  }
  check_kind(queries, metric);
  check_kind(refs, metric);

  SimilarityMatrix m;
  m.n_queries = queries.size();
  m.n_refs = refs.size();
  m.metric = metric;
  m.scores.resize(m.n_queries * m.n_refs);
  parallel_for(m.n_queries, workers, [&](std::size_t q) {
    for (std::size_t r = 0; r < m.n_refs; ++r) m.scores[q * m.n_refs + r] = score_pair(queries[q], refs[r], metric);
  });
  return m;
}

struct GroundTruth {
  std::vector<std::size_t> ref_for_query;  // indexed by query
  std::size_t tolerance = 0;               // frames either side still counted correct

  std::size_t n_queries() const noexcept { return ref_for_query.size(); }
  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct MatchOutcome {
  std::vector<std::uint8_t> matches_list;
  std::vector<std::size_t> best_indices;
  double accuracy = 0.0;
};

/// Row argmax, ties resolved to the lowest reference index.
inline std::size_t best_reference(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t r = 1; r < row.size(); ++r) {
    if (row[r] > row[best]) best = r;
  }
  return best;
}

inline MatchOutcome evaluate_matches(const SimilarityMatrix& m, const GroundTruth& gt) {
  if (gt.n_queries() != m.n_queries) {
    throw Error(ErrorCode::GroundTruthError, "ground truth covers " + std::to_string(gt.n_queries()) +
                                                 " queries, matrix has " + std::to_string(m.n_queries));
  }
  MatchOutcome out;
  out.matches_list.reserve(m.n_queries);
  out.best_indices.reserve(m.n_queries);
  std::size_t correct = 0;
  for (std::size_t q = 0; q < m.n_queries; ++q) {
    const std::size_t best = best_reference(m.row(q));
    const std::size_t truth = gt.ref_for_query[q];
    const std::size_t diff = best > truth ? best - truth : truth - best;
    const bool ok = diff <= gt.tolerance;
    out.best_indices.push_back(best);
    out.matches_list.push_back(ok ? 1 : 0);
    correct += ok ? 1 : 0;
  }
  out.accuracy = m.n_queries == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(m.n_queries);
  return out;
}

/// Reads `query_index,ref_index` rows; every query in [0, n_queries) must
/// appear exactly once and every reference index must be < n_refs.
inline GroundTruth read_ground_truth(const std::filesystem::path& path, std::size_t n_queries,
                                     std::size_t n_refs, std::size_t tolerance = 0) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::NotFound, "ground truth file " + path.string());

  auto trim = [](std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
  };
  auto parse_index = [&](const std::string& field, std::size_t line) {
    const std::string t = trim(field);
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
      throw Error(ErrorCode::GroundTruthError,
                  "line " + std::to_string(line) + ": '" + t + "' is not a non-negative integer");
    }
    return value;
  };

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line) || trim(line) != "query_index,ref_index") {
    throw Error(ErrorCode::GroundTruthError, path.string() + ": expected header 'query_index,ref_index'");
  }
  ++line_no;
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> mapping(n_queries, kUnset);
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw Error(ErrorCode::GroundTruthError, "line " + std::to_string(line_no) + ": expected two fields");
    }
    const std::size_t q = parse_index(line.substr(0, comma), line_no);
    const std::size_t r = parse_index(line.substr(comma + 1), line_no);
    if (q >= n_queries) {
      throw Error(ErrorCode::GroundTruthError, "line " + std::to_string(line_no) + ": query index " +
                                                   std::to_string(q) + " out of range");
    }
    if (r >= n_refs) {
      throw Error(ErrorCode::GroundTruthError, "line " + std::to_string(line_no) + ": ref index " +
                                                   std::to_string(r) + " out of range (" +
                                                   std::to_string(n_refs) + " references)");
    }
    if (mapping[q] != kUnset) {
      throw Error(ErrorCode::GroundTruthError, "line " + std::to_string(line_no) + ": query " +
                                                   std::to_string(q) + " listed twice");
    }
    mapping[q] = r;
  }
  for (std::size_t q = 0; q < n_queries; ++q) {
    if (mapping[q] == kUnset) {
      throw Error(ErrorCode::GroundTruthError, "query " + std::to_string(q) + " has no ground truth row");
    }
  }
  return GroundTruth{std::move(mapping), tolerance};
}

}  // namespace vpr
