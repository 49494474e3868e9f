#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "vprbench/error.hpp"
#include "vprbench/hog.hpp"
#include "vprbench/imaging.hpp"

namespace vpr {

/// Regional HOG settings. Regions form a non-overlapping square grid; the
/// per-region HOG uses `hog`, so region_size must hold at least one block.
struct CohogParams {
  int region_size = 16;
  double entropy_threshold = 0.5;
  HogParams hog{};

  void validate() const {
    if (region_size < 1) throw Error(ErrorCode::InvalidParam, "region_size must be positive");
    if (!(entropy_threshold >= 0.0 && entropy_threshold <= 8.0)) {
      throw Error(ErrorCode::InvalidParam, "entropy_threshold must lie in [0, 8] bits");
    }
    hog.validate();
  }

  friend bool operator==(const CohogParams&, const CohogParams&) = default;
};

/// Entropy per grid cell, row-major.
struct EntropyGrid {
  int cols = 0;
  int rows = 0;
  int region_size = 0;
  std::vector<double> bits;

  double at(int col, int row) const { return bits[static_cast<std::size_t>(row) * cols + col]; }
  Rect cell_rect(std::size_t index) const {
    const int col = static_cast<int>(index % cols);
    const int row = static_cast<int>(index / cols);
    return {col * region_size, row * region_size, region_size, region_size};
  }
};

struct Region {
  Rect rect;
  GlobalDescriptor descriptor;

  friend bool operator==(const Region&, const Region&) = default;
};

struct RegionalDescriptorSet {
  std::vector<Region> regions;

  std::size_t count() const noexcept { return regions.size(); }
  friend bool operator==(const RegionalDescriptorSet&, const RegionalDescriptorSet&) = default;
};

inline EntropyGrid entropy_map(const GrayImage& img, int region_size) {
  if (region_size < 1 || img.width() % region_size != 0 || img.height() % region_size != 0) {
    throw Error(ErrorCode::GridMismatch, "region size " + std::to_string(region_size) +
                                             " does not divide " + std::to_string(img.width()) + "x" +
                                             std::to_string(img.height()));
  }
  EntropyGrid grid;
  grid.cols = img.width() / region_size;
  grid.rows = img.height() / region_size;
  grid.region_size = region_size;
  grid.bits.reserve(static_cast<std::size_t>(grid.cols) * grid.rows);
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      grid.bits.push_back(patch_entropy(img, {c * region_size, r * region_size, region_size, region_size}));
    }
  }
  return grid;
}

/// Cells with entropy >= threshold, in row-major order. When none qualify,
/// the single highest-entropy cell (lowest index on ties).
inline std::vector<Rect> select_rois(const EntropyGrid& grid, double threshold) {
  if (grid.bits.empty()) throw Error(ErrorCode::InvalidParam, "entropy map is empty");
  std::vector<Rect> rois;
  for (std::size_t i = 0; i < grid.bits.size(); ++i) {
    if (grid.bits[i] >= threshold) rois.push_back(grid.cell_rect(i));
  }
  if (rois.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < grid.bits.size(); ++i) {
      if (grid.bits[i] > grid.bits[best]) best = i;
    }
    rois.push_back(grid.cell_rect(best));
  }
  return rois;
}

/// Each region is described on its own pixels: gradients inside a region use
/// border replication at the region's edges.
inline RegionalDescriptorSet cohog_describe(const GrayImage& img, const CohogParams& params = {}) {
  params.validate();
  const EntropyGrid grid = entropy_map(img, params.region_size);
  // Fails early with GridMismatch if a region cannot hold a HOG block.
  (void)hog_layout(params.region_size, params.region_size, params.hog);

  RegionalDescriptorSet set;
  for (const Rect& rect : select_rois(grid, params.entropy_threshold)) {
    set.regions.push_back({rect, hog_describe(crop(img, rect), params.hog)});
  }
  return set;
}

/// Mean over query regions of the best cosine similarity against any
/// reference region.
inline double cohog_match(const RegionalDescriptorSet& query, const RegionalDescriptorSet& ref) {
  if (query.regions.empty() || ref.regions.empty()) {
    throw Error(ErrorCode::EmptyDescriptorSet, "regional descriptor set has no regions");
  }
  const std::size_t dim = query.regions.front().descriptor.dim();
  auto norms = [dim](const RegionalDescriptorSet& s) {
    std::vector<double> n;
    n.reserve(s.regions.size());
    for (const Region& r : s.regions) {
      if (r.descriptor.dim() != dim) throw Error(ErrorCode::DimMismatch, "regional descriptor dims differ");
      double sq = 0.0;
      for (double v : r.descriptor.values) sq += v * v;
      n.push_back(std::sqrt(sq));
    }
    return n;
  };
  const std::vector<double> qn = norms(query);
  const std::vector<double> rn = norms(ref);

  double total = 0.0;
  for (std::size_t i = 0; i < query.regions.size(); ++i) {
    const double* q = query.regions[i].descriptor.values.data();
    double best = -1.0;
    for (std::size_t j = 0; j < ref.regions.size(); ++j) {
      double score = 0.0;
      if (qn[i] != 0.0 && rn[j] != 0.0) {
        const double* r = ref.regions[j].descriptor.values.data();
        double dot = 0.0;
        for (std::size_t k = 0; k < dim; ++k) dot += q[k] * r[k];
        score = std::clamp(dot / (qn[i] * rn[j]), -1.0, 1.0);
      }
      if (score > best) best = score;
    }
    total += best;
  }
  return total / static_cast<double>(query.regions.size());
}

}  // namespace vpr
