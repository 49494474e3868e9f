#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "vprbench/error.hpp"
#include "vprbench/imaging.hpp"

namespace vpr {

struct HogParams {
  int cell_size = 8;
  int block_size = 16;
  int block_stride = 8;
  int bins = 9;

  void validate() const {
    if (cell_size < 1 || block_size < cell_size || block_stride < 1 || bins < 2 ||
        block_size % cell_size != 0 || block_stride % cell_size != 0) {
      throw Error(ErrorCode::InvalidParam,
                  "HOG params need block_size and block_stride to be multiples of cell_size and bins >= 2");
    }
  }

  friend bool operator==(const HogParams&, const HogParams&) = default;
};

/// Block-grid geometry of a HOG descriptor over a given image size.
struct HogLayout {
  int cells_x = 0;
  int cells_y = 0;
  int cells_per_block = 0;  // along one side
  int stride_cells = 0;
  int blocks_x = 0;
  int blocks_y = 0;
  int bins = 0;

  std::size_t block_dim() const noexcept {
    return static_cast<std::size_t>(cells_per_block) * cells_per_block * bins;
  }
  std::size_t dim() const noexcept {
    return static_cast<std::size_t>(blocks_x) * blocks_y * block_dim();
  }
};

inline HogLayout hog_layout(int width, int height, const HogParams& params) {
  params.validate();
  if (width % params.cell_size != 0 || height % params.cell_size != 0) {
    throw Error(ErrorCode::GridMismatch, std::to_string(width) + "x" + std::to_string(height) +
                                             " image is not aligned to cell size " +
                                             std::to_string(params.cell_size));
  }
  if (width < params.block_size || height < params.block_size) {
    throw Error(ErrorCode::GridMismatch, "image smaller than one HOG block");
  }
  HogLayout l;
  l.cells_x = width / params.cell_size;
  l.cells_y = height / params.cell_size;
  l.cells_per_block = params.block_size / params.cell_size;
  l.stride_cells = params.block_stride / params.cell_size;
  l.blocks_x = (l.cells_x - l.cells_per_block) / l.stride_cells + 1;
  l.blocks_y = (l.cells_y - l.cells_per_block) / l.stride_cells + 1;
  l.bins = params.bins;
  return l;
}

struct GlobalDescriptor {
  std::vector<double> values;

  std::size_t dim() const noexcept { return values.size(); }
  friend bool operator==(const GlobalDescriptor&, const GlobalDescriptor&) = default;
};

/// Orientation bin for an unsigned angle in [0, 180). Bin i covers
/// [i * w, (i + 1) * w), which is the bin whose center is nearest.
inline int orientation_bin(double degrees, int bins) noexcept {
  const double width = 180.0 / bins;
  const int b = static_cast<int>(degrees / width);
  return b < 0 ? 0 : (b >= bins ? bins - 1 : b);
}

/// Magnitude-weighted, hard-assigned orientation histograms per cell.
/// Returned row-major by cell, `bins` values per cell.
inline std::vector<double> cell_histograms(const GradientField& grad, const HogParams& params) {
  const int cells_x = grad.width / params.cell_size;
  const int cells_y = grad.height / params.cell_size;
  std::vector<double> hist(static_cast<std::size_t>(cells_x) * cells_y * params.bins, 0.0);
  for (int y = 0; y < cells_y * params.cell_size; ++y) {
    const int cy = y / params.cell_size;
    for (int x = 0; x < cells_x * params.cell_size; ++x) {
      const double m = grad.magnitude_at(x, y);
      if (m == 0.0) continue;
      const int cx = x / params.cell_size;
      const std::size_t cell = static_cast<std::size_t>(cy) * cells_x + cx;
      hist[cell * params.bins + orientation_bin(grad.orientation_at(x, y), params.bins)] += m;
    }
  }
  return hist;
}

inline constexpr double kBlockNormEpsilon = 1e-12;

inline GlobalDescriptor hog_describe(const GrayImage& img, const HogParams& params = {}) {
  const HogLayout layout = hog_layout(img.width(), img.height(), params);
  const GradientField grad = gradients(img);
  const std::vector<double> hist = cell_histograms(grad, params);

  GlobalDescriptor desc;
  desc.values.reserve(layout.dim());
  const std::size_t bins = static_cast<std::size_t>(layout.bins);
  for (int by = 0; by < layout.blocks_y; ++by) {
    for (int bx = 0; bx < layout.blocks_x; ++bx) {
      const std::size_t begin = desc.values.size();
      for (int cy = 0; cy < layout.cells_per_block; ++cy) {
        for (int cx = 0; cx < layout.cells_per_block; ++cx) {
          const std::size_t cell = static_cast<std::size_t>(by * layout.stride_cells + cy) * layout.cells_x +
                                   (bx * layout.stride_cells + cx);
          const auto first = hist.begin() + static_cast<std::ptrdiff_t>(cell * bins);
          desc.values.insert(desc.values.end(), first, first + static_cast<std::ptrdiff_t>(bins));
        }
      }
      double sq = 0.0;
      for (std::size_t i = begin; i < desc.values.size(); ++i) sq += desc.values[i] * desc.values[i];
      const double norm = std::sqrt(sq + kBlockNormEpsilon);
      for (std::size_t i = begin; i < desc.values.size(); ++i) desc.values[i] /= norm;
    }
  }
  return desc;
}

/// Cosine similarity; 0 when either vector has zero norm.
inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimMismatch,
                "descriptor dims " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  const double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return c > 1.0 ? 1.0 : (c < -1.0 ? -1.0 : c);
}

inline double hog_compare(const GlobalDescriptor& a, const GlobalDescriptor& b) {
  return cosine_similarity(a.values, b.values);
}

}  // namespace vpr
