#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "vprbench/error.hpp"

namespace vpr {

/// Axis-aligned pixel rectangle, half-open: [x, x + width) x [y, y + height).
struct Rect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  bool empty() const noexcept { return width <= 0 || height <= 0; }
  bool intersects(const Rect& o) const noexcept {
    return x < o.x + o.width && o.x < x + width && y < o.y + o.height && o.y < y + height;
  }
  friend bool operator==(const Rect&, const Rect&) = default;
};

/// 8-bit luminance image stored row-major.
class GrayImage {
 public:
  GrayImage() = default;

  GrayImage(int width, int height, std::uint8_t fill = 0)
      : width_(width), height_(height) {
    if (width < 1 || height < 1) {
      throw Error(ErrorCode::InvalidSize, "image dimensions must be positive");
    }
    data_.assign(static_cast<std::size_t>(width) * height, fill);
  }

  GrayImage(int width, int height, std::vector<std::uint8_t> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (width < 1 || height < 1) {
      throw Error(ErrorCode::InvalidSize, "image dimensions must be positive");
    }
    if (data_.size() != static_cast<std::size_t>(width) * height) {
      throw Error(ErrorCode::InvalidSize, "pixel buffer length does not equal width * height");
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::uint8_t at(int x, int y) const { return data_[index(x, y)]; }
  std::uint8_t& at(int x, int y) { return data_[index(x, y)]; }

  std::span<const std::uint8_t> pixels() const noexcept { return data_; }
  std::span<std::uint8_t> pixels() noexcept { return data_; }

  Rect bounds() const noexcept { return {0, 0, width_, height_}; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Per-pixel gradient magnitude and unsigned orientation in degrees, [0, 180).
struct GradientField {
  int width = 0;
  int height = 0;
  std::vector<double> magnitude;
  std::vector<double> orientation;

  double magnitude_at(int x, int y) const { return magnitude[static_cast<std::size_t>(y) * width + x]; }
  double orientation_at(int x, int y) const { return orientation[static_cast<std::size_t>(y) * width + x]; }
};

/// BT.709 luma, rounded to the nearest integer.
inline std::uint8_t rgb_to_luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
  const double y = 0.2126 * r + 0.7152 * g + 0.0722 * b;
  return static_cast<std::uint8_t>(std::clamp(std::lround(y), 0L, 255L));
}

/// Bilinear resize using pixel-center alignment, with edge clamping.
inline GrayImage resize(const GrayImage& img, int w, int h) {
  if (w < 2 || h < 2) {
    throw Error(ErrorCode::InvalidSize, "resize target must be at least 2x2, got " +
                                            std::to_string(w) + "x" + std::to_string(h));
  }
  if (w == img.width() && h == img.height()) return img;

  const double sx = static_cast<double>(img.width()) / w;
  const double sy = static_cast<double>(img.height()) / h;
  const int max_x = img.width() - 1;
  const int max_y = img.height() - 1;

  auto source_coord = [](int dst, double scale, int max) {
    const double s = std::clamp((dst + 0.5) * scale - 0.5, 0.0, static_cast<double>(max));
    const int i0 = static_cast<int>(std::floor(s));
    const int i1 = std::min(i0 + 1, max);
    return std::tuple{i0, i1, s - i0};
  };

  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    const auto [y0, y1, fy] = source_coord(y, sy, max_y);
    for (int x = 0; x < w; ++x) {
      const auto [x0, x1, fx] = source_coord(x, sx, max_x);
      const double top = img.at(x0, y0) * (1.0 - fx) + img.at(x1, y0) * fx;
      const double bottom = img.at(x0, y1) * (1.0 - fx) + img.at(x1, y1) * fx;
      const double v = top * (1.0 - fy) + bottom * fy;
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return out;
}

/// Copies the pixels of `rect` into a new image.
inline GrayImage crop(const GrayImage& img, const Rect& rect) {
  if (rect.empty() || rect.x < 0 || rect.y < 0 || rect.x + rect.width > img.width() ||
      rect.y + rect.height > img.height()) {
    throw Error(ErrorCode::InvalidRegion, "crop rectangle outside image bounds");
  }
  GrayImage out(rect.width, rect.height);
  for (int y = 0; y < rect.height; ++y) {
    for (int x = 0; x < rect.width; ++x) out.at(x, y) = img.at(rect.x + x, rect.y + y);
  }
  return out;
}

/// Folds an angle in degrees from atan2's (-180, 180] into [0, 180).
inline double fold_orientation(double degrees) noexcept {
  if (degrees < 0.0) degrees += 180.0;
  if (degrees >= 180.0) degrees -= 180.0;
  return degrees;
}

/// Central-difference gradients [-1, 0, 1] with replicated borders.
inline GradientField gradients(const GrayImage& img) {
  const int w = img.width();
  const int h = img.height();
  if (w < 2 || h < 2) {
    throw Error(ErrorCode::InvalidSize, "gradients need an image of at least 2x2");
  }
  GradientField field;
  field.width = w;
  field.height = h;
  field.magnitude.resize(img.size());
  field.orientation.resize(img.size());

  for (int y = 0; y < h; ++y) {
    const int yu = std::max(y - 1, 0);
    const int yd = std::min(y + 1, h - 1);
    for (int x = 0; x < w; ++x) {
      const int xl = std::max(x - 1, 0);
      const int xr = std::min(x + 1, w - 1);
      const double gx = static_cast<double>(img.at(xr, y)) - img.at(xl, y);
      const double gy = static_cast<double>(img.at(x, yd)) - img.at(x, yu);
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      field.magnitude[i] = std::sqrt(gx * gx + gy * gy);
      field.orientation[i] =
          field.magnitude[i] == 0.0 ? 0.0 : fold_orientation(std::atan2(gy, gx) * 180.0 / std::numbers::pi);
    }
  }
  return field;
}

/// Shannon entropy in bits of the intensity histogram inside `rect`.
inline double patch_entropy(const GrayImage& img, const Rect& rect) {
  if (rect.empty() || rect.x < 0 || rect.y < 0 || rect.x + rect.width > img.width() ||
      rect.y + rect.height > img.height()) {
    throw Error(ErrorCode::InvalidRegion, "entropy rectangle empty or outside image bounds");
  }
  std::array<std::size_t, 256> hist{};
  for (int y = rect.y; y < rect.y + rect.height; ++y) {
    for (int x = rect.x; x < rect.x + rect.width; ++x) ++hist[img.at(x, y)];
  }
  const double n = static_cast<double>(rect.width) * rect.height;
  double bits = 0.0;
  for (std::size_t count : hist) {
    if (count == 0) continue;
    const double p = count / n;
    bits -= p * std::log2(p);
  }
  return bits <= 0.0 ? 0.0 : std::min(bits, 8.0);
}

}  // namespace vpr
