#pragma once

// Procedural test scenes and on-disk corpora in the dataset layout.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>

#include "vprbench/error.hpp"
#include "vprbench/image_io.hpp"
#include "vprbench/imaging.hpp"

namespace vpr {

/// A textured scene: a random linear ramp background, a few rectangles and
/// discs of random intensity, and mild per-pixel noise. Distinct seeds give
/// visually distinct scenes with gradient structure everywhere.
inline GrayImage synthetic_scene(std::uint64_t seed, int width, int height) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> acc(static_cast<std::size_t>(width) * height);

  const double gx = (unit(rng) - 0.5) * 160.0 / width;
  const double gy = (unit(rng) - 0.5) * 160.0 / height;
  const double base = 60.0 + unit(rng) * 100.0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) acc[static_cast<std::size_t>(y) * width + x] = base + gx * x + gy * y;
  }

  const int shapes = 6 + static_cast<int>(unit(rng) * 6);
  for (int s = 0; s < shapes; ++s) {
    const double value = unit(rng) * 255.0;
    const double cx = unit(rng) * width;
    const double cy = unit(rng) * height;
    const double rx = (0.05 + unit(rng) * 0.25) * width;
    const double ry = (0.05 + unit(rng) * 0.25) * height;
    const bool disc = unit(rng) < 0.5;
    for (int y = std::max(0, static_cast<int>(cy - ry)); y < std::min(height, static_cast<int>(cy + ry) + 1); ++y) {
      for (int x = std::max(0, static_cast<int>(cx - rx)); x < std::min(width, static_cast<int>(cx + rx) + 1); ++x) {
        if (disc) {
          const double dx = (x - cx) / rx;
          const double dy = (y - cy) / ry;
          if (dx * dx + dy * dy > 1.0) continue;
        }
        acc[static_cast<std::size_t>(y) * width + x] = value;
      }
    }
  }

  std::normal_distribution<double> noise(0.0, 6.0);
  GrayImage img(width, height);
  auto px = img.pixels();
  for (std::size_t i = 0; i < acc.size(); ++i) {
    px[i] = static_cast<std::uint8_t>(std::clamp(std::lround(acc[i] + noise(rng)), 0L, 255L));
  }
  return img;
}

/// Adds zero-mean Gaussian noise; used to make query views differ from their
/// reference view.
inline GrayImage perturb(const GrayImage& img, std::uint64_t seed, double sigma) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  GrayImage out = img;
  for (auto& p : out.pixels()) p = static_cast<std::uint8_t>(std::clamp(std::lround(p + noise(rng)), 0L, 255L));
  return out;
}

struct SyntheticCorpusSpec {
  std::size_t places = 10;
  int width = 512;
  int height = 512;
  std::uint64_t seed = 1;
  // 0 makes every query a byte-identical copy of its reference.
  double query_noise_sigma = 0.0;
};

/// Writes `<dir>/query/NNNN.png`, `<dir>/ref/NNNN.png`, and
/// `<dir>/ground_truth.csv` with the identity mapping.
inline void write_synthetic_corpus(const std::filesystem::path& dir, const SyntheticCorpusSpec& spec) {
  if (spec.places == 0) throw Error(ErrorCode::InvalidParam, "corpus needs at least one place");
  std::filesystem::create_directories(dir / "query");
  std::filesystem::create_directories(dir / "ref");
  std::ofstream gt(dir / "ground_truth.csv");
  if (!gt) throw Error(ErrorCode::IoError, "cannot write ground truth in " + dir.string());
  gt << "query_index,ref_index\n";
  for (std::size_t i = 0; i < spec.places; ++i) {
    std::ostringstream name;
    name << std::setw(4) << std::setfill('0') << i << ".png";
    const GrayImage ref = synthetic_scene(spec.seed * 1000003ULL + i, spec.width, spec.height);
    save_png(ref, dir / "ref" / name.str());
    const GrayImage query =
        spec.query_noise_sigma > 0.0 ? perturb(ref, spec.seed * 7919ULL + i, spec.query_noise_sigma) : ref;
    save_png(query, dir / "query" / name.str());
    gt << i << ',' << i << '\n';
  }
}

}  // namespace vpr
