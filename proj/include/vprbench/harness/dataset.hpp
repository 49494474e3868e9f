#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <string>
#include <vector>

#include "vprbench/error.hpp"
#include "vprbench/matching.hpp"

namespace vpr {

/// A benchmark corpus: `<dir>/query/` and `<dir>/ref/` image folders plus a
/// ground-truth CSV. Images are ordered by filename.
struct Dataset {
  std::string name;
  std::vector<std::filesystem::path> query_paths;
  std::vector<std::filesystem::path> ref_paths;
  GroundTruth ground_truth;

  std::size_t n_queries() const noexcept { return query_paths.size(); }
  std::size_t n_refs() const noexcept { return ref_paths.size(); }
};

inline bool is_image_file(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

/// Image files directly inside `dir`, sorted lexicographically by filename.
inline std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorCode::LayoutError, "missing directory " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
  }
  if (files.empty()) throw Error(ErrorCode::LayoutError, "no PNG/JPEG images in " + dir.string());
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });
  return files;
}

inline Dataset load_dataset(const std::filesystem::path& dir, const std::filesystem::path& gt_path,
                            std::size_t tolerance = 0) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorCode::LayoutError, "dataset directory " + dir.string() + " does not exist");
  }
  Dataset ds;
  ds.name = std::filesystem::absolute(dir).lexically_normal().filename().string();
  if (ds.name.empty()) ds.name = std::filesystem::absolute(dir).lexically_normal().parent_path().filename().string();
  ds.query_paths = list_images(dir / "query");
  ds.ref_paths = list_images(dir / "ref");
  ds.ground_truth = read_ground_truth(gt_path, ds.n_queries(), ds.n_refs(), tolerance);
  return ds;
}

}  // namespace vpr
