#pragma once

// PNG and JPEG decoding into GrayImage, plus PNG encoding for generated corpora.

#include <png.h>
#include <jpeglib.h>

#include <csetjmp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "vprbench/error.hpp"
#include "vprbench/imaging.hpp"

namespace vpr {

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline GrayImage luma_from_interleaved(int w, int h, int channels, std::span<const std::uint8_t> buf) {
  std::vector<std::uint8_t> gray(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < gray.size(); ++i) {
    const std::uint8_t* px = buf.data() + i * channels;
    gray[i] = channels >= 3 ? rgb_to_luma(px[0], px[1], px[2]) : px[0];
  }
  return GrayImage(w, h, std::move(gray));
}

inline GrayImage decode_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::DecodeError, path.string() + ": " + msg);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int channels = color ? 3 : 1;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
  // Alpha, when present, is composited onto black.
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::DecodeError, path.string() + ": " + msg);
  }
  const int w = static_cast<int>(image.width);
  const int h = static_cast<int>(image.height);
  return luma_from_interleaved(w, h, channels, buf);
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

inline void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

inline GrayImage decode_jpeg(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw Error(ErrorCode::NotFound, path.string());

  jpeg_decompress_struct cinfo{};
  JpegErrorManager jerr{};
  cinfo.err = jpeg_std_error(&jerr.base);
  jerr.base.error_exit = jpeg_error_exit;

  // Only trivially destructible state lives across the setjmp boundary.
  std::vector<std::uint8_t> buf;
  int w = 0, h = 0, channels = 0;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw Error(ErrorCode::DecodeError, path.string() + ": " + jerr.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, file.get());
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);
  w = static_cast<int>(cinfo.output_width);
  h = static_cast<int>(cinfo.output_height);
  channels = cinfo.output_components;
  buf.resize(static_cast<std::size_t>(w) * h * channels);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = buf.data() + static_cast<std::size_t>(cinfo.output_scanline) * w * channels;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return luma_from_interleaved(w, h, channels, buf);
}

}  // namespace detail

/// Decodes a PNG or JPEG file (detected by signature) into luminance.
inline GrayImage load_image(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::NotFound, path.string());
  }
  std::array<unsigned char, 8> sig{};
  {
    std::ifstream in(path, std::ios::binary);
    in.read(reinterpret_cast<char*>(sig.data()), sig.size());
    if (in.gcount() < 3) throw Error(ErrorCode::DecodeError, path.string() + ": file too short");
  }
  if (png_sig_cmp(sig.data(), 0, sig.size()) == 0) return detail::decode_png(path);
  if (sig[0] == 0xFF && sig[1] == 0xD8 && sig[2] == 0xFF) return detail::decode_jpeg(path);
  throw Error(ErrorCode::DecodeError, path.string() + ": not a PNG or JPEG file");
}

inline void save_png(const GrayImage& img, const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, img.pixels().data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::IoError, path.string() + ": " + msg);
  }
}

/// Writes interleaved 8-bit RGB data as a PNG.
inline void save_png_rgb(int width, int height, std::span<const std::uint8_t> rgb,
                         const std::filesystem::path& path) {
  if (rgb.size() != static_cast<std::size_t>(width) * height * 3) {
    throw Error(ErrorCode::InvalidSize, "RGB buffer length does not equal width * height * 3");
  }
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, rgb.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::IoError, path.string() + ": " + msg);
  }
}

}  // namespace vpr
