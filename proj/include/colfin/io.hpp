// Copyright 2026 The colfin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <png.h>

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "colfin/error.hpp"
#include "colfin/image.hpp"

namespace colfin {

/// Decoded raster before any domain interpretation. Intensities are in
/// [0,1], scaled by the file's max representable value.
struct LoadedImage {
  int width = 0;
  int height = 0;
  int channels = 0;  // 1 or 3
  std::vector<float> data;
  double dpi = 0.0;  // 0 when the file carries no resolution metadata

  float at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline FilePtr open_file(const std::string& path, const char* mode) {
  return FilePtr(std::fopen(path.c_str(), mode));
}

// --- PNM (P2/P3/P5/P6) ---

inline int pnm_next_token(std::FILE* f, char* buf, int cap) {
  int c;
  // skip whitespace and '#' comments
  while ((c = std::fgetc(f)) != EOF) {
    if (c == '#') {
      while ((c = std::fgetc(f)) != EOF && c != '\n') {
      }
    } else if (!std::isspace(c)) {
      break;
    }
  }
  if (c == EOF) return 0;
  int n = 0;
  do {
    if (n + 1 < cap) buf[n++] = static_cast<char>(c);
    c = std::fgetc(f);
  } while (c != EOF && !std::isspace(c));
  buf[n] = '\0';
  return n;
}

inline long pnm_next_int(std::FILE* f) {
  char tok[32];
  if (!pnm_next_token(f, tok, sizeof(tok))) {
    throw DecodeError("truncated PNM header");
  }
  char* end = nullptr;
  const long v = std::strtol(tok, &end, 10);
  if (end == tok || *end != '\0') {
    throw DecodeError(std::string("bad PNM integer '") + tok + "'");
  }
  return v;
}

inline LoadedImage load_pnm(std::FILE* f) {
  char magic[8];
  if (!pnm_next_token(f, magic, sizeof(magic)) || magic[0] != 'P') {
    throw DecodeError("not a PNM file");
  }
  const char kind = magic[1];
  if (kind != '2' && kind != '3' && kind != '5' && kind != '6') {
    throw DecodeError(std::string("unsupported PNM type ") + magic);
  }
  const bool color = (kind == '3' || kind == '6');
  const bool ascii = (kind == '2' || kind == '3');

  LoadedImage img;
  img.width = static_cast<int>(pnm_next_int(f));
  img.height = static_cast<int>(pnm_next_int(f));
  const long maxval = pnm_next_int(f);
  if (img.width <= 0 || img.height <= 0 || maxval <= 0 || maxval > 65535) {
    throw DecodeError("bad PNM dimensions or maxval");
  }
  img.channels = color ? 3 : 1;
  const std::size_t count =
      static_cast<std::size_t>(img.width) * img.height * img.channels;
  img.data.resize(count);
  const float scale = 1.0f / static_cast<float>(maxval);

  if (ascii) {
    for (std::size_t i = 0; i < count; ++i) {
      const long v = pnm_next_int(f);
      if (v < 0 || v > maxval) throw DecodeError("PNM sample out of range");
      img.data[i] = static_cast<float>(v) * scale;
    }
  } else {
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(count * bytes);
    if (std::fread(raw.data(), 1, raw.size(), f) != raw.size()) {
      throw DecodeError("truncated PNM pixel data");
    }
    for (std::size_t i = 0; i < count; ++i) {
      long v;
      if (bytes == 2) {
        v = (static_cast<long>(raw[2 * i]) << 8) | raw[2 * i + 1];
      } else {
        v = raw[i];
      }
      if (v > maxval) throw DecodeError("PNM sample out of range");
      img.data[i] = static_cast<float>(v) * scale;
    }
  }
  return img;
}

// --- PNG ---

inline LoadedImage load_png(std::FILE* f) {
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw DecodeError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw DecodeError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DecodeError("corrupt PNG stream");
  }
  png_init_io(png, f);
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int color_type = png_get_color_type(png, info);
  int bit_depth = png_get_bit_depth(png, info);

  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  bit_depth = png_get_bit_depth(png, info);
  const int channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DecodeError("unsupported PNG channel count " +
                      std::to_string(channels));
  }

  LoadedImage img;
  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  img.channels = channels;
  img.data.resize(static_cast<std::size_t>(w) * h * channels);

  png_uint_32 res_x = 0, res_y = 0;
  int unit = 0;
  if (png_get_pHYs(png, info, &res_x, &res_y, &unit) &&
      unit == PNG_RESOLUTION_METER && res_x > 0) {
    img.dpi = static_cast<double>(res_x) * 0.0254;
  }

  const std::size_t row_bytes = png_get_rowbytes(png, info);
  std::vector<unsigned char> row(row_bytes);
  const float scale = bit_depth == 16 ? 1.0f / 65535.0f : 1.0f / 255.0f;
  for (png_uint_32 y = 0; y < h; ++y) {
    png_read_row(png, row.data(), nullptr);
    float* dst = img.data.data() + static_cast<std::size_t>(y) * w * channels;
    if (bit_depth == 16) {
      for (std::size_t i = 0; i < static_cast<std::size_t>(w) * channels; ++i) {
        const unsigned v = (static_cast<unsigned>(row[2 * i]) << 8) | row[2 * i + 1];
        dst[i] = static_cast<float>(v) * scale;
      }
    } else {
      for (std::size_t i = 0; i < static_cast<std::size_t>(w) * channels; ++i) {
        dst[i] = static_cast<float>(row[i]) * scale;
      }
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

inline void save_png(const std::string& path, int width, int height,
                     int channels, const float* data, double dpi) {
  FilePtr f = open_file(path, "wb");
  if (!f) throw OutputUnwritable("cannot open " + path + " for writing");

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw OutputUnwritable("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw OutputUnwritable("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw OutputUnwritable("PNG write failure for " + path);
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, width, height, 8,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  if (dpi > 0) {
    const png_uint_32 ppm =
        static_cast<png_uint_32>(dpi / 0.0254 + 0.5);
    png_set_pHYs(png, info, ppm, ppm, PNG_RESOLUTION_METER);
  }
  png_write_info(png, info);

  std::vector<unsigned char> row(static_cast<std::size_t>(width) * channels);
  for (int y = 0; y < height; ++y) {
    const float* src = data + static_cast<std::size_t>(y) * width * channels;
    for (std::size_t i = 0; i < row.size(); ++i) {
      const float v = std::clamp(src[i], 0.0f, 1.0f);
      row[i] = static_cast<unsigned char>(std::lround(v * 255.0f));
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace detail

/// Load a PNG or PNM raster, sniffing the format from its magic bytes.
inline LoadedImage load_image(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw FileNotFound(path);
  }
  detail::FilePtr f = detail::open_file(path, "rb");
  if (!f) throw FileNotFound(path);

  unsigned char magic[8] = {0};
  const std::size_t got = std::fread(magic, 1, sizeof(magic), f.get());
  std::rewind(f.get());
  if (got >= 8 && png_sig_cmp(magic, 0, 8) == 0) {
    return detail::load_png(f.get());
  }
  if (got >= 2 && magic[0] == 'P' && magic[1] >= '1' && magic[1] <= '6') {
    return detail::load_pnm(f.get());
  }
  throw DecodeError("unrecognized raster format: " + path);
}

/// Collapse a loaded raster to one channel by channel average.
inline GrayImage to_gray(const LoadedImage& src) {
  GrayImage out(src.width, src.height);
  const std::size_t n = out.pixel_count();
  if (src.channels == 1) {
    std::copy(src.data.begin(), src.data.end(), out.data.begin());
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      out.data[i] = (src.data[3 * i] + src.data[3 * i + 1] +
                     src.data[3 * i + 2]) / 3.0f;
    }
  }
  return out;
}

inline void save_png_rgb8(const std::string& path, const ColorImage& img,
                          double dpi = 0.0) {
  detail::save_png(path, img.width, img.height, 3, img.data.data(), dpi);
}

inline void save_png_gray8(const std::string& path, const GrayImage& img,
                           double dpi = 0.0) {
  detail::save_png(path, img.width, img.height, 1, img.data.data(), dpi);
}

}  // namespace colfin
