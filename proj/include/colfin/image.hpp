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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "colfin/error.hpp"

namespace colfin {

/// Dense row-major float raster with a compile-time channel count.
/// Intensities are kept in [0,1] by convention; ops that can leave the
/// range clamp before returning.
template <int Channels>
struct Image {
  static_assert(Channels >= 1);

  int width = 0;
  int height = 0;
  std::vector<float> data;  // height * width * Channels

  Image() = default;
  Image(int w, int h, float fill = 0.0f)
      : width(w), height(h),
        data(static_cast<std::size_t>(w) * h * Channels, fill) {}

  static constexpr int channels() { return Channels; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }

  float& at(int x, int y, int c = 0) {
    return data[(static_cast<std::size_t>(y) * width + x) * Channels + c];
  }
  float at(int x, int y, int c = 0) const {
    return data[(static_cast<std::size_t>(y) * width + x) * Channels + c];
  }

  /// Clamp-to-edge pixel access.
  float at_clamped(int x, int y, int c = 0) const {
    x = std::clamp(x, 0, width - 1);
    y = std::clamp(y, 0, height - 1);
    return at(x, y, c);
  }

  template <int C2>
  bool same_dims(const Image<C2>& other) const {
    return width == other.width && height == other.height;
  }

  bool operator==(const Image& other) const {
    return width == other.width && height == other.height &&
           data == other.data;
  }
};

using GrayImage = Image<1>;
using ColorImage = Image<3>;

/// Bilinear sample with clamp-to-edge, result clamped to the range of the
/// four taps so interpolation can never leave the local intensity range.
template <int C>
inline float bilinear_sample(const Image<C>& img, float x, float y, int c = 0) {
  const float fx = std::floor(x);
  const float fy = std::floor(y);
  const int x0 = static_cast<int>(fx);
  const int y0 = static_cast<int>(fy);
  const float ax = x - fx;
  const float ay = y - fy;

  const float v00 = img.at_clamped(x0, y0, c);
  const float v10 = img.at_clamped(x0 + 1, y0, c);
  const float v01 = img.at_clamped(x0, y0 + 1, c);
  const float v11 = img.at_clamped(x0 + 1, y0 + 1, c);

  const float top = v00 * (1.0f - ax) + v10 * ax;
  const float bot = v01 * (1.0f - ax) + v11 * ax;
  float v = top * (1.0f - ay) + bot * ay;

  const float lo = std::min(std::min(v00, v10), std::min(v01, v11));
  const float hi = std::max(std::max(v00, v10), std::max(v01, v11));
  return std::clamp(v, lo, hi);
}

template <int C>
inline void clamp01(Image<C>& img) {
  for (float& v : img.data) v = std::clamp(v, 0.0f, 1.0f);
}

/// Channel-average grayscale projection.
inline GrayImage intensity_mean(const ColorImage& img) {
  GrayImage out(img.width, img.height);
  const std::size_t n = img.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    out.data[i] =
        (img.data[3 * i] + img.data[3 * i + 1] + img.data[3 * i + 2]) / 3.0f;
  }
  return out;
}

/// Single-channel ridge raster. 0 = ridge (dark), 1 = valley (bright).
struct RidgeMap {
  GrayImage image;
  double nominal_resolution = 500.0;  // dots per inch

  int width() const { return image.width; }
  int height() const { return image.height; }
};

inline constexpr int kMinRidgeMapSide = 64;

inline void validate(const RidgeMap& rm) {
  if (rm.width() < kMinRidgeMapSide || rm.height() < kMinRidgeMapSide) {
    throw TooSmall("ridge map " + std::to_string(rm.width()) + "x" +
                   std::to_string(rm.height()) + " is below " +
                   std::to_string(kMinRidgeMapSide) + "x" +
                   std::to_string(kMinRidgeMapSide));
  }
  if (!(rm.nominal_resolution > 0)) {
    throw DecodeError("nominal resolution must be positive");
  }
  for (float v : rm.image.data) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw DecodeError("ridge map intensity outside [0,1]");
    }
  }
}

/// Fingertip silhouette weights in [0,1]; 1 = inside the finger.
struct ShapeMask {
  GrayImage weights;

  int width() const { return weights.width; }
  int height() const { return weights.height; }

  /// Weighted centroid of the support. Falls back to the canvas center
  /// when the mask is empty.
  void centroid(double* cx, double* cy) const {
    double sw = 0.0, sx = 0.0, sy = 0.0;
    for (int y = 0; y < weights.height; ++y) {
      for (int x = 0; x < weights.width; ++x) {
        const double w = weights.at(x, y);
        sw += w;
        sx += w * x;
        sy += w * y;
      }
    }
    if (sw <= 0.0) {
      *cx = 0.5 * (weights.width - 1);
      *cy = 0.5 * (weights.height - 1);
    } else {
      *cx = sx / sw;
      *cy = sy / sw;
    }
  }

  std::size_t support_count() const {
    std::size_t n = 0;
    for (float w : weights.data)
      if (w > 0.0f) ++n;
    return n;
  }
};

/// Ridge intensities carried alongside a colorized raster so later stages
/// can locate ridge lines without re-detecting them. Values follow the
/// RidgeMap convention: 0 = ridge line, 1 = valley/background.
struct RidgeChannel {
  GrayImage values;

  int width() const { return values.width; }
  int height() const { return values.height; }
};

}  // namespace colfin
