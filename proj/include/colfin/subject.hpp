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
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "colfin/capture.hpp"
#include "colfin/error.hpp"
#include "colfin/image.hpp"
#include "colfin/rng.hpp"

namespace colfin {

/// Fingertip skin tone, linear RGB in [0,1].
struct SkinColor {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;
};

inline double luminance601(const SkinColor& c) {
  return 0.299 * c.r + 0.587 * c.g + 0.114 * c.b;
}

inline void validate(const SkinColor& c) {
  for (double v : {c.r, c.g, c.b}) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ConfigInvalid("skin color channel outside [0,1]");
    }
  }
  const double luma = luminance601(c);
  if (!(luma >= 0.25 && luma <= 0.9)) {
    throw ConfigInvalid("skin color luminance " + std::to_string(luma) +
                        " outside plausible fingertip range [0.25, 0.9]");
  }
}

struct SkinPalette {
  std::vector<SkinColor> entries;
};

inline void validate(const SkinPalette& palette) {
  if (palette.entries.empty()) {
    throw ConfigInvalid("skin palette is empty");
  }
  for (const SkinColor& c : palette.entries) validate(c);
  for (std::size_t i = 0; i < palette.entries.size(); ++i) {
    for (std::size_t j = i + 1; j < palette.entries.size(); ++j) {
      const SkinColor &a = palette.entries[i], &b = palette.entries[j];
      if (a.r == b.r && a.g == b.g && a.b == b.b) {
        throw ConfigInvalid("duplicate palette entries at " +
                            std::to_string(i) + " and " + std::to_string(j));
      }
    }
  }
}

/// Built-in 25-tone palette spanning light to deep fingertip tones.
/// Mirrored by data/default_palette.txt; values are repo data.
inline SkinPalette default_skin_palette() {
  static constexpr double kTable[25][3] = {
      {0.956, 0.839, 0.788}, {0.945, 0.806, 0.745}, {0.933, 0.784, 0.702},
      {0.918, 0.761, 0.667}, {0.902, 0.733, 0.635}, {0.886, 0.706, 0.604},
      {0.871, 0.682, 0.573}, {0.855, 0.655, 0.541}, {0.835, 0.627, 0.510},
      {0.816, 0.600, 0.478}, {0.792, 0.573, 0.447}, {0.769, 0.545, 0.420},
      {0.745, 0.518, 0.396}, {0.722, 0.494, 0.373}, {0.698, 0.467, 0.349},
      {0.671, 0.439, 0.325}, {0.643, 0.412, 0.302}, {0.616, 0.384, 0.278},
      {0.588, 0.357, 0.259}, {0.557, 0.333, 0.243}, {0.533, 0.310, 0.227},
      {0.510, 0.290, 0.212}, {0.486, 0.271, 0.200}, {0.459, 0.251, 0.184},
      {0.431, 0.231, 0.169}};
  SkinPalette p;
  p.entries.reserve(25);
  for (const auto& row : kTable) {
    p.entries.push_back({row[0], row[1], row[2]});
  }
  return p;
}

/// Plain-text palette: one color per line as three floats in [0,1],
/// `#` starts a comment, blank lines ignored.
inline SkinPalette load_palette(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFound("palette file: " + path);
  SkinPalette palette;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    SkinColor c;
    if (!(ls >> c.r)) continue;  // blank or comment-only line
    std::string extra;
    if (!(ls >> c.g >> c.b) || (ls >> extra)) {
      throw DecodeError("palette line " + std::to_string(line_no) +
                        ": expected exactly three floats");
    }
    try {
      validate(c);
    } catch (const Error& e) {
      throw DecodeError("palette line " + std::to_string(line_no) + ": " +
                        e.what());
    }
    palette.entries.push_back(c);
  }
  try {
    validate(palette);
  } catch (const Error& e) {
    throw DecodeError(std::string("palette file ") + path + ": " + e.what());
  }
  return palette;
}

/// Uniform identity-persistent palette draw.
inline SkinColor sample_skin_color(RandomStream& rng,
                                   const SkinPalette& palette) {
  validate(palette);
  const std::uint64_t n = palette.entries.size();
  return palette.entries[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(n) - 1))];
}

/// Smooth blob field marking low-contrast regions (1 = blob core).
struct BlobMask {
  GrayImage weights;
  int blob_count = 0;
  std::pair<double, double> blob_radius_range{0.0, 0.0};

  int width() const { return weights.width; }
  int height() const { return weights.height; }
};

/// Draws count ~ uniform(count_range) blob centers uniformly inside the
/// support eroded by the blob radius, so every blob lies fully inside the
/// shape mask. Deterministic in the rng stream state.
inline BlobMask build_low_contrast_mask(
    const ShapeMask& shape, RandomStream& rng,
    std::pair<int, int> count_range, std::pair<double, double> radius_range) {
  if (count_range.first < 0 || count_range.second < count_range.first) {
    throw ConfigInvalid("blob count range must be 0 <= min <= max");
  }
  if (radius_range.first <= 0 || radius_range.second < radius_range.first) {
    throw ConfigInvalid("blob radius range must be 0 < min <= max");
  }
  BlobMask mask{GrayImage(shape.width(), shape.height()), 0, radius_range};
  const int count = static_cast<int>(
      rng.uniform_int(count_range.first, count_range.second));
  mask.blob_count = count;
  if (count == 0) return mask;

  if (shape.support_count() == 0) {
    throw EmptySupport("shape mask has no support for low-contrast blobs");
  }
  const GrayImage dist = distance_to_mask_edge(shape);
  const int w = shape.width(), h = shape.height();
  for (int i = 0; i < count; ++i) {
    const double radius = rng.uniform(radius_range.first, radius_range.second);
    int cx = -1, cy = -1;
    for (int attempt = 0; attempt < 5000; ++attempt) {
      const int x = static_cast<int>(rng.uniform_int(0, w - 1));
      const int y = static_cast<int>(rng.uniform_int(0, h - 1));
      if (dist.at(x, y) >= radius + 1.0) {
        cx = x;
        cy = y;
        break;
      }
    }
    if (cx < 0) {
      throw EmptySupport("no admissible center for a blob of radius " +
                         std::to_string(radius));
    }
    const int r_ceil = static_cast<int>(std::ceil(radius));
    for (int y = std::max(0, cy - r_ceil); y <= std::min(h - 1, cy + r_ceil);
         ++y) {
      for (int x = std::max(0, cx - r_ceil); x <= std::min(w - 1, cx + r_ceil);
           ++x) {
        const double d = std::hypot(x - cx, y - cy);
        const double t = std::clamp(1.0 - d / radius, 0.0, 1.0);
        const float bump = static_cast<float>(t * t * (3.0 - 2.0 * t));
        mask.weights.at(x, y) = std::max(mask.weights.at(x, y), bump);
      }
    }
  }
  return mask;
}

/// Convex blend of an identity-stable and a session-random blob mask;
/// alpha 0 returns the first argument exactly, 1 the second.
inline BlobMask blend_blob_masks(const BlobMask& identity_mask,
                                 const BlobMask& session_mask, double alpha) {
  if (!identity_mask.weights.same_dims(session_mask.weights)) {
    throw DimensionMismatch("blob mask dims differ");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ConfigInvalid("alteration factor outside [0,1]");
  }
  if (alpha == 0.0) return identity_mask;
  if (alpha == 1.0) return session_mask;
  BlobMask out{GrayImage(identity_mask.width(), identity_mask.height()),
               identity_mask.blob_count + session_mask.blob_count,
               {std::min(identity_mask.blob_radius_range.first,
                         session_mask.blob_radius_range.first),
                std::max(identity_mask.blob_radius_range.second,
                         session_mask.blob_radius_range.second)}};
  const float a = static_cast<float>(alpha);
  for (std::size_t i = 0; i < out.weights.data.size(); ++i) {
    out.weights.data[i] = (1.0f - a) * identity_mask.weights.data[i] +
                          a * session_mask.weights.data[i];
  }
  return out;
}

/// Blend toward a Gaussian-blurred copy, weighted by strength x mask.
/// Zero strength or an empty mask returns the input bit-exactly.
template <int C>
inline Image<C> apply_low_contrast(const Image<C>& img, const BlobMask& mask,
                                   double strength, double sigma = 4.0) {
  if (!img.same_dims(mask.weights)) {
    throw DimensionMismatch("low-contrast mask dims differ from image");
  }
  if (!(strength >= 0.0 && strength <= 1.0)) {
    throw ConfigInvalid("low-contrast strength outside [0,1]");
  }
  if (strength == 0.0) return img;
  bool any = false;
  for (float v : mask.weights.data) {
    if (v > 0.0f) {
      any = true;
      break;
    }
  }
  if (!any) return img;

  const Image<C> blurred = blur_gaussian(img, sigma);
  Image<C> out = img;
  const float s = static_cast<float>(strength);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const float t = s * mask.weights.at(x, y);
      if (t <= 0.0f) continue;
      for (int c = 0; c < C; ++c) {
        const float a = img.at(x, y, c);
        out.at(x, y, c) = a + t * (blurred.at(x, y, c) - a);
      }
    }
  }
  return out;
}

struct ColorizeResult {
  ColorImage image;
  RidgeChannel ridge;  // the input ridge intensities, carried bit-exactly
};

/// Render the ridge pattern in skin color: valleys take the skin color,
/// ridges the color darkened multiplicatively by ridge_depth, pixels
/// outside the mask support go to black (background flag).
inline ColorizeResult colorize(const RidgeMap& ridge, const ShapeMask& shape,
                               const SkinColor& color, double ridge_depth) {
  if (!ridge.image.same_dims(shape.weights)) {
    throw DimensionMismatch("colorize mask dims differ from ridge map");
  }
  if (!(ridge_depth >= 0.0 && ridge_depth <= 1.0)) {
    throw ConfigInvalid("ridge_depth outside [0,1]");
  }
  validate(color);
  ColorizeResult result{ColorImage(ridge.width(), ridge.height()),
                        RidgeChannel{ridge.image}};
  const float cr = static_cast<float>(color.r);
  const float cg = static_cast<float>(color.g);
  const float cb = static_cast<float>(color.b);
  const float depth = static_cast<float>(ridge_depth);
  for (std::size_t i = 0; i < ridge.image.data.size(); ++i) {
    const float w = shape.weights.data[i];
    if (w <= 0.0f) continue;
    const float ridgeness = 1.0f - ridge.image.data[i];
    const float factor = w * (1.0f - depth * ridgeness);
    result.image.data[3 * i + 0] = cr * factor;
    result.image.data[3 * i + 1] = cg * factor;
    result.image.data[3 * i + 2] = cb * factor;
  }
  return result;
}

inline constexpr double kMaxToneAmplitude = 0.3;
inline constexpr double kMinToneScale = 8.0;

/// Adds a band-limited random field per channel (correlation length =
/// scale), weighted by the shape mask and clamped to [0,1]. The field is
/// zero-mean and normalized so its absolute peak equals the amplitude.
inline ColorImage apply_tone_variation(const ColorImage& img,
                                       const ShapeMask& shape,
                                       RandomStream& rng, double amplitude,
                                       double scale) {
  if (!img.same_dims(shape.weights)) {
    throw DimensionMismatch("tone variation mask dims differ from image");
  }
  if (!(amplitude >= 0.0 && amplitude <= kMaxToneAmplitude)) {
    throw AmplitudeTooLarge("tone amplitude " + std::to_string(amplitude) +
                            " outside [0, " +
                            std::to_string(kMaxToneAmplitude) + "]");
  }
  if (scale < kMinToneScale) {
    throw ConfigInvalid("tone variation scale below " +
                        std::to_string(kMinToneScale) + " px");
  }
  if (amplitude == 0.0) return img;

  const std::uint64_t field_key = rng.next_u64();
  ColorImage out = img;
  GrayImage field(img.width, img.height);
  const std::size_t n = field.data.size();
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      field.data[i] = static_cast<float>(
          uniform_at(field_key, i, static_cast<std::uint64_t>(c)) * 2.0 - 1.0);
    }
    field = blur_gaussian(field, scale / 2.0);
    double mean = 0.0;
    for (float v : field.data) mean += v;
    mean /= static_cast<double>(n);
    float peak = 0.0f;
    for (float& v : field.data) {
      v = static_cast<float>(v - mean);
      peak = std::max(peak, std::abs(v));
    }
    if (peak <= 0.0f) continue;
    const float gain = static_cast<float>(amplitude) / peak;
    for (std::size_t i = 0; i < n; ++i) {
      const float delta = gain * field.data[i] * shape.weights.data[i];
      out.data[3 * i + c] =
          std::clamp(img.data[3 * i + c] + delta, 0.0f, 1.0f);
    }
  }
  return out;
}

}  // namespace colfin
