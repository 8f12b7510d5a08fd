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
#include <string>
#include <utility>
#include <vector>

#include "colfin/capture.hpp"
#include "colfin/error.hpp"
#include "colfin/image.hpp"
#include "colfin/rng.hpp"

namespace colfin {

/// Single-light-source shading: 1 = fully lit, 0 = fully shadowed.
/// Weights never increase along -light_direction (away from the light).
struct ShadowMask {
  GrayImage weights;
  double light_x = 1.0;  // unit vector pointing toward the light
  double light_y = 0.0;

  int width() const { return weights.width; }
  int height() const { return weights.height; }
};

struct IlluminationLevel {
  double value = 1.0;  // 0 = darkest scene, 1 = brightest
};

inline void validate(const IlluminationLevel& level) {
  if (!(level.value >= 0.0 && level.value <= 1.0)) {
    throw ConfigInvalid("illumination level outside [0,1]");
  }
}

struct DirtParams {
  std::pair<int, int> particle_count_range{0, 0};
  std::pair<double, double> particle_radius_range{1.0, 3.0};
  double darkness = 0.6;
};

inline void validate(const DirtParams& p) {
  if (p.particle_count_range.first < 0 ||
      p.particle_count_range.second < p.particle_count_range.first) {
    throw ConfigInvalid("dirt count range must be 0 <= min <= max");
  }
  if (p.particle_radius_range.first <= 0 ||
      p.particle_radius_range.second < p.particle_radius_range.first) {
    throw ConfigInvalid("dirt radius range must be 0 < min <= max");
  }
  if (!(p.darkness >= 0.0 && p.darkness <= 1.0)) {
    throw ConfigInvalid("dirt darkness outside [0,1]");
  }
}

inline constexpr double kMaxHueShift = 0.1;
inline constexpr double kMinToneGain = 0.7;
inline constexpr double kMaxToneGain = 1.3;

/// One global per-channel gain plus a small hue rotation about the gray
/// axis, drawn once from the session stream and applied uniformly.
/// Linear, so background black stays black; clamped to [0,1].
inline ColorImage apply_global_tone(const ColorImage& img, RandomStream& rng,
                                    double hue_shift_max,
                                    std::pair<double, double> gain_range) {
  if (!(hue_shift_max >= 0.0 && hue_shift_max <= kMaxHueShift)) {
    throw ConfigInvalid("hue shift bound outside [0, 0.1]");
  }
  if (!(gain_range.first >= kMinToneGain &&
        gain_range.second <= kMaxToneGain &&
        gain_range.first <= gain_range.second)) {
    throw ConfigInvalid("tone gain range outside [0.7, 1.3]");
  }
  // fixed draw order: r, g, b gains, then the hue angle
  const float gr = static_cast<float>(
      rng.uniform(gain_range.first, gain_range.second));
  const float gg = static_cast<float>(
      rng.uniform(gain_range.first, gain_range.second));
  const float gb = static_cast<float>(
      rng.uniform(gain_range.first, gain_range.second));
  const double hue_frac = rng.uniform(-hue_shift_max, hue_shift_max);
  const double angle = hue_frac * 2.0 * 3.14159265358979323846;
  const float c = static_cast<float>(std::cos(angle));
  const float s = static_cast<float>(std::sin(angle));
  const float k = 0.57735026918962576f;  // 1/sqrt(3), gray-axis direction

  ColorImage out(img.width, img.height);
  for (std::size_t i = 0; i < out.data.size(); i += 3) {
    const float r = gr * img.data[i + 0];
    const float g = gg * img.data[i + 1];
    const float b = gb * img.data[i + 2];
    // Rodrigues rotation about the unit gray axis (k,k,k)
    const float dot = k * (r + g + b);
    const float omc = (1.0f - c) * dot * k;
    out.data[i + 0] = std::clamp(c * r + s * k * (b - g) + omc, 0.0f, 1.0f);
    out.data[i + 1] = std::clamp(c * g + s * k * (r - b) + omc, 0.0f, 1.0f);
    out.data[i + 2] = std::clamp(c * b + s * k * (g - r) + omc, 0.0f, 1.0f);
  }
  return out;
}

/// weight(p) = 1 - depth * u(p)^2 with u rising linearly from the lit
/// extreme of the support to the opposite edge along -light_direction.
inline ShadowMask build_shadow_mask(const ShapeMask& shape, double light_x,
                                    double light_y, double depth) {
  const double norm = std::hypot(light_x, light_y);
  if (std::abs(norm - 1.0) > 1e-6) {
    throw ConfigInvalid("light direction must be a unit vector");
  }
  if (!(depth >= 0.0 && depth <= 1.0)) {
    throw ConfigInvalid("shadow depth outside [0,1]");
  }
  double cx = 0.0, cy = 0.0;
  shape.centroid(&cx, &cy);
  double extent = 0.0;
  for (int y = 0; y < shape.height(); ++y) {
    for (int x = 0; x < shape.width(); ++x) {
      if (shape.weights.at(x, y) <= 0.0f) continue;
      const double proj = (x - cx) * light_x + (y - cy) * light_y;
      extent = std::max(extent, std::abs(proj));
    }
  }
  if (extent <= 0.0) extent = 1.0;

  ShadowMask mask{GrayImage(shape.width(), shape.height()), light_x, light_y};
  for (int y = 0; y < shape.height(); ++y) {
    for (int x = 0; x < shape.width(); ++x) {
      const double proj = (x - cx) * light_x + (y - cy) * light_y;
      const double u = std::clamp(0.5 * (1.0 - proj / extent), 0.0, 1.0);
      mask.weights.at(x, y) = static_cast<float>(1.0 - depth * u * u);
    }
  }
  return mask;
}

/// Multiplicative darkening: out = img * (1 - strength * (1 - weight)).
inline ColorImage apply_shadow(const ColorImage& img, const ShadowMask& shadow,
                               double strength) {
  if (!img.same_dims(shadow.weights)) {
    throw DimensionMismatch("shadow mask dims differ from image");
  }
  if (!(strength >= 0.0 && strength <= 1.0)) {
    throw ConfigInvalid("shadow strength outside [0,1]");
  }
  ColorImage out(img.width, img.height);
  const float s = static_cast<float>(strength);
  for (std::size_t i = 0; i < shadow.weights.data.size(); ++i) {
    const float factor = 1.0f - s * (1.0f - shadow.weights.data[i]);
    out.data[3 * i + 0] = img.data[3 * i + 0] * factor;
    out.data[3 * i + 1] = img.data[3 * i + 1] * factor;
    out.data[3 * i + 2] = img.data[3 * i + 2] * factor;
  }
  return out;
}

namespace detail {

inline float percentile(std::vector<float> values, double q) {
  if (values.empty()) return 0.0f;
  const std::size_t idx = static_cast<std::size_t>(
      q * static_cast<double>(values.size() - 1) + 0.5);
  std::nth_element(values.begin(), values.begin() + idx, values.end());
  return values[idx];
}

}  // namespace detail

inline constexpr double kDefaultLitThreshold = 0.55;
inline constexpr double kDefaultInversionBand = 8.0;

/// Illumination-dependent ridge polarity: ridges brighten where the shadow
/// weight exceeds lit_threshold and darken elsewhere, with a smooth sign
/// transition over `band` pixels. Modulation amplitude is
/// inversion_strength x the percentile span (P95 - P5) of the carried
/// ridge channel.
inline ColorImage apply_ridge_inversion(
    const ColorImage& img, const RidgeChannel& ridge_channel,
    const ShadowMask& shadow, double inversion_strength,
    double lit_threshold = kDefaultLitThreshold,
    double band = kDefaultInversionBand) {
  if (!img.same_dims(ridge_channel.values) ||
      !img.same_dims(shadow.weights)) {
    throw DimensionMismatch("ridge inversion input dims differ");
  }
  if (!(inversion_strength >= 0.0 && inversion_strength <= 1.0)) {
    throw ConfigInvalid("inversion strength outside [0,1]");
  }
  if (!(lit_threshold >= 0.0 && lit_threshold <= 1.0)) {
    throw ConfigInvalid("lit threshold outside [0,1]");
  }
  if (band < 0.0) throw ConfigInvalid("inversion band must be >= 0");
  if (inversion_strength == 0.0) return img;

  const float contrast = detail::percentile(ridge_channel.values.data, 0.95) -
                         detail::percentile(ridge_channel.values.data, 0.05);
  GrayImage lit(img.width, img.height);
  const float thresh = static_cast<float>(lit_threshold);
  for (std::size_t i = 0; i < lit.data.size(); ++i) {
    lit.data[i] = shadow.weights.data[i] > thresh ? 1.0f : 0.0f;
  }
  if (band > 0.0) lit = blur_gaussian(lit, band / 2.0);

  ColorImage out(img.width, img.height);
  const float amp = static_cast<float>(inversion_strength) * contrast;
  for (std::size_t i = 0; i < lit.data.size(); ++i) {
    const float sign = 2.0f * lit.data[i] - 1.0f;
    const float ridgeness = 1.0f - ridge_channel.values.data[i];
    const float factor = 1.0f + sign * amp * ridgeness;
    for (int c = 0; c < 3; ++c) {
      out.data[3 * i + c] =
          std::clamp(img.data[3 * i + c] * factor, 0.0f, 1.0f);
    }
  }
  return out;
}

/// Additive zero-mean Gaussian noise with sigma = sigma_at_dark *
/// (1 - illumination), drawn per (pixel, channel) from a counter-based
/// stream so the result is independent of evaluation order.
inline ColorImage apply_camera_noise(const ColorImage& img, RandomStream& rng,
                                     const IlluminationLevel& illumination,
                                     double sigma_at_dark) {
  validate(illumination);
  if (sigma_at_dark < 0.0) {
    throw ConfigInvalid("noise sigma must be >= 0");
  }
  const double sigma = sigma_at_dark * (1.0 - illumination.value);
  if (sigma == 0.0) return img;
  const std::uint64_t key = rng.next_u64();
  ColorImage out(img.width, img.height);
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      const float noise = static_cast<float>(
          sigma * gaussian_at(key, i, static_cast<std::uint64_t>(c)));
      out.data[3 * i + c] = std::clamp(img.data[3 * i + c] + noise, 0.0f, 1.0f);
    }
  }
  return out;
}

/// Stamps small dark soft discs at positions drawn uniformly over the mask
/// support; multiplicative darkening so no channel ever increases.
inline ColorImage apply_dirt(const ColorImage& img, const ShapeMask& shape,
                             RandomStream& rng, const DirtParams& params) {
  if (!img.same_dims(shape.weights)) {
    throw DimensionMismatch("dirt mask dims differ from image");
  }
  validate(params);
  const int count = static_cast<int>(rng.uniform_int(
      params.particle_count_range.first, params.particle_count_range.second));
  if (count == 0) return img;
  if (shape.support_count() == 0) {
    throw EmptySupport("shape mask has no support for dirt particles");
  }

  ColorImage out = img;
  const int w = img.width, h = img.height;
  const float darkness = static_cast<float>(params.darkness);
  for (int i = 0; i < count; ++i) {
    const double radius = rng.uniform(params.particle_radius_range.first,
                                      params.particle_radius_range.second);
    int cx = -1, cy = -1;
    for (int attempt = 0; attempt < 5000; ++attempt) {
      const int x = static_cast<int>(rng.uniform_int(0, w - 1));
      const int y = static_cast<int>(rng.uniform_int(0, h - 1));
      if (shape.weights.at(x, y) > 0.0f) {
        cx = x;
        cy = y;
        break;
      }
    }
    if (cx < 0) {
      throw EmptySupport("no admissible dirt particle position");
    }
    const int r_ceil = static_cast<int>(std::ceil(radius));
    for (int y = std::max(0, cy - r_ceil); y <= std::min(h - 1, cy + r_ceil);
         ++y) {
      for (int x = std::max(0, cx - r_ceil); x <= std::min(w - 1, cx + r_ceil);
           ++x) {
        const double d = std::hypot(x - cx, y - cy);
        const double t = std::clamp(1.0 - d / radius, 0.0, 1.0);
        const float bump = static_cast<float>(t * t * (3.0 - 2.0 * t));
        const float factor = 1.0f - darkness * bump;
        for (int c = 0; c < 3; ++c) {
          out.at(x, y, c) *= factor;
        }
      }
    }
  }
  return out;
}

}  // namespace colfin
