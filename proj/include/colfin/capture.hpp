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
#include <limits>
#include <vector>

#include "colfin/error.hpp"
#include "colfin/image.hpp"

namespace colfin {

/// Capture-process appearance parameters.
struct CaptureParams {
  int erosion_radius = 1;        // ridge thinning, px
  double global_sigma = 0.9;     // full-frame Gaussian, px
  double border_sigma_max = 2.5; // blur at the mask edge, px
  double border_onset = 0.35;    // normalized interior distance where blending starts
};

inline void validate(const CaptureParams& p) {
  if (p.erosion_radius < 0 || p.global_sigma < 0 || p.border_sigma_max < 0 ||
      p.border_onset < 0 || p.border_onset > 1) {
    throw ConfigInvalid("capture parameters out of range");
  }
}

/// Grayscale dilation with a disc structuring element (max filter). Border
/// handling takes the max over in-bounds taps only.
inline GrayImage dilate_disc(const GrayImage& img, int radius) {
  if (radius <= 0) return img;
  // disc offsets gathered once
  std::vector<std::pair<int, int>> offsets;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy <= radius * radius) offsets.emplace_back(dx, dy);
    }
  }
  GrayImage out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      float m = -std::numeric_limits<float>::infinity();
      for (const auto& [dx, dy] : offsets) {
        const int sx = x + dx, sy = y + dy;
        if (sx < 0 || sx >= img.width || sy < 0 || sy >= img.height) continue;
        m = std::max(m, img.at(sx, sy));
      }
      out.at(x, y) = m;
    }
  }
  return out;
}

/// Thin dark ridges by brightening: grayscale dilation of intensity with a
/// disc of the given radius. radius = 0 is the identity.
inline RidgeMap thin_ridges(const RidgeMap& rm, int radius) {
  if (radius < 0) throw ConfigInvalid("erosion radius must be >= 0");
  return RidgeMap{dilate_disc(rm.image, radius), rm.nominal_resolution};
}

namespace detail {

/// Symmetric normalized Gaussian taps, truncated at 3 sigma.
inline std::vector<double> gaussian_kernel(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[i + radius] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

}  // namespace detail

/// Separable Gaussian blur, kernel truncated at 3 sigma, clamp-to-edge.
/// sigma = 0 returns the input unchanged.
template <int C>
inline Image<C> blur_gaussian(const Image<C>& img, double sigma) {
  if (sigma < 0) throw ConfigInvalid("blur sigma must be >= 0");
  if (sigma == 0.0) return img;
  const std::vector<double> k = detail::gaussian_kernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);

  Image<C> tmp(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < C; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          acc += k[i + radius] * img.at_clamped(x + i, y, c);
        }
        tmp.at(x, y, c) = static_cast<float>(acc);
      }
    }
  }
  Image<C> out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < C; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          acc += k[i + radius] * tmp.at_clamped(x, y + i, c);
        }
        out.at(x, y, c) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

inline RidgeMap blur_gaussian(const RidgeMap& rm, double sigma) {
  return RidgeMap{blur_gaussian(rm.image, sigma), rm.nominal_resolution};
}

namespace detail {

/// 1D squared-distance transform (lower envelope of parabolas).
inline void edt_1d(const std::vector<double>& f, std::vector<double>* out) {
  const int n = static_cast<int>(f.size());
  std::vector<int> v(n);
  std::vector<double> z(n + 1);
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double s;
    while (true) {
      const int p = v[k];
      s = ((f[q] + q * q) - (f[p] + p * p)) / (2.0 * q - 2.0 * p);
      if (s <= z[k]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const int p = v[k];
    (*out)[q] = (q - p) * (q - p) + f[p];
  }
}

}  // namespace detail

/// Exact Euclidean distance (px) from each support pixel to the nearest
/// zero-weight pixel. Pixels outside the support get 0. Canvas borders
/// count as outside.
inline GrayImage distance_to_mask_edge(const ShapeMask& mask) {
  const int w = mask.width(), h = mask.height();
  const double inf = 1e18;
  std::vector<double> g(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = mask.weights.data[i] > 0.0f ? inf : 0.0;
  }
  // column pass
  {
    std::vector<double> f(h), d(h);
    for (int x = 0; x < w; ++x) {
      for (int y = 0; y < h; ++y) f[y] = g[static_cast<std::size_t>(y) * w + x];
      detail::edt_1d(f, &d);
      for (int y = 0; y < h; ++y) g[static_cast<std::size_t>(y) * w + x] = d[y];
    }
  }
  // row pass
  GrayImage out(w, h);
  {
    std::vector<double> f(w), d(w);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) f[x] = g[static_cast<std::size_t>(y) * w + x];
      detail::edt_1d(f, &d);
      for (int x = 0; x < w; ++x) {
        // distance to the border of the canvas also terminates the support
        const double border =
            1.0 + std::min(std::min(x, w - 1 - x), std::min(y, h - 1 - y));
        out.at(x, y) =
            static_cast<float>(std::min(std::sqrt(d[x]), border));
      }
    }
  }
  return out;
}

/// Depth-of-field border blur: blend toward blur_gaussian(img, border_sigma_max)
/// with weight 1 at the mask edge falling linearly to 0 at border_onset
/// (normalized interior distance). Interior past the onset stays bit-identical.
template <int C>
inline Image<C> blur_border(const Image<C>& img, const ShapeMask& shape,
                            const CaptureParams& params) {
  if (img.width != shape.width() || img.height != shape.height()) {
    throw DimensionMismatch("blur_border mask dims differ from image");
  }
  validate(params);
  if (params.border_sigma_max == 0.0 || params.border_onset == 0.0) return img;

  const GrayImage dist = distance_to_mask_edge(shape);
  float max_dist = 0.0f;
  for (float v : dist.data) max_dist = std::max(max_dist, v);
  if (max_dist <= 0.0f) return img;

  const Image<C> blurred = blur_gaussian(img, params.border_sigma_max);
  Image<C> out = img;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (shape.weights.at(x, y) <= 0.0f) continue;
      const float dn = dist.at(x, y) / max_dist;
      if (dn >= params.border_onset) continue;  // untouched interior
      const float t =
          1.0f - dn / static_cast<float>(params.border_onset);  // 1 at edge
      for (int c = 0; c < C; ++c) {
        const float a = img.at(x, y, c);
        out.at(x, y, c) = a + t * (blurred.at(x, y, c) - a);
      }
    }
  }
  return out;
}

inline RidgeMap blur_border(const RidgeMap& rm, const ShapeMask& shape,
                            const CaptureParams& params) {
  return RidgeMap{blur_border(rm.image, shape, params), rm.nominal_resolution};
}

}  // namespace colfin
