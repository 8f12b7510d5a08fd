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
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "colfin/capture.hpp"
#include "colfin/error.hpp"
#include "colfin/fft.hpp"
#include "colfin/image.hpp"
#include "colfin/io.hpp"
#include "colfin/rng.hpp"

namespace colfin {

/// Core/delta positions in normalized [0,1]^2 coordinates.
struct SingularityLayout {
  std::vector<std::pair<double, double>> cores;
  std::vector<std::pair<double, double>> deltas;
};

inline constexpr double kMinSingularitySeparation = 0.05;

inline void validate(const SingularityLayout& layout) {
  if (layout.cores.size() > 2 || layout.deltas.size() > 2) {
    throw InvalidLayout("at most two cores and two deltas");
  }
  std::vector<std::pair<double, double>> all = layout.cores;
  all.insert(all.end(), layout.deltas.begin(), layout.deltas.end());
  for (const auto& [x, y] : all) {
    if (!(x >= 0 && x <= 1 && y >= 0 && y <= 1)) {
      throw InvalidLayout("singularity outside the unit square");
    }
  }
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      const double d = std::hypot(all[i].first - all[j].first,
                                  all[i].second - all[j].second);
      if (d < kMinSingularitySeparation) {
        throw InvalidLayout("singularities closer than " +
                            std::to_string(kMinSingularitySeparation));
      }
    }
  }
}

/// Ridge flow direction (radians, defined mod pi) at a pixel position.
/// Singularity flow model: each core adds +1/2 winding, each delta -1/2,
/// on top of a gentle arch-shaped background field.
inline double ridge_orientation(const SingularityLayout& layout, double px,
                                double py, int width, int height) {
  const double nx = px / std::max(1, width - 1);
  const double ny = py / std::max(1, height - 1);
  // arch background: horizontal flow tilting through the mid zone
  const double bump = std::exp(-std::pow((ny - 0.45) / 0.30, 2.0));
  double theta = 0.9 * (nx - 0.5) * bump;
  for (const auto& [cx, cy] : layout.cores) {
    theta += 0.5 * std::atan2(py - cy * (height - 1), px - cx * (width - 1));
  }
  for (const auto& [dx, dy] : layout.deltas) {
    theta -= 0.5 * std::atan2(py - dy * (height - 1), px - dx * (width - 1));
  }
  return theta;
}

/// Parameters of the procedural ridge-pattern generator.
struct RidgeParams {
  int width = 416;
  int height = 560;
  double frequency = 1.0 / 9.0;  // cycles per pixel, valid in [1/12, 1/6]
  int iteration_cap = 60;
  int seed_points = 24;
  double frequency_jitter = 0.06;   // relative density-map variation
  double mask_margin = 8.0;
  double mask_edge_softness = 24.0;
  int orientation_bins = 16;
  int frequency_bins = 3;
  double filter_gain = 3.0;
  double coverage_target = 0.995;
};

inline constexpr double kMinRidgeFrequency = 1.0 / 12.0;
inline constexpr double kMaxRidgeFrequency = 1.0 / 6.0;

/// Rounded fingertip silhouette (semicircular top, straight sides, flat
/// bottom) inset by `margin`, with a smoothstep edge falloff of width
/// `edge_softness`. Geometry depends only on the canvas size.
inline ShapeMask compute_shape_mask_dims(int width, int height, double margin,
                                         double edge_softness) {
  if (margin < 0 || edge_softness < 1) {
    throw ConfigInvalid("margin must be >= 0 and edge_softness >= 1");
  }
  constexpr double kWidthFraction = 0.78;  // finger width / usable canvas width
  const double cx = 0.5 * (width - 1);
  const double radius = (0.5 * width - margin - edge_softness) * kWidthFraction;
  const double y_top = margin + edge_softness + radius;
  const double y_bot = height - 1 - margin - edge_softness;
  if (radius <= 1.0 || y_bot - y_top <= 1.0) {
    throw MarginTooLarge("mask support would be empty at margin " +
                         std::to_string(margin));
  }

  ShapeMask mask{GrayImage(width, height)};
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      // distance to the vertical spine segment, capped by the flat bottom
      const double dy_spine = y < y_top ? y_top - y : 0.0;
      const double d_spine = std::hypot(x - cx, dy_spine);
      const double interior = std::min(radius - d_spine, y_bot - y);
      if (interior <= 0) continue;
      const double t = std::min(1.0, interior / edge_softness);
      mask.weights.at(x, y) = static_cast<float>(t * t * (3.0 - 2.0 * t));
    }
  }
  return mask;
}

inline ShapeMask compute_shape_mask(const RidgeMap& ridge, double margin,
                                    double edge_softness) {
  return compute_shape_mask_dims(ridge.width(), ridge.height(), margin,
                                 edge_softness);
}

/// Load a ridge pattern from a PNG or PNM file. RGB inputs collapse by
/// channel average; resolution metadata is honored when present, else the
/// nominal 500 dpi.
inline RidgeMap load_ridge_pattern(const std::string& path) {
  const LoadedImage raw = load_image(path);
  RidgeMap rm;
  rm.image = to_gray(raw);
  rm.nominal_resolution = raw.dpi > 0 ? raw.dpi : 500.0;
  validate(rm);
  return rm;
}

namespace detail {

struct BinEntry {
  int pixel;
  float weight;
};

/// Frequency-domain transfer of an even oriented Gabor: two Gaussians at
/// +-f along the ridge-normal direction, with zero DC.
inline void fill_gabor_transfer(std::vector<float>* transfer, int width,
                                int height, double theta, double freq) {
  const int spec_w = width / 2 + 1;
  const double phi = theta + 1.5707963267948966;  // ridge-normal direction
  const double ux = std::cos(phi), uy = std::sin(phi);
  const double sigma_across = 0.5 / freq;
  const double sigma_along = 0.85 / freq;
  const double ca = 2.0 * 9.869604401089358 * sigma_across * sigma_across;
  const double cb = 2.0 * 9.869604401089358 * sigma_along * sigma_along;
  transfer->assign(static_cast<std::size_t>(spec_w) * height, 0.0f);
  for (int ky = 0; ky < height; ++ky) {
    const double ny = (ky <= height / 2 ? ky : ky - height) /
                      static_cast<double>(height);
    for (int kx = 0; kx < spec_w; ++kx) {
      const double nx = kx / static_cast<double>(width);
      const double vu = nx * ux + ny * uy;
      const double vt = -nx * uy + ny * ux;
      const double e1 = std::exp(-(ca * (vu - freq) * (vu - freq) + cb * vt * vt));
      const double e2 = std::exp(-(ca * (vu + freq) * (vu + freq) + cb * vt * vt));
      (*transfer)[static_cast<std::size_t>(ky) * spec_w + kx] =
          static_cast<float>(e1 + e2);
    }
  }
  (*transfer)[0] = 0.0f;  // band-pass: no DC gain
}

}  // namespace detail

/// Procedural ridge pattern: orientation field from the singularity layout,
/// a smooth density map around params.frequency, sparse seeded points grown
/// by iterative oriented band-pass filtering, then a soft threshold to a
/// near-binary pattern. Deterministic in (seed, layout, params).
inline RidgeMap generate_ridge_pattern(std::uint64_t seed,
                                       const SingularityLayout& layout,
                                       const RidgeParams& params) {
  validate(layout);
  if (!(params.frequency >= kMinRidgeFrequency &&
        params.frequency <= kMaxRidgeFrequency)) {
    throw ConfigInvalid("ridge frequency outside [1/12, 1/6] cycles/px");
  }
  const int w = params.width, h = params.height;
  if (w < kMinRidgeMapSide || h < kMinRidgeMapSide) {
    throw TooSmall("ridge canvas below minimum");
  }
  const std::size_t n = static_cast<std::size_t>(w) * h;

  const ShapeMask silhouette =
      compute_shape_mask_dims(w, h, params.mask_margin,
                              params.mask_edge_softness);

  // density map: smooth relative jitter around the nominal frequency
  GrayImage density(w, h);
  {
    RandomStream noise = RandomStream::derive(seed, /*tag=*/0xD1, 0);
    for (std::size_t i = 0; i < n; ++i) {
      density.data[i] =
          static_cast<float>(uniform_at(noise.key, i, 0) * 2.0 - 1.0);
    }
    density = blur_gaussian(density, std::min(w, h) / 6.0);
    float peak = 0.0f;
    for (float v : density.data) peak = std::max(peak, std::abs(v));
    if (peak > 0) {
      for (float& v : density.data) v /= peak;
    }
  }

  const double f_lo = params.frequency * (1.0 - params.frequency_jitter);
  const double f_hi = params.frequency * (1.0 + params.frequency_jitter);
  const int n_orient = std::max(4, params.orientation_bins);
  const int n_freq = params.frequency_jitter > 0
                         ? std::max(1, params.frequency_bins)
                         : 1;

  // per-(orientation, frequency) bin transfers and member pixel lists
  const int n_bins = n_orient * n_freq;
  std::vector<std::vector<float>> transfers(n_bins);
  for (int o = 0; o < n_orient; ++o) {
    const double theta = 3.14159265358979323846 * o / n_orient;
    for (int fb = 0; fb < n_freq; ++fb) {
      const double freq =
          n_freq > 1 ? f_lo + (f_hi - f_lo) * fb / (n_freq - 1)
                     : params.frequency;
      detail::fill_gabor_transfer(&transfers[o * n_freq + fb], w, h, theta,
                                  freq);
    }
  }

  std::vector<std::vector<detail::BinEntry>> members(n_bins);
  std::vector<std::uint8_t> core_support(n, 0);
  std::size_t core_count = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const float mw = silhouette.weights.data[i];
      if (mw <= 0.0f) continue;
      if (mw >= 0.5f) {
        core_support[i] = 1;
        ++core_count;
      }
      double theta = ridge_orientation(layout, x, y, w, h);
      theta = std::fmod(theta, 3.14159265358979323846);
      if (theta < 0) theta += 3.14159265358979323846;
      const double oc = theta / 3.14159265358979323846 * n_orient;
      const int o0 = static_cast<int>(oc) % n_orient;
      const int o1 = (o0 + 1) % n_orient;
      const float ow = static_cast<float>(oc - std::floor(oc));

      const double f = params.frequency *
                       (1.0 + params.frequency_jitter * density.data[i]);
      int fb0 = 0, fb1 = 0;
      float fw = 0.0f;
      if (n_freq > 1) {
        const double fc =
            std::clamp((f - f_lo) / (f_hi - f_lo), 0.0, 1.0) * (n_freq - 1);
        fb0 = std::min(static_cast<int>(fc), n_freq - 2);
        fb1 = fb0 + 1;
        fw = static_cast<float>(fc - fb0);
      }
      const int pix = static_cast<int>(i);
      const auto add = [&](int o, int fb, float wgt) {
        if (wgt > 0) members[o * n_freq + fb].push_back({pix, wgt});
      };
      add(o0, fb0, (1.0f - ow) * (1.0f - fw));
      add(o1, fb0, ow * (1.0f - fw));
      if (n_freq > 1) {
        add(o0, fb1, (1.0f - ow) * fw);
        add(o1, fb1, ow * fw);
      }
    }
  }
  if (core_count == 0) {
    throw MarginTooLarge("silhouette support is empty");
  }

  // sparse seed points inside the firm support
  std::vector<float> signal(n, 0.0f);
  {
    RandomStream seeds = RandomStream::derive(seed, /*tag=*/0x5E, 0);
    int placed = 0, attempts = 0;
    while (placed < params.seed_points && attempts < 20000) {
      ++attempts;
      const int x = seeds.uniform_int(0, w - 1);
      const int y = seeds.uniform_int(0, h - 1);
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (!core_support[i]) continue;
      signal[i] = seeds.next_bool() ? 1.0f : -1.0f;
      ++placed;
    }
  }

  RealFft2D fft(w, h);
  std::vector<std::complex<float>> spectrum(fft.spectrum_size());
  std::vector<float> accum(n);
  std::vector<float> reach_max(n), reach_tmp(n);
  // Oscillation counts as established at a pixel when a strong swing sits
  // within half a ridge period; a pointwise test would flag the
  // zero-crossing band between adjacent ridges forever.
  const int reach =
      std::max(1, static_cast<int>(std::lround(0.5 / params.frequency)));
  double coverage = 0.0;
  int covered_at = -1;

  for (int iter = 0; iter < params.iteration_cap; ++iter) {
    std::copy(signal.begin(), signal.end(), fft.real());
    fft.forward();
    std::copy(fft.spectrum(), fft.spectrum() + fft.spectrum_size(),
              spectrum.begin());

    std::fill(accum.begin(), accum.end(), 0.0f);
    for (int b = 0; b < n_bins; ++b) {
      if (members[b].empty()) continue;
      const std::vector<float>& tr = transfers[b];
      std::complex<float>* sp = fft.spectrum();
      for (std::size_t i = 0; i < spectrum.size(); ++i) {
        sp[i] = spectrum[i] * tr[i];
      }
      fft.inverse();
      const float* filtered = fft.real();
      for (const detail::BinEntry& e : members[b]) {
        accum[e.pixel] += e.weight * filtered[e.pixel];
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      signal[i] = std::tanh(static_cast<float>(params.filter_gain) * accum[i]);
    }

    // separable box max of |signal| over a (2*reach+1)^2 window
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        float m = 0.0f;
        const int x0 = std::max(0, x - reach), x1 = std::min(w - 1, x + reach);
        for (int xs = x0; xs <= x1; ++xs) {
          m = std::max(m, std::abs(signal[static_cast<std::size_t>(y) * w + xs]));
        }
        reach_tmp[static_cast<std::size_t>(y) * w + x] = m;
      }
    }
    std::size_t lit = 0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        float m = 0.0f;
        const int y0 = std::max(0, y - reach), y1 = std::min(h - 1, y + reach);
        for (int ys = y0; ys <= y1; ++ys) {
          m = std::max(m, reach_tmp[static_cast<std::size_t>(ys) * w + x]);
        }
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        reach_max[i] = m;
        if (core_support[i] && m >= 0.25f) ++lit;
      }
    }
    coverage = static_cast<double>(lit) / core_count;
    if (covered_at < 0 && coverage >= params.coverage_target) covered_at = iter;
    if (covered_at >= 0 && iter >= covered_at + 2) break;  // polish passes
  }
  if (coverage < 0.99) {
    throw NonConvergence("ridge coverage " + std::to_string(coverage) +
                         " after " + std::to_string(params.iteration_cap) +
                         " iterations");
  }

  RidgeMap rm;
  rm.image = GrayImage(w, h, 1.0f);
  rm.nominal_resolution = 500.0;
  for (std::size_t i = 0; i < n; ++i) {
    const float mw = silhouette.weights.data[i];
    if (mw <= 0.0f) continue;
    const float ridge01 = 0.5f * (1.0f - std::tanh(2.5f * signal[i]));
    rm.image.data[i] = 1.0f + mw * (ridge01 - 1.0f);
  }
  return rm;
}

}  // namespace colfin
