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
#include <vector>

#include "colfin/error.hpp"
#include "colfin/image.hpp"

namespace colfin {

/// Sparse deformation primitive: anchor point, unit direction, length in
/// pixels, and the radius of its smooth influence region.
struct DeformationVector {
  double anchor_x = 0;
  double anchor_y = 0;
  double dir_x = 0;
  double dir_y = 0;
  double length = 0;
  double influence_radius = 1;
};

inline void validate(const DeformationVector& v) {
  const double norm = std::hypot(v.dir_x, v.dir_y);
  if (std::abs(norm - 1.0) > 1e-6) {
    throw InvalidLayout("deformation direction is not unit length");
  }
  if (v.length < 0 || v.influence_radius <= 0) {
    throw InvalidLayout("deformation length/radius out of range");
  }
}

/// Dense backward-mapping displacement field: the output pixel p samples
/// the input at p + displacement(p).
struct DeformationField {
  int width = 0;
  int height = 0;
  std::vector<float> dx;
  std::vector<float> dy;

  DeformationField() = default;
  DeformationField(int w, int h)
      : width(w), height(h),
        dx(static_cast<std::size_t>(w) * h, 0.0f),
        dy(static_cast<std::size_t>(w) * h, 0.0f) {}

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width + x;
  }
};

/// Fold-over bound: max displacement difference between 4-neighbors.
inline constexpr double kFieldNeighborStep = 1.5;
/// Default cap on displacement magnitude as a fraction of min(dims).
inline constexpr double kFieldCapFrac = 0.25;

/// Post-construction checks for the field invariants. Throws
/// SmoothnessViolation when the fold-over bound breaks.
inline void validate_field(const DeformationField& f,
                           double cap_frac = kFieldCapFrac) {
  const double cap = cap_frac * std::min(f.width, f.height);
  double max_mag = 0.0, max_step = 0.0;
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      const std::size_t i = f.index(x, y);
      const double mag = std::hypot(f.dx[i], f.dy[i]);
      max_mag = std::max(max_mag, mag);
      if (x + 1 < f.width) {
        const std::size_t j = f.index(x + 1, y);
        max_step = std::max<double>(
            max_step, std::hypot(f.dx[i] - f.dx[j], f.dy[i] - f.dy[j]));
      }
      if (y + 1 < f.height) {
        const std::size_t j = f.index(x, y + 1);
        max_step = std::max<double>(
            max_step, std::hypot(f.dx[i] - f.dx[j], f.dy[i] - f.dy[j]));
      }
    }
  }
  if (max_mag > cap) {
    throw SmoothnessViolation("displacement magnitude " +
                              std::to_string(max_mag) + " exceeds cap " +
                              std::to_string(cap));
  }
  if (max_step > kFieldNeighborStep) {
    throw SmoothnessViolation("neighbor displacement step " +
                              std::to_string(max_step) + " exceeds " +
                              std::to_string(kFieldNeighborStep));
  }
}

/// Rolling-axis rotation of the presented finger, in signed degrees.
struct RollingSpec {
  double angle_deg = 0.0;
};

inline constexpr double kMaxRollingDeg = 7.0;

inline void validate(const RollingSpec& roll) {
  if (std::abs(roll.angle_deg) > kMaxRollingDeg) {
    throw AngleOutOfRange("rolling angle " + std::to_string(roll.angle_deg) +
                          " exceeds " + std::to_string(kMaxRollingDeg) +
                          " degrees");
  }
}

struct ContactlessFieldParams {
  double vector_spacing = 24.0;      // contour px per deformation vector
  int min_vectors = 16;
  double top_boost = 1.8;            // top-arc length multiplier
  double base_length_frac = 0.055;   // vector length / min(dims)
  double influence_frac = 0.30;      // influence radius / min(dims)
  double contour_offset = 6.0;       // px outside the silhouette
};

namespace detail {

inline double smoothstep01(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

/// Anchors spaced at equal arc length along an elliptical contour hugging
/// the silhouette. The support bounding box plus the offset fixes the
/// contour; image size fixes the vector count, lengths, and reach.
inline std::vector<DeformationVector> contour_vectors(
    int width, int height, const ShapeMask& shape,
    const ContactlessFieldParams& p) {
  // bounding box of the support
  int min_x = width, max_x = -1, min_y = height, max_y = -1;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (shape.weights.at(x, y) > 0.0f) {
        min_x = std::min(min_x, x);
        max_x = std::max(max_x, x);
        min_y = std::min(min_y, y);
        max_y = std::max(max_y, y);
      }
    }
  }
  if (max_x < 0) {  // empty mask: fall back to the full canvas
    min_x = 0; max_x = width - 1; min_y = 0; max_y = height - 1;
  }
  const double cx = 0.5 * (min_x + max_x);
  const double cy = 0.5 * (min_y + max_y);
  const double rx = 0.5 * (max_x - min_x) + p.contour_offset;
  const double ry = 0.5 * (max_y - min_y) + p.contour_offset;

  // dense polyline -> cumulative arc length -> equal-spacing resample
  constexpr int kDense = 2048;
  constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
  std::vector<double> arc(kDense + 1, 0.0);
  double px = cx + rx, py = cy;
  for (int i = 1; i <= kDense; ++i) {
    const double phi = kTwoPi * i / kDense;
    const double qx = cx + rx * std::cos(phi);
    const double qy = cy + ry * std::sin(phi);
    arc[i] = arc[i - 1] + std::hypot(qx - px, qy - py);
    px = qx;
    py = qy;
  }
  const double perimeter = arc[kDense];

  const int count = std::max(
      p.min_vectors, static_cast<int>(std::lround(perimeter / p.vector_spacing)));

  const double base_len = p.base_length_frac * std::min(width, height);
  const double radius = p.influence_frac * std::min(width, height);

  std::vector<DeformationVector> out;
  out.reserve(count);
  int seg = 0;
  for (int i = 0; i < count; ++i) {
    const double target = perimeter * i / count;
    while (seg < kDense && arc[seg + 1] < target) ++seg;
    const double span = arc[seg + 1] - arc[seg];
    const double t = span > 0 ? (target - arc[seg]) / span : 0.0;
    const double phi = kTwoPi * (seg + t) / kDense;

    DeformationVector v;
    v.anchor_x = cx + rx * std::cos(phi);
    v.anchor_y = cy + ry * std::sin(phi);
    const double len = std::hypot(v.anchor_x - cx, v.anchor_y - cy);
    // facing inward, toward the pattern center
    v.dir_x = (cx - v.anchor_x) / len;
    v.dir_y = (cy - v.anchor_y) / len;
    // top-of-finger anchors push harder than side anchors
    const double topness = std::max(0.0, -(v.anchor_y - cy) / ry);
    v.length = base_len * (1.0 + (p.top_boost - 1.0) * topness);
    v.influence_radius = radius;
    validate(v);
    out.push_back(v);
  }
  return out;
}

}  // namespace detail

/// Splat sparse deformation vectors into a dense field. Each vector
/// contributes through a smoothstep radial falloff; overlaps resolve to a
/// softly normalized weighted mean (the +w0 term fades the field out where
/// total influence is weak instead of introducing a hard edge).
inline DeformationField splat_vectors(
    int width, int height, const std::vector<DeformationVector>& vectors,
    double strength) {
  DeformationField field(width, height);
  if (strength == 0.0 || vectors.empty()) return field;
  constexpr double kSoftWeight = 0.5;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double wsum = 0.0, vx = 0.0, vy = 0.0;
      for (const DeformationVector& v : vectors) {
        const double d = std::hypot(x - v.anchor_x, y - v.anchor_y);
        if (d >= v.influence_radius) continue;
        const double w = detail::smoothstep01(1.0 - d / v.influence_radius);
        wsum += w;
        vx += w * v.dir_x * v.length;
        vy += w * v.dir_y * v.length;
      }
      if (wsum > 0.0) {
        const std::size_t i = field.index(x, y);
        const double norm = strength / (wsum + kSoftWeight);
        field.dx[i] = static_cast<float>(norm * vx);
        field.dy[i] = static_cast<float>(norm * vy);
      }
    }
  }
  return field;
}

/// Contact-to-contactless shape deformation: inward-facing vectors equally
/// arranged around the pattern, longer along the top arc.
inline DeformationField build_contactless_field(
    int width, int height, const ShapeMask& shape, double strength,
    const ContactlessFieldParams& params = {}) {
  if (!(strength >= 0.0 && strength <= 1.0)) {
    throw ConfigInvalid("deformation strength must be in [0,1]");
  }
  const auto vectors = detail::contour_vectors(width, height, shape, params);
  DeformationField field = splat_vectors(width, height, vectors, strength);
  validate_field(field);
  return field;
}

/// Lateral stretch/compression simulating finger rolling. Displacements are
/// horizontal only and scale linearly with |angle| up to the 7 degree cap.
inline DeformationField build_rolling_field(int width, int height,
                                            RollingSpec roll,
                                            double max_shift_frac = 0.05) {
  validate(roll);
  DeformationField field(width, height);
  if (roll.angle_deg == 0.0) return field;
  const double m =
      (roll.angle_deg / kMaxRollingDeg) * max_shift_frac * width;
  for (int x = 0; x < width; ++x) {
    const double xi = width > 1 ? 2.0 * x / (width - 1) - 1.0 : 0.0;
    const float d = static_cast<float>(-m * (1.0 - xi * xi));
    for (int y = 0; y < height; ++y) {
      field.dx[field.index(x, y)] = d;
    }
  }
  validate_field(field);
  return field;
}

/// Backward-mapping warp with bilinear sampling; out-of-range samples clamp
/// to the nearest edge pixel.
template <int C>
inline Image<C> apply_warp(const Image<C>& img, const DeformationField& field) {
  if (img.width != field.width || img.height != field.height) {
    throw DimensionMismatch("warp field dims do not match image dims");
  }
  Image<C> out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const std::size_t i = field.index(x, y);
      const float sx = static_cast<float>(x) + field.dx[i];
      const float sy = static_cast<float>(y) + field.dy[i];
      for (int c = 0; c < C; ++c) {
        out.at(x, y, c) = bilinear_sample(img, sx, sy, c);
      }
    }
  }
  return out;
}

inline RidgeMap apply_warp(const RidgeMap& rm, const DeformationField& field) {
  return RidgeMap{apply_warp(rm.image, field), rm.nominal_resolution};
}

inline ShapeMask apply_warp(const ShapeMask& mask,
                            const DeformationField& field) {
  return ShapeMask{apply_warp(mask.weights, field)};
}

/// Chain two backward fields into one resample:
/// result(p) = a(p) + b(p + a(p)), so warp(img, result) equals
/// warp(warp(img, b), a).
inline DeformationField compose_fields(const DeformationField& a,
                                       const DeformationField& b) {
  if (a.width != b.width || a.height != b.height) {
    throw DimensionMismatch("compose_fields dims differ");
  }
  DeformationField out(a.width, a.height);
  Image<1> bx{}, by{};
  bx.width = by.width = b.width;
  bx.height = by.height = b.height;
  bx.data = b.dx;
  by.data = b.dy;
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      const std::size_t i = a.index(x, y);
      const float px = static_cast<float>(x) + a.dx[i];
      const float py = static_cast<float>(y) + a.dy[i];
      out.dx[i] = a.dx[i] + bilinear_sample(bx, px, py);
      out.dy[i] = a.dy[i] + bilinear_sample(by, px, py);
    }
  }
  validate_field(out);
  return out;
}

}  // namespace colfin
