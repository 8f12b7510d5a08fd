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
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "colfin/capture.hpp"
#include "colfin/error.hpp"
#include "colfin/fft.hpp"
#include "colfin/image.hpp"
#include "colfin/io.hpp"
#include "colfin/manifest.hpp"
#include "colfin/rng.hpp"

namespace colfin {

// ---------------------------------------------------------------------------
// Proxy sample quality
// ---------------------------------------------------------------------------

/// Component weights and the nominal ridge frequency of the quality proxy.
struct QualityParams {
  double frequency = 1.0 / 9.0;  // cycles per pixel
  double weight_contrast = 0.4;
  double weight_fidelity = 0.3;
  double weight_sharpness = 0.3;
  int tile = 32;  // contrast tile edge, px
};

namespace detail {

inline float masked_percentile(const std::vector<float>& values, double q) {
  std::vector<float> copy = values;
  const std::size_t idx = static_cast<std::size_t>(
      q * static_cast<double>(copy.size() - 1) + 0.5);
  std::nth_element(copy.begin(), copy.begin() + idx, copy.end());
  return copy[idx];
}

}  // namespace detail

/// Score in [0, 100], higher = better: tile-wise ridge-valley Michelson
/// contrast, spectral fidelity at the nominal ridge frequency (peak
/// proximity x band-energy concentration), and gradient sharpness of the
/// luminance (channel mean), combined with documented weights.
inline double proxy_quality(const ColorImage& img, const ShapeMask& shape,
                            const QualityParams& params = {}) {
  if (!img.same_dims(shape.weights)) {
    throw DimensionMismatch("quality mask dims differ from image");
  }
  const int w = img.width, h = img.height;
  const GrayImage gray = intensity_mean(img);

  // -- tile contrast --
  double contrast_sum = 0.0;
  int contrast_tiles = 0;
  const int tile = params.tile;
  std::vector<float> tile_vals;
  for (int ty = 0; ty + tile <= h; ty += tile) {
    for (int tx = 0; tx + tile <= w; tx += tile) {
      tile_vals.clear();
      for (int y = ty; y < ty + tile; ++y) {
        for (int x = tx; x < tx + tile; ++x) {
          if (shape.weights.at(x, y) >= 0.5f) {
            tile_vals.push_back(gray.at(x, y));
          }
        }
      }
      if (tile_vals.size() <
          static_cast<std::size_t>(0.8 * tile * tile)) {
        continue;
      }
      const double p95 = detail::masked_percentile(tile_vals, 0.95);
      const double p5 = detail::masked_percentile(tile_vals, 0.05);
      contrast_sum += std::clamp((p95 - p5) / (p95 + p5 + 1e-9), 0.0, 1.0);
      ++contrast_tiles;
    }
  }
  const double contrast =
      contrast_tiles > 0 ? contrast_sum / contrast_tiles : 0.0;

  // -- spectral fidelity over the mask-windowed luminance --
  double mean_in = 0.0;
  std::size_t count_in = 0;
  for (std::size_t i = 0; i < gray.data.size(); ++i) {
    if (shape.weights.data[i] > 0.0f) {
      mean_in += gray.data[i];
      ++count_in;
    }
  }
  if (count_in > 0) mean_in /= static_cast<double>(count_in);

  double fidelity = 0.0;
  {
    RealFft2D fft(w, h);
    for (std::size_t i = 0; i < gray.data.size(); ++i) {
      fft.real()[i] = (gray.data[i] - static_cast<float>(mean_in)) *
                      shape.weights.data[i];
    }
    fft.forward();
    constexpr double kNuMin = 0.02;   // exclude slow shading
    constexpr double kNuMax = 0.45;
    constexpr double kBinWidth = 0.005;
    const double f0 = params.frequency;
    std::vector<double> radial(
        static_cast<std::size_t>(kNuMax / kBinWidth) + 2, 0.0);
    double total_ac = 0.0, band = 0.0;
    const std::complex<float>* spec = fft.spectrum();
    for (int ky = 0; ky < h; ++ky) {
      const double ny =
          (ky <= h / 2 ? ky : ky - h) / static_cast<double>(h);
      for (int kx = 0; kx < fft.spec_width(); ++kx) {
        const double nx = kx / static_cast<double>(w);
        const double nu = std::hypot(nx, ny);
        if (nu < kNuMin || nu > kNuMax) continue;
        const std::complex<float> z =
            spec[static_cast<std::size_t>(ky) * fft.spec_width() + kx];
        // r2c half-spectrum: interior columns stand for two conjugate cells
        const double mult = (kx == 0 || kx == w / 2) ? 1.0 : 2.0;
        const double e = mult * (static_cast<double>(z.real()) * z.real() +
                                 static_cast<double>(z.imag()) * z.imag());
        total_ac += e;
        if (nu >= 0.7 * f0 && nu <= 1.3 * f0) band += e;
        radial[static_cast<std::size_t>(nu / kBinWidth)] += e;
      }
    }
    if (total_ac > 1e-12) {
      std::size_t peak_bin = 0;
      for (std::size_t b = 1; b < radial.size(); ++b) {
        if (radial[b] > radial[peak_bin]) peak_bin = b;
      }
      const double peak_nu = (peak_bin + 0.5) * kBinWidth;
      const double proximity =
          std::exp(-std::pow((peak_nu - f0) / (0.3 * f0), 2.0));
      fidelity = proximity * (band / total_ac);
    }
  }

  // -- gradient sharpness after light denoising --
  const GrayImage smooth = blur_gaussian(gray, 1.0);
  double grad_sq = 0.0;
  std::size_t grad_n = 0;
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      if (shape.weights.at(x, y) < 0.5f) continue;
      const double gx = 0.5 * (smooth.at(x + 1, y) - smooth.at(x - 1, y));
      const double gy = 0.5 * (smooth.at(x, y + 1) - smooth.at(x, y - 1));
      grad_sq += gx * gx + gy * gy;
      ++grad_n;
    }
  }
  const double rms = grad_n > 0 ? std::sqrt(grad_sq / grad_n) : 0.0;
  const double sharpness = std::min(1.0, rms / (2.0 * params.frequency));

  const double score = 100.0 * (params.weight_contrast * contrast +
                                params.weight_fidelity * fidelity +
                                params.weight_sharpness * sharpness);
  return std::clamp(score, 0.0, 100.0);
}

// ---------------------------------------------------------------------------
// Correlation matcher
// ---------------------------------------------------------------------------

struct MatchParams {
  int max_shift = 24;     // translation search half-window, px
  int max_rot_deg = 10;   // rotation search half-range, degrees
  int rot_step_deg = 1;
  double frequency = 1.0 / 9.0;  // nominal ridge frequency for the band-pass
};

/// Band-passed, sign-binarized match plane plus its cached spectrum.
struct MatchPlane {
  GrayImage plane;
  std::vector<std::complex<float>> spectrum;
  double energy = 0.0;
};

namespace detail {

/// Rotate about the canvas center (degrees, bilinear, zero fill).
/// Zero degrees returns the input unchanged so self-match is exact.
inline GrayImage rotate_plane(const GrayImage& img, double degrees) {
  if (degrees == 0.0) return img;
  const double rad = degrees * 3.14159265358979323846 / 180.0;
  const double c = std::cos(rad), s = std::sin(rad);
  const double cx = 0.5 * (img.width - 1), cy = 0.5 * (img.height - 1);
  GrayImage out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      // inverse mapping into the source frame
      const double dx = x - cx, dy = y - cy;
      const double sx = cx + c * dx + s * dy;
      const double sy = cy - s * dx + c * dy;
      if (sx < 0 || sy < 0 || sx > img.width - 1 || sy > img.height - 1) {
        continue;
      }
      const int x0 = static_cast<int>(sx), y0 = static_cast<int>(sy);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const int y1 = std::min(y0 + 1, img.height - 1);
      const double fx = sx - x0, fy = sy - y0;
      const double v00 = img.at(x0, y0), v10 = img.at(x1, y0);
      const double v01 = img.at(x0, y1), v11 = img.at(x1, y1);
      out.at(x, y) = static_cast<float>(
          (v00 * (1 - fx) + v10 * fx) * (1 - fy) +
          (v01 * (1 - fx) + v11 * fx) * fy);
    }
  }
  return out;
}

}  // namespace detail

/// Reusable matcher scratch bound to one canvas size.
class MatchContext {
 public:
  MatchContext(int width, int height) : fft_(width, height) {}

  int width() const { return fft_.width(); }
  int height() const { return fft_.height(); }

  /// Grayscale-project, band-pass at the ridge frequency (difference of
  /// Gaussians), binarize to sign, and cache the plane's spectrum.
  MatchPlane prepare(const ColorImage& img, const MatchParams& params) {
    if (img.width != fft_.width() || img.height != fft_.height()) {
      throw DimensionMismatch("match context canvas differs from image");
    }
    const GrayImage gray = intensity_mean(img);
    const double period = 1.0 / params.frequency;
    const GrayImage fine = blur_gaussian(gray, period / 6.0);
    const GrayImage coarse = blur_gaussian(gray, period / 2.0);
    MatchPlane mp;
    mp.plane = GrayImage(img.width, img.height);
    for (std::size_t i = 0; i < mp.plane.data.size(); ++i) {
      const float band = fine.data[i] - coarse.data[i];
      mp.plane.data[i] = band > 0.0f ? 1.0f : (band < 0.0f ? -1.0f : 0.0f);
    }
    attach_spectrum(&mp);
    return mp;
  }

  /// Spectrum + energy of an already-built plane (used for rotated copies).
  void attach_spectrum(MatchPlane* mp) {
    double energy = 0.0;
    for (std::size_t i = 0; i < mp->plane.data.size(); ++i) {
      const double v = mp->plane.data[i];
      energy += v * v;
      fft_.real()[i] = mp->plane.data[i];
    }
    fft_.forward();
    mp->spectrum.assign(fft_.spectrum(), fft_.spectrum() + fft_.spectrum_size());
    mp->energy = energy;
  }

  /// Best windowed NCC of `fixed` against one rotated copy of the moving
  /// plane, searching translations within +-max_shift (circular FFT
  /// correlation; planes vanish near the border so wrap effects are nil).
  double correlate(const MatchPlane& fixed, const MatchPlane& rotated,
                   const MatchParams& params) {
    if (fixed.energy <= 0.0 || rotated.energy <= 0.0) return 0.0;
    std::complex<float>* spec = fft_.spectrum();
    for (std::size_t i = 0; i < fixed.spectrum.size(); ++i) {
      spec[i] = fixed.spectrum[i] * std::conj(rotated.spectrum[i]);
    }
    fft_.inverse();
    const float* corr = fft_.real();
    const int w = fft_.width(), h = fft_.height();
    const double norm = std::sqrt(fixed.energy * rotated.energy);
    double best = -1.0;
    for (int sy = -params.max_shift; sy <= params.max_shift; ++sy) {
      const int wy = (sy + h) % h;
      for (int sx = -params.max_shift; sx <= params.max_shift; ++sx) {
        const int wx = (sx + w) % w;
        best = std::max(best,
                        corr[static_cast<std::size_t>(wy) * w + wx] / norm);
      }
    }
    return best;
  }

  /// Best NCC over the rotation sweep with `moving` rotated.
  double directional(const MatchPlane& fixed, const MatchPlane& moving,
                     const MatchParams& params) {
    double best = -1.0;
    for (int deg = -params.max_rot_deg; deg <= params.max_rot_deg;
         deg += params.rot_step_deg) {
      MatchPlane rotated;
      rotated.plane = detail::rotate_plane(moving.plane, deg);
      attach_spectrum(&rotated);
      best = std::max(best, correlate(fixed, rotated, params));
    }
    return best;
  }

  /// Symmetric similarity in [0,1]: max of both rotation directions,
  /// mapped from [-1,1].
  double score(const MatchPlane& a, const MatchPlane& b,
               const MatchParams& params) {
    const double ncc =
        std::max(directional(a, b, params), directional(b, a, params));
    return 0.5 * (1.0 + ncc);
  }

 private:
  RealFft2D fft_;
};

inline double match_score(const ColorImage& a, const ColorImage& b,
                          const MatchParams& params = {}) {
  if (!a.same_dims(b)) {
    throw DimensionMismatch("match inputs differ in size");
  }
  MatchContext ctx(a.width, a.height);
  const MatchPlane pa = ctx.prepare(a, params);
  const MatchPlane pb = ctx.prepare(b, params);
  return ctx.score(pa, pb, params);
}

// ---------------------------------------------------------------------------
// Mated / non-mated protocol
// ---------------------------------------------------------------------------

struct ProtocolScores {
  std::vector<double> mated;
  std::vector<double> nonmated;
};

inline constexpr int kDefaultNonmatedCap = 2000;
inline constexpr std::uint64_t kTagProtocol = 0x9A;

namespace detail {

inline ColorImage load_color_image(const std::string& path) {
  const LoadedImage raw = load_image(path);
  ColorImage img(raw.width, raw.height);
  for (std::size_t i = 0;
       i < static_cast<std::size_t>(raw.width) * raw.height; ++i) {
    for (int c = 0; c < 3; ++c) {
      img.data[3 * i + c] =
          raw.channels == 3 ? raw.data[3 * i + c] : raw.data[i];
    }
  }
  return img;
}

}  // namespace detail

/// Mated = all within-identity session pairs; non-mated = first-session
/// cross-identity pairs, capped by a deterministic subsample keyed on the
/// identity seeds in the manifest. Scores come from the correlation
/// matcher; pair grouping shares each plane's rotation sweep.
inline ProtocolScores run_protocol(const SampleManifest& manifest,
                                   const std::string& preset,
                                   const std::string& root_dir,
                                   const MatchParams& params = {},
                                   int nonmated_cap = kDefaultNonmatedCap,
                                   int jobs = 1) {
  // identity -> (session -> row), ordered
  std::map<int, std::map<int, const ManifestRow*>> identities;
  for (const ManifestRow& r : manifest.rows) {
    if (r.preset == preset) identities[r.identity_id][r.session_index] = &r;
  }
  if (identities.size() < 2) {
    throw InsufficientData("need >= 2 identities for preset " + preset);
  }
  for (const auto& [id, sessions] : identities) {
    if (sessions.size() < 2) {
      throw InsufficientData("identity " + std::to_string(id) +
                             " has fewer than 2 sessions for " + preset);
    }
  }

  // load and prepare all referenced samples
  namespace fs = std::filesystem;
  std::vector<const ManifestRow*> rows;
  std::map<const ManifestRow*, std::size_t> plane_of;
  for (const auto& [id, sessions] : identities) {
    for (const auto& [s, row] : sessions) {
      plane_of[row] = rows.size();
      rows.push_back(row);
    }
  }
  std::vector<MatchPlane> planes(rows.size());
  {
    std::unique_ptr<MatchContext> ctx;  // sized by the first image
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const ColorImage img = detail::load_color_image(
          (fs::path(root_dir) / rows[i]->path).string());
      if (!ctx) ctx = std::make_unique<MatchContext>(img.width, img.height);
      planes[i] = ctx->prepare(img, params);
    }
  }
  const int width = rows.empty() ? 0 : planes[0].plane.width;
  const int height = rows.empty() ? 0 : planes[0].plane.height;

  struct Pair {
    std::size_t a, b;  // plane indices
    bool mated;
  };
  std::vector<Pair> pairs;
  for (const auto& [id, sessions] : identities) {
    std::vector<std::size_t> idx;
    for (const auto& [s, row] : sessions) idx.push_back(plane_of[row]);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      for (std::size_t j = i + 1; j < idx.size(); ++j) {
        pairs.push_back({idx[i], idx[j], true});
      }
    }
  }
  std::vector<std::size_t> firsts;
  std::uint64_t seed_material = 0;
  for (const auto& [id, sessions] : identities) {
    firsts.push_back(plane_of[sessions.begin()->second]);
    seed_material ^= sessions.begin()->second->identity_seed;
  }
  std::vector<std::pair<std::size_t, std::size_t>> cross;
  for (std::size_t i = 0; i < firsts.size(); ++i) {
    for (std::size_t j = i + 1; j < firsts.size(); ++j) {
      cross.emplace_back(firsts[i], firsts[j]);
    }
  }
  if (nonmated_cap > 0 &&
      cross.size() > static_cast<std::size_t>(nonmated_cap)) {
    // deterministic subsample keyed on the manifest's identity seeds
    RandomStream rng = RandomStream::derive(seed_material, kTagProtocol,
                                            cross.size());
    for (std::size_t i = 0; i < static_cast<std::size_t>(nonmated_cap); ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.uniform_int(
                                    0, static_cast<std::int64_t>(
                                           cross.size() - 1 - i)));
      std::swap(cross[i], cross[j]);
    }
    cross.resize(nonmated_cap);
    std::sort(cross.begin(), cross.end());
  }
  for (const auto& [a, b] : cross) pairs.push_back({a, b, false});

  // two directional passes per pair, grouped so each rotation sweep of a
  // plane is shared by every pair using it
  std::vector<double> dir_score(2 * pairs.size(),
                                -std::numeric_limits<double>::infinity());
  struct Unit {
    std::size_t rotated_plane;
    std::vector<std::pair<std::size_t, std::size_t>> jobs_list;  // (pair, fixed)
  };
  std::map<std::size_t, Unit> units_by_plane[2];
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    auto& u0 = units_by_plane[0][pairs[p].b];
    u0.rotated_plane = pairs[p].b;
    u0.jobs_list.emplace_back(2 * p, pairs[p].a);
    auto& u1 = units_by_plane[1][pairs[p].a];
    u1.rotated_plane = pairs[p].a;
    u1.jobs_list.emplace_back(2 * p + 1, pairs[p].b);
  }
  std::vector<const Unit*> units;
  for (const auto& m : units_by_plane) {
    for (const auto& [plane, unit] : m) units.push_back(&unit);
  }

  std::atomic<std::size_t> next_unit{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const auto worker = [&]() {
    try {
      MatchContext ctx(width, height);
      while (true) {
        const std::size_t u = next_unit.fetch_add(1);
        if (u >= units.size()) return;
        const Unit& unit = *units[u];
        for (int deg = -params.max_rot_deg; deg <= params.max_rot_deg;
             deg += params.rot_step_deg) {
          MatchPlane rotated;
          rotated.plane =
              detail::rotate_plane(planes[unit.rotated_plane].plane, deg);
          ctx.attach_spectrum(&rotated);
          for (const auto& [slot, fixed] : unit.jobs_list) {
            dir_score[slot] = std::max(
                dir_score[slot],
                ctx.correlate(planes[fixed], rotated, params));
          }
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  ProtocolScores scores;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const double ncc = std::max(dir_score[2 * p], dir_score[2 * p + 1]);
    const double s = 0.5 * (1.0 + ncc);
    (pairs[p].mated ? scores.mated : scores.nonmated).push_back(s);
  }
  return scores;
}

// ---------------------------------------------------------------------------
// DET / EER
// ---------------------------------------------------------------------------

struct DetPoint {
  double threshold = 0.0;
  double fmr = 0.0;
  double fnmr = 0.0;
};

struct DetCurve {
  std::vector<DetPoint> points;  // thresholds strictly increasing
  double eer = 0.0;
};

/// EER from DET points: first threshold bracket where fnmr - fmr crosses
/// zero, linearly interpolated.
inline double eer_from_points(const std::vector<DetPoint>& points) {
  if (points.empty()) throw EmptyScores("DET curve has no points");
  std::size_t bracket = points.size() - 1;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = points[i].fnmr - points[i].fmr;
    if (d >= 0.0) {
      if (d == 0.0) return 0.5 * (points[i].fmr + points[i].fnmr);
      bracket = i;
      break;
    }
  }
  if (bracket == 0) return 0.5 * (points[0].fmr + points[0].fnmr);
  const DetPoint& lo = points[bracket - 1];
  const DetPoint& hi = points[bracket];
  const double d0 = lo.fnmr - lo.fmr;
  const double d1 = hi.fnmr - hi.fmr;
  const double alpha = -d0 / (d1 - d0);
  return (1.0 - alpha) * 0.5 * (lo.fmr + lo.fnmr) +
         alpha * 0.5 * (hi.fmr + hi.fnmr);
}

/// Thresholds = sorted distinct scores plus -inf/+inf sentinels;
/// fmr(t) = fraction of non-mated >= t, fnmr(t) = fraction of mated < t.
inline DetCurve compute_det(const std::vector<double>& mated,
                            const std::vector<double>& nonmated) {
  if (mated.empty() || nonmated.empty()) {
    throw EmptyScores("both mated and non-mated scores are required");
  }
  std::vector<double> m = mated, nm = nonmated;
  std::sort(m.begin(), m.end());
  std::sort(nm.begin(), nm.end());
  std::vector<double> thresholds;
  thresholds.push_back(-std::numeric_limits<double>::infinity());
  {
    std::vector<double> all = m;
    all.insert(all.end(), nm.begin(), nm.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    thresholds.insert(thresholds.end(), all.begin(), all.end());
  }
  thresholds.push_back(std::numeric_limits<double>::infinity());

  DetCurve curve;
  curve.points.reserve(thresholds.size());
  for (double t : thresholds) {
    DetPoint p;
    p.threshold = t;
    p.fmr = static_cast<double>(nm.end() -
                                std::lower_bound(nm.begin(), nm.end(), t)) /
            static_cast<double>(nm.size());
    p.fnmr = static_cast<double>(std::lower_bound(m.begin(), m.end(), t) -
                                 m.begin()) /
             static_cast<double>(m.size());
    curve.points.push_back(p);
  }
  curve.eer = eer_from_points(curve.points);
  return curve;
}

/// FNMR at a target FMR, linearly interpolated along the curve (used for
/// fixed-operating-point comparisons).
inline double fnmr_at_fmr(const DetCurve& curve, double target_fmr) {
  if (curve.points.empty()) throw EmptyScores("DET curve has no points");
  // fmr is non-increasing in threshold; walk to the first point at or
  // below the target
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    if (curve.points[i].fmr <= target_fmr) {
      if (i == 0) return curve.points[0].fnmr;
      const DetPoint& hi = curve.points[i - 1];  // fmr above target
      const DetPoint& lo = curve.points[i];      // fmr at/below target
      if (hi.fmr == lo.fmr) return lo.fnmr;
      const double alpha = (hi.fmr - target_fmr) / (hi.fmr - lo.fmr);
      return hi.fnmr + alpha * (lo.fnmr - hi.fnmr);
    }
  }
  return curve.points.back().fnmr;
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

/// Writes det_<preset>.csv files plus quality_summary.csv (two-pass mean
/// and population std).
inline void emit_report(const std::map<std::string, DetCurve>& curves,
                        const std::map<std::string, std::vector<double>>& qualities,
                        const std::string& out_dir) {
  if (curves.empty()) throw EmptyScores("no DET curves to emit");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw OutputUnwritable("cannot create " + out_dir);

  for (const auto& [preset, curve] : curves) {
    const std::string path =
        (fs::path(out_dir) / ("det_" + preset + ".csv")).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw OutputUnwritable("cannot open " + path);
    out << "threshold,fmr,fnmr\n";
    for (const DetPoint& p : curve.points) {
      out << detail::format_double(p.threshold) << ","
          << detail::format_double(p.fmr) << ","
          << detail::format_double(p.fnmr) << "\n";
    }
    if (!out) throw OutputUnwritable("write failed: " + path);
  }

  const std::string qpath =
      (fs::path(out_dir) / "quality_summary.csv").string();
  std::ofstream out(qpath, std::ios::binary);
  if (!out) throw OutputUnwritable("cannot open " + qpath);
  out << "preset,mean,std,n\n";
  for (const auto& [preset, values] : qualities) {
    if (values.empty()) {
      throw EmptyScores("no quality scores for preset " + preset);
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    out << preset << "," << detail::format_double(mean) << ","
        << detail::format_double(std::sqrt(var)) << "," << values.size()
        << "\n";
  }
  if (!out) throw OutputUnwritable("write failed: " + qpath);
}

/// Parses a det_<preset>.csv back into a curve; the EER is recomputed with
/// the same interpolation rule, so emit -> parse round-trips exactly.
inline DetCurve parse_det_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound("DET csv: " + path);
  std::string line;
  if (!std::getline(in, line) ||
      (line != "threshold,fmr,fnmr" && line != "threshold,fmr,fnmr\r")) {
    throw DecodeError("unexpected DET csv header in " + path);
  }
  DetCurve curve;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = detail::split_csv(line);
    if (f.size() != 3) {
      throw DecodeError("DET csv line " + std::to_string(line_no) +
                        ": expected 3 fields");
    }
    DetPoint p;
    try {
      p.threshold = std::stod(f[0]);
      p.fmr = std::stod(f[1]);
      p.fnmr = std::stod(f[2]);
    } catch (const std::exception&) {
      throw DecodeError("DET csv line " + std::to_string(line_no) +
                        ": malformed number");
    }
    curve.points.push_back(p);
  }
  if (curve.points.empty()) {
    throw DecodeError("DET csv has no data rows: " + path);
  }
  curve.eer = eer_from_points(curve.points);
  return curve;
}

}  // namespace colfin
