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
#include <cstdint>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "colfin/capture.hpp"
#include "colfin/config.hpp"
#include "colfin/environment.hpp"
#include "colfin/error.hpp"
#include "colfin/geometry.hpp"
#include "colfin/image.hpp"
#include "colfin/io.hpp"
#include "colfin/manifest.hpp"
#include "colfin/ridge.hpp"
#include "colfin/rng.hpp"
#include "colfin/subject.hpp"

namespace colfin {

// Stage tags for keyed stream derivation. Values are arbitrary but frozen:
// changing them changes every generated image.
inline constexpr std::uint64_t kTagRidge = 0x01;
inline constexpr std::uint64_t kTagSkinColor = 0x02;
inline constexpr std::uint64_t kTagLowContrast = 0x03;
inline constexpr std::uint64_t kTagRolling = 0x04;
inline constexpr std::uint64_t kTagToneVariation = 0x05;
inline constexpr std::uint64_t kTagGlobalTone = 0x06;
inline constexpr std::uint64_t kTagShadow = 0x07;
inline constexpr std::uint64_t kTagNoise = 0x08;
inline constexpr std::uint64_t kTagDirt = 0x09;
inline constexpr std::uint64_t kTagIdentitySeed = 0x1D;

/// Domain bit marking session-keyed (transient) stream derivations.
inline constexpr std::uint64_t kSessionDomainFlag = 0x8000000000000000ull;

/// Named substreams for one (identity, session) sample. Persistent streams
/// depend only on the identity seed; transient streams also on the session
/// index; the semi-persistent low-contrast stage carries one stream of each
/// kind plus the blend weight.
struct SeedPlan {
  std::uint64_t identity_seed = 0;
  int session_index = 0;
  double alteration_factor = 0.3;

  RandomStream ridge;                 // persistent
  RandomStream skin_color;            // persistent
  RandomStream low_contrast_identity; // persistent half of semi-persistent
  RandomStream low_contrast_session;  // transient half of semi-persistent
  RandomStream rolling;               // transient (geometry stage)
  RandomStream tone_variation;        // transient
  RandomStream global_tone;           // transient
  RandomStream shadow;                // transient
  RandomStream noise;                 // transient
  RandomStream dirt;                  // transient
};

inline std::uint64_t session_domain(int session_index) {
  return kSessionDomainFlag | static_cast<std::uint64_t>(session_index);
}

inline SeedPlan derive_streams(std::uint64_t identity_seed, int session_index,
                               double alteration_factor) {
  if (session_index < 0) {
    throw ConfigInvalid("session index must be >= 0");
  }
  if (!(alteration_factor >= 0.0 && alteration_factor <= 1.0)) {
    throw ConfigInvalid("alteration factor outside [0,1]");
  }
  const std::uint64_t sdom = session_domain(session_index);
  SeedPlan plan;
  plan.identity_seed = identity_seed;
  plan.session_index = session_index;
  plan.alteration_factor = alteration_factor;
  plan.ridge = RandomStream::derive(identity_seed, kTagRidge, 0);
  plan.skin_color = RandomStream::derive(identity_seed, kTagSkinColor, 0);
  plan.low_contrast_identity =
      RandomStream::derive(identity_seed, kTagLowContrast, 0);
  plan.low_contrast_session =
      RandomStream::derive(identity_seed, kTagLowContrast, sdom);
  plan.rolling = RandomStream::derive(identity_seed, kTagRolling, sdom);
  plan.tone_variation =
      RandomStream::derive(identity_seed, kTagToneVariation, sdom);
  plan.global_tone = RandomStream::derive(identity_seed, kTagGlobalTone, sdom);
  plan.shadow = RandomStream::derive(identity_seed, kTagShadow, sdom);
  plan.noise = RandomStream::derive(identity_seed, kTagNoise, sdom);
  plan.dirt = RandomStream::derive(identity_seed, kTagDirt, sdom);
  return plan;
}

inline SkinPalette resolve_palette(const GenerationConfig& config) {
  if (config.palette_path == "builtin") return default_skin_palette();
  return load_palette(config.palette_path);
}

/// Everything persistent for one identity: the ridge pattern, the
/// silhouette it was grown in, and the skin color. Reused across sessions.
struct IdentityAssets {
  std::uint64_t identity_seed = 0;
  RidgeMap ridge;
  ShapeMask shape;
  SkinColor color;
};

namespace detail {

/// Identity-persistent singularity layout: arch (no singularities), loop
/// (core + delta) or whorl (two of each), positions jittered per identity.
inline SingularityLayout draw_layout(RandomStream* rng) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    SingularityLayout layout;
    const double kind = rng->next_double();
    int cores = 1, deltas = 1;
    if (kind < 0.15) {
      cores = deltas = 0;  // arch
    } else if (kind >= 0.75) {
      cores = deltas = 2;  // whorl
    }
    for (int i = 0; i < cores; ++i) {
      layout.cores.emplace_back(rng->uniform(0.35, 0.65),
                                rng->uniform(0.30, 0.50));
    }
    for (int i = 0; i < deltas; ++i) {
      layout.deltas.emplace_back(rng->uniform(0.30, 0.70),
                                 rng->uniform(0.55, 0.75));
    }
    try {
      validate(layout);
      return layout;
    } catch (const InvalidLayout&) {
      continue;  // singularities landed too close; redraw
    }
  }
  return SingularityLayout{};  // arch fallback, always valid
}

}  // namespace detail

inline IdentityAssets build_identity_assets(const GenerationConfig& config,
                                            std::uint64_t identity_seed,
                                            const SkinPalette& palette) {
  SeedPlan plan = derive_streams(identity_seed, 0, config.alteration_factor);
  IdentityAssets assets;
  assets.identity_seed = identity_seed;

  const SingularityLayout layout = detail::draw_layout(&plan.ridge);
  RidgeParams rp = config.ridge_params();
  rp.frequency = std::clamp(
      config.frequency *
          (1.0 + plan.ridge.uniform(-config.frequency_spread,
                                    config.frequency_spread)),
      kMinRidgeFrequency, kMaxRidgeFrequency);
  const std::uint64_t pattern_seed = plan.ridge.next_u64();
  assets.ridge = generate_ridge_pattern(pattern_seed, layout, rp);
  assets.shape = compute_shape_mask(assets.ridge, config.mask_margin,
                                    config.mask_edge_softness);
  assets.color = sample_skin_color(plan.skin_color, palette);
  return assets;
}

/// Optional collector for per-stage intermediates (debug / figure dumps).
struct StageTrace {
  std::vector<std::pair<std::string, GrayImage>> gray;
  std::vector<std::pair<std::string, ColorImage>> color;

  void add(const std::string& name, const GrayImage& img) {
    gray.emplace_back(name, img);
  }
  void add(const std::string& name, const ColorImage& img) {
    color.emplace_back(name, img);
  }
};

struct SampleResult {
  ColorImage image;
  ShapeMask shape;  // post-warp silhouette actually covering the sample
};

/// Full three-stage pipeline for one session of a prepared identity:
/// capture geometry and optics, subject characteristics, then environment
/// influences. Deterministic in (config, identity assets, session index).
inline SampleResult generate_sample_with_assets(
    const GenerationConfig& config, const IdentityAssets& assets,
    int session_index, const QualityPreset& preset,
    StageTrace* trace = nullptr) {
  validate(preset);
  SeedPlan plan = derive_streams(assets.identity_seed, session_index,
                                 config.alteration_factor);
  const int w = config.width, h = config.height;
  if (assets.ridge.width() != w || assets.ridge.height() != h) {
    throw DimensionMismatch("identity assets do not match the config canvas");
  }
  if (trace) trace->add("00_ridge_pattern", assets.ridge.image);

  // -- capture simulation: session geometry, thinning, optical blur --
  const double roll_mag =
      plan.rolling.uniform(preset.rolling_deg.first, preset.rolling_deg.second);
  const double roll_sign = plan.rolling.next_bool() ? 1.0 : -1.0;
  const double contactless_strength = std::clamp(
      config.contactless_strength *
          (1.0 + plan.rolling.uniform(-config.contactless_jitter,
                                      config.contactless_jitter)),
      0.0, 1.0);
  const DeformationField rolling_field =
      build_rolling_field(w, h, RollingSpec{roll_sign * roll_mag},
                          config.rolling_max_shift_frac);
  const DeformationField contactless_field =
      build_contactless_field(w, h, assets.shape, contactless_strength);
  // contactless pose first, then rolling on top
  const DeformationField warp_field =
      compose_fields(rolling_field, contactless_field);

  RidgeMap ridge = apply_warp(assets.ridge, warp_field);
  const ShapeMask shape = apply_warp(assets.shape, warp_field);
  if (trace) trace->add("01_warped", ridge.image);

  ridge = thin_ridges(ridge, config.capture.erosion_radius);
  ridge = blur_gaussian(ridge, config.capture.global_sigma);
  ridge = blur_border(ridge, shape, config.capture);
  if (trace) trace->add("02_capture", ridge.image);

  // -- subject characteristics: low contrast, colorization, tone --
  const double lc_strength_identity = plan.low_contrast_identity.uniform(
      preset.lc_strength.first, preset.lc_strength.second);
  const double lc_strength_session = plan.low_contrast_session.uniform(
      preset.lc_strength.first, preset.lc_strength.second);
  const double alpha = plan.alteration_factor;
  const double lc_strength =
      (1.0 - alpha) * lc_strength_identity + alpha * lc_strength_session;
  const double min_side = std::min(w, h);
  const std::pair<double, double> lc_radius_px{
      preset.lc_radius_frac.first * min_side,
      preset.lc_radius_frac.second * min_side};
  // blobs are anatomy: built in the identity frame, warped with the finger
  const BlobMask lc_identity = build_low_contrast_mask(
      assets.shape, plan.low_contrast_identity, preset.lc_count, lc_radius_px);
  const BlobMask lc_session = build_low_contrast_mask(
      assets.shape, plan.low_contrast_session, preset.lc_count, lc_radius_px);
  BlobMask lc_mask = blend_blob_masks(lc_identity, lc_session, alpha);
  lc_mask.weights = apply_warp(lc_mask.weights, warp_field);
  ridge.image =
      apply_low_contrast(ridge.image, lc_mask, lc_strength, config.lc_sigma);
  if (trace) trace->add("03_low_contrast", ridge.image);

  ColorizeResult colorized =
      colorize(ridge, shape, assets.color, config.ridge_depth);
  if (trace) trace->add("04_colorized", colorized.image);

  const double tone_amp = plan.tone_variation.uniform(
      preset.tone_amplitude.first, preset.tone_amplitude.second);
  ColorImage img =
      tone_amp > 0.0
          ? apply_tone_variation(colorized.image, shape, plan.tone_variation,
                                 tone_amp, config.tone_scale)
          : colorized.image;
  if (trace) trace->add("05_tone_variation", img);

  // -- environmental influences: tone, shadow, inversion, noise, dirt --
  img = apply_global_tone(img, plan.global_tone, preset.hue_shift_max,
                          preset.tone_gain);
  if (trace) trace->add("06_global_tone", img);

  const double light_angle = plan.shadow.uniform(0.0, 2.0 * 3.14159265358979);
  const double shadow_depth = plan.shadow.uniform(preset.shadow_depth.first,
                                                  preset.shadow_depth.second);
  const double inversion_strength = plan.shadow.uniform(
      preset.inversion_strength.first, preset.inversion_strength.second);
  const ShadowMask shadow_mask = build_shadow_mask(
      shape, std::cos(light_angle), std::sin(light_angle), shadow_depth);
  img = apply_shadow(img, shadow_mask, 1.0);
  if (trace) trace->add("07_shadow", img);

  img = apply_ridge_inversion(img, colorized.ridge, shadow_mask,
                              inversion_strength, config.lit_threshold,
                              config.inversion_band);
  if (trace) trace->add("08_ridge_inversion", img);

  const IlluminationLevel illumination{plan.noise.uniform(
      preset.illumination.first, preset.illumination.second)};
  const double noise_sigma = plan.noise.uniform(preset.noise_sigma.first,
                                                preset.noise_sigma.second);
  img = apply_camera_noise(img, plan.noise, illumination, noise_sigma);

  const DirtParams dirt{preset.dirt_count, config.dirt_radius,
                        config.dirt_darkness};
  img = apply_dirt(img, shape, plan.dirt, dirt);

  // background contract: outside the support the file holds pure black
  for (std::size_t i = 0; i < shape.weights.data.size(); ++i) {
    if (shape.weights.data[i] == 0.0f) {
      img.data[3 * i + 0] = 0.0f;
      img.data[3 * i + 1] = 0.0f;
      img.data[3 * i + 2] = 0.0f;
    }
  }
  clamp01(img);
  if (trace) trace->add("09_final", img);
  return SampleResult{std::move(img), shape};
}

inline SampleResult generate_sample(const GenerationConfig& config,
                                    std::uint64_t identity_seed,
                                    int session_index,
                                    StageTrace* trace = nullptr) {
  validate(config);
  const SkinPalette palette = resolve_palette(config);
  const IdentityAssets assets =
      build_identity_assets(config, identity_seed, palette);
  return generate_sample_with_assets(config, assets, session_index,
                                     config.preset_by_name(config.preset_name),
                                     trace);
}

/// Scores a finished sample; wired in by the caller so dataset emission
/// does not depend on the evaluation stack. May be empty.
using QualityFn =
    std::function<double(const ColorImage&, const ShapeMask&)>;

namespace detail {

inline std::string sample_file_name(int identity_id, int session_index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "id%05d_s%02d.png", identity_id,
                session_index);
  return buf;
}

/// Shared per-identity asset cache: assets are built once by whichever
/// worker needs them first and evicted once every session has used them.
class AssetCache {
 public:
  AssetCache(const GenerationConfig& config, const SkinPalette& palette,
             std::map<std::uint64_t, int> uses)
      : config_(config), palette_(palette), uses_(std::move(uses)) {}

  std::shared_ptr<const IdentityAssets> acquire(std::uint64_t identity_seed) {
    std::shared_future<std::shared_ptr<const IdentityAssets>> future;
    bool builder = false;
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = futures_.find(identity_seed);
      if (it == futures_.end()) {
        std::promise<std::shared_ptr<const IdentityAssets>> promise;
        future = promise.get_future().share();
        futures_.emplace(identity_seed, future);
        promises_.emplace(identity_seed, std::move(promise));
        builder = true;
      } else {
        future = it->second;
      }
    }
    if (builder) {
      std::shared_ptr<const IdentityAssets> assets;
      try {
        assets = std::make_shared<IdentityAssets>(
            build_identity_assets(config_, identity_seed, palette_));
      } catch (...) {
        std::lock_guard<std::mutex> lock(mutex_);
        promises_.at(identity_seed).set_exception(std::current_exception());
        promises_.erase(identity_seed);
        throw;
      }
      std::lock_guard<std::mutex> lock(mutex_);
      promises_.at(identity_seed).set_value(std::move(assets));
      promises_.erase(identity_seed);
    }
    return future.get();
  }

  void release(std::uint64_t identity_seed) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (--uses_.at(identity_seed) == 0) {
      futures_.erase(identity_seed);  // free the ridge pattern memory
    }
  }

 private:
  const GenerationConfig& config_;
  const SkinPalette& palette_;
  std::map<std::uint64_t, int> uses_;
  std::mutex mutex_;
  std::map<std::uint64_t,
           std::shared_future<std::shared_ptr<const IdentityAssets>>>
      futures_;
  std::map<std::uint64_t,
           std::promise<std::shared_ptr<const IdentityAssets>>>
      promises_;
};

}  // namespace detail

/// Emits n_identities x sessions x |presets| PNGs plus manifest.csv under
/// out_dir. Rows are ordered by (identity, preset, session) regardless of
/// scheduling; a rerun over complete output rewrites nothing.
inline SampleManifest generate_dataset(
    const GenerationConfig& config, int n_identities,
    int sessions_per_identity, const std::vector<std::string>& presets,
    const std::string& out_dir, int jobs = 1, bool dump_intermediates = false,
    const QualityFn& quality_fn = {}) {
  validate(config);
  if (n_identities < 1 || sessions_per_identity < 1) {
    throw ConfigInvalid("need at least one identity and one session");
  }
  if (presets.empty()) throw ConfigInvalid("no presets requested");
  for (const std::string& p : presets) config.preset_by_name(p);

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw OutputUnwritable("cannot create " + out_dir);
  for (const std::string& p : presets) {
    fs::create_directories(fs::path(out_dir) / p, ec);
    if (ec) throw OutputUnwritable("cannot create preset dir under " + out_dir);
  }

  // previous manifest, if any, enables resume
  std::map<std::string, ManifestRow> existing;
  const std::string manifest_path = (fs::path(out_dir) / "manifest.csv").string();
  if (fs::exists(manifest_path)) {
    try {
      for (const ManifestRow& r : load_manifest(manifest_path).rows) {
        existing.emplace(std::to_string(r.identity_id) + "|" +
                             std::to_string(r.session_index) + "|" + r.preset,
                         r);
      }
    } catch (const Error&) {
      existing.clear();  // unreadable manifest: regenerate everything
    }
  }

  struct Task {
    int identity_id;
    int session;
    std::string preset;
    std::uint64_t identity_seed;
    std::size_t row_slot;
  };
  std::vector<Task> tasks;
  SampleManifest manifest;
  std::map<std::uint64_t, int> uses;
  for (int id = 0; id < n_identities; ++id) {
    const std::uint64_t seed = philox_word(
        static_cast<std::uint64_t>(id), kTagIdentitySeed, config.master_seed);
    for (const std::string& preset : presets) {
      for (int s = 0; s < sessions_per_identity; ++s) {
        ManifestRow row;
        row.identity_id = id;
        row.session_index = s;
        row.preset = preset;
        row.identity_seed = seed;
        row.session_seed_material = session_domain(s);
        row.path = preset + "/" + detail::sample_file_name(id, s);
        manifest.rows.push_back(row);

        const std::string key = std::to_string(id) + "|" + std::to_string(s) +
                                "|" + preset;
        const auto it = existing.find(key);
        const std::string full = (fs::path(out_dir) / row.path).string();
        if (it != existing.end() && it->second.identity_seed == seed &&
            it->second.path == row.path && fs::exists(full)) {
          manifest.rows.back().proxy_quality = it->second.proxy_quality;
          continue;  // resume: file exists and matches
        }
        tasks.push_back(Task{id, s, preset, seed, manifest.rows.size() - 1});
        ++uses[seed];
      }
    }
  }

  const SkinPalette palette = resolve_palette(config);
  detail::AssetCache cache(config, palette, uses);
  std::atomic<std::size_t> next_task{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  const auto worker = [&]() {
    while (true) {
      const std::size_t t = next_task.fetch_add(1);
      if (t >= tasks.size()) return;
      const Task& task = tasks[t];
      try {
        const std::shared_ptr<const IdentityAssets> assets =
            cache.acquire(task.identity_seed);
        StageTrace trace;
        SampleResult sample = generate_sample_with_assets(
            config, *assets, task.session,
            config.preset_by_name(task.preset),
            dump_intermediates ? &trace : nullptr);
        cache.release(task.identity_seed);

        const fs::path full = fs::path(out_dir) /
                              manifest.rows[task.row_slot].path;
        save_png_rgb8(full.string(), sample.image);
        if (dump_intermediates) {
          const fs::path dir =
              fs::path(out_dir) / "intermediates" / task.preset /
              (detail::sample_file_name(task.identity_id, task.session) +
               std::string(".d"));
          std::error_code dump_ec;
          fs::create_directories(dir, dump_ec);
          if (dump_ec) {
            throw OutputUnwritable("cannot create " + dir.string());
          }
          for (const auto& [name, gray] : trace.gray) {
            save_png_gray8((dir / (name + ".png")).string(), gray);
          }
          for (const auto& [name, color] : trace.color) {
            save_png_rgb8((dir / (name + ".png")).string(), color);
          }
        }
        manifest.rows[task.row_slot].proxy_quality =
            quality_fn ? quality_fn(sample.image, sample.shape) : -1.0;
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  write_manifest(manifest, manifest_path);
  return manifest;
}

}  // namespace colfin
