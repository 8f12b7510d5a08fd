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

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "colfin/environment.hpp"
#include "colfin/error.hpp"
#include "colfin/geometry.hpp"
#include "colfin/image.hpp"
#include "colfin/ridge.hpp"
#include "colfin/subject.hpp"

namespace colfin {

/// Per-stage parameter ranges of one severity level. Sessions draw every
/// parameter uniformly from its range. Radius ranges are fractions of the
/// short canvas side so presets transfer across canvas sizes.
struct QualityPreset {
  std::string name;
  std::pair<double, double> rolling_deg{0.0, 2.0};
  std::pair<int, int> lc_count{0, 1};
  std::pair<double, double> lc_strength{0.15, 0.35};
  std::pair<double, double> lc_radius_frac{0.07, 0.12};
  std::pair<double, double> shadow_depth{0.05, 0.15};
  std::pair<double, double> illumination{0.8, 1.0};
  std::pair<double, double> noise_sigma{0.005, 0.02};
  std::pair<int, int> dirt_count{0, 2};
  std::pair<double, double> tone_amplitude{0.02, 0.05};
  std::pair<double, double> tone_gain{0.95, 1.05};
  double hue_shift_max = 0.01;
  std::pair<double, double> inversion_strength{0.0, 0.12};

  /// Documented severity score: sum of range midpoints, each normalized by
  /// its operation's full scale (rolling by the 7 degree cap, counts by 20,
  /// noise by 0.1, tone by the 0.3 amplitude cap, hue and gain spread at
  /// half weight). Higher = harsher conditions.
  double severity() const {
    const auto mid = [](std::pair<double, double> r) {
      return 0.5 * (r.first + r.second);
    };
    const auto midi = [](std::pair<int, int> r) {
      return 0.5 * (r.first + r.second);
    };
    return mid(rolling_deg) / kMaxRollingDeg + midi(lc_count) / 20.0 +
           mid(lc_strength) + mid(shadow_depth) + (1.0 - mid(illumination)) +
           mid(noise_sigma) / 0.1 + midi(dirt_count) / 20.0 +
           mid(tone_amplitude) / kMaxToneAmplitude + mid(inversion_strength) +
           0.5 * hue_shift_max / kMaxHueShift +
           0.5 * (tone_gain.second - tone_gain.first) / 0.6;
  }
};

inline QualityPreset default_preset_high() { return QualityPreset{"high"}; }

inline QualityPreset default_preset_medium() {
  QualityPreset p{"medium"};
  p.rolling_deg = {1.5, 4.5};
  p.lc_count = {2, 4};
  p.lc_strength = {0.45, 0.7};
  p.lc_radius_frac = {0.10, 0.17};
  p.shadow_depth = {0.2, 0.4};
  p.illumination = {0.55, 0.8};
  p.noise_sigma = {0.025, 0.05};
  p.dirt_count = {3, 8};
  p.tone_amplitude = {0.06, 0.12};
  p.tone_gain = {0.85, 1.12};
  p.hue_shift_max = 0.03;
  p.inversion_strength = {0.1, 0.3};
  return p;
}

inline QualityPreset default_preset_low() {
  QualityPreset p{"low"};
  p.rolling_deg = {3.5, 7.0};
  p.lc_count = {5, 9};
  p.lc_strength = {0.7, 0.95};
  p.lc_radius_frac = {0.14, 0.22};
  p.shadow_depth = {0.35, 0.7};
  p.illumination = {0.15, 0.5};
  p.noise_sigma = {0.05, 0.09};
  p.dirt_count = {8, 18};
  p.tone_amplitude = {0.12, 0.2};
  p.tone_gain = {0.72, 1.25};
  p.hue_shift_max = 0.06;
  p.inversion_strength = {0.25, 0.55};
  return p;
}

/// Every range must sit inside the owning operation's precondition range.
inline void validate(const QualityPreset& p) {
  const auto ordered = [](std::pair<double, double> r) {
    return r.first <= r.second;
  };
  validate(RollingSpec{p.rolling_deg.first});
  validate(RollingSpec{p.rolling_deg.second});
  if (p.rolling_deg.first < 0 || !ordered(p.rolling_deg)) {
    throw ConfigInvalid("preset " + p.name + ": bad rolling range");
  }
  if (p.lc_count.first < 0 || p.lc_count.second < p.lc_count.first) {
    throw ConfigInvalid("preset " + p.name + ": bad low-contrast count range");
  }
  if (!ordered(p.lc_strength) || p.lc_strength.first < 0 ||
      p.lc_strength.second > 1) {
    throw ConfigInvalid("preset " + p.name +
                        ": low-contrast strength outside [0,1]");
  }
  if (!ordered(p.lc_radius_frac) || p.lc_radius_frac.first <= 0 ||
      p.lc_radius_frac.second > 0.5) {
    throw ConfigInvalid("preset " + p.name +
                        ": low-contrast radius fraction outside (0, 0.5]");
  }
  if (!ordered(p.shadow_depth) || p.shadow_depth.first < 0 ||
      p.shadow_depth.second > 1) {
    throw ConfigInvalid("preset " + p.name + ": shadow depth outside [0,1]");
  }
  if (!ordered(p.illumination) || p.illumination.first < 0 ||
      p.illumination.second > 1) {
    throw ConfigInvalid("preset " + p.name + ": illumination outside [0,1]");
  }
  if (!ordered(p.noise_sigma) || p.noise_sigma.first < 0) {
    throw ConfigInvalid("preset " + p.name + ": bad noise sigma range");
  }
  if (p.dirt_count.first < 0 || p.dirt_count.second < p.dirt_count.first) {
    throw ConfigInvalid("preset " + p.name + ": bad dirt count range");
  }
  if (!ordered(p.tone_amplitude) || p.tone_amplitude.first < 0) {
    throw ConfigInvalid("preset " + p.name + ": bad tone amplitude range");
  }
  if (p.tone_amplitude.second > kMaxToneAmplitude) {
    throw AmplitudeTooLarge("preset " + p.name + ": tone amplitude above " +
                            std::to_string(kMaxToneAmplitude));
  }
  if (!ordered(p.tone_gain) || p.tone_gain.first < kMinToneGain ||
      p.tone_gain.second > kMaxToneGain) {
    throw ConfigInvalid("preset " + p.name + ": gain outside [0.7, 1.3]");
  }
  if (p.hue_shift_max < 0 || p.hue_shift_max > kMaxHueShift) {
    throw ConfigInvalid("preset " + p.name + ": hue shift outside [0, 0.1]");
  }
  if (!ordered(p.inversion_strength) || p.inversion_strength.first < 0 ||
      p.inversion_strength.second > 1) {
    throw ConfigInvalid("preset " + p.name +
                        ": inversion strength outside [0,1]");
  }
}

/// Full generator configuration with shipped defaults; any key can be
/// overridden from an INI-style file. Unknown keys are an error.
struct GenerationConfig {
  // [run]
  std::uint64_t master_seed = 0x5EED2026;
  std::string preset_name = "high";
  std::string out_dir = "out";
  std::string format = "png";
  // [canvas]
  int width = 416;
  int height = 560;
  // [ridge]
  double frequency = 1.0 / 9.0;
  double frequency_jitter = 0.06;
  double frequency_spread = 0.04;  // per-identity relative spread
  int iteration_cap = 60;
  int seed_points = 24;
  double mask_margin = 8.0;
  double mask_edge_softness = 24.0;
  // [geometry]
  double contactless_strength = 0.45;
  double contactless_jitter = 0.15;  // relative per-session variation
  double rolling_max_shift_frac = 0.08;
  // [capture]
  CaptureParams capture;
  // [subject]
  std::string palette_path = "builtin";
  double ridge_depth = 0.5;
  double lc_sigma = 4.0;
  double tone_scale = 24.0;
  double alteration_factor = 0.3;
  // [environment]
  double lit_threshold = kDefaultLitThreshold;
  double inversion_band = kDefaultInversionBand;
  double dirt_darkness = 0.6;
  std::pair<double, double> dirt_radius{2.0, 5.0};
  // [preset.high] / [preset.medium] / [preset.low]
  QualityPreset high = default_preset_high();
  QualityPreset medium = default_preset_medium();
  QualityPreset low = default_preset_low();

  const QualityPreset& preset_by_name(const std::string& name) const {
    if (name == "high") return high;
    if (name == "medium") return medium;
    if (name == "low") return low;
    throw ConfigInvalid("unknown preset name: " + name);
  }

  RidgeParams ridge_params() const {
    RidgeParams rp;
    rp.width = width;
    rp.height = height;
    rp.frequency = frequency;
    rp.frequency_jitter = frequency_jitter;
    rp.iteration_cap = iteration_cap;
    rp.seed_points = seed_points;
    rp.mask_margin = mask_margin;
    rp.mask_edge_softness = mask_edge_softness;
    return rp;
  }
};

inline void validate(const GenerationConfig& c) {
  if (c.format != "png") {
    throw ConfigInvalid("unsupported image format: " + c.format);
  }
  if (c.width < kMinRidgeMapSide || c.height < kMinRidgeMapSide) {
    throw ConfigInvalid("canvas below the " +
                        std::to_string(kMinRidgeMapSide) + " px minimum");
  }
  if (!(c.frequency >= kMinRidgeFrequency &&
        c.frequency <= kMaxRidgeFrequency)) {
    throw ConfigInvalid("ridge frequency outside [1/12, 1/6]");
  }
  if (c.frequency_jitter < 0 || c.frequency_jitter > 0.2 ||
      c.frequency_spread < 0 || c.frequency_spread > 0.2) {
    throw ConfigInvalid("frequency jitter/spread outside [0, 0.2]");
  }
  if (c.iteration_cap < 1 || c.seed_points < 1) {
    throw ConfigInvalid("iteration cap and seed points must be >= 1");
  }
  if (!(c.contactless_strength >= 0 && c.contactless_strength <= 1) ||
      !(c.contactless_jitter >= 0 && c.contactless_jitter <= 1)) {
    throw ConfigInvalid("contactless strength/jitter outside [0,1]");
  }
  if (!(c.rolling_max_shift_frac > 0 && c.rolling_max_shift_frac <= 0.2)) {
    throw ConfigInvalid("rolling max shift fraction outside (0, 0.2]");
  }
  validate(c.capture);
  if (!(c.ridge_depth >= 0 && c.ridge_depth <= 1)) {
    throw ConfigInvalid("ridge depth outside [0,1]");
  }
  if (c.lc_sigma <= 0) throw ConfigInvalid("low-contrast sigma must be > 0");
  if (c.tone_scale < kMinToneScale) {
    throw ConfigInvalid("tone scale below " + std::to_string(kMinToneScale));
  }
  if (!(c.alteration_factor >= 0 && c.alteration_factor <= 1)) {
    throw ConfigInvalid("alteration factor outside [0,1]");
  }
  if (!(c.lit_threshold >= 0 && c.lit_threshold <= 1)) {
    throw ConfigInvalid("lit threshold outside [0,1]");
  }
  if (c.inversion_band < 0) {
    throw ConfigInvalid("inversion band must be >= 0");
  }
  if (!(c.dirt_darkness >= 0 && c.dirt_darkness <= 1)) {
    throw ConfigInvalid("dirt darkness outside [0,1]");
  }
  if (c.dirt_radius.first <= 0 || c.dirt_radius.second < c.dirt_radius.first) {
    throw ConfigInvalid("bad dirt radius range");
  }
  c.preset_by_name(c.preset_name);  // must name a known preset
  validate(c.high);
  validate(c.medium);
  validate(c.low);
  if (!(c.high.severity() < c.medium.severity() &&
        c.medium.severity() < c.low.severity())) {
    throw ConfigInvalid(
        "preset severity must increase strictly high -> medium -> low");
  }
}

namespace detail {

inline std::string trim(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    throw ConfigInvalid("key " + key + ": not a number: " + value);
  }
  if (used != value.size()) {
    throw ConfigInvalid("key " + key + ": trailing junk in: " + value);
  }
  return out;
}

inline std::int64_t parse_int(const std::string& key,
                              const std::string& value) {
  std::size_t used = 0;
  std::int64_t out = 0;
  try {
    out = std::stoll(value, &used);
  } catch (const std::exception&) {
    throw ConfigInvalid("key " + key + ": not an integer: " + value);
  }
  if (used != value.size()) {
    throw ConfigInvalid("key " + key + ": trailing junk in: " + value);
  }
  return out;
}

inline std::uint64_t parse_u64(const std::string& key,
                               const std::string& value) {
  std::size_t used = 0;
  std::uint64_t out = 0;
  try {
    out = std::stoull(value, &used);
  } catch (const std::exception&) {
    throw ConfigInvalid("key " + key + ": not an unsigned integer: " + value);
  }
  if (used != value.size()) {
    throw ConfigInvalid("key " + key + ": trailing junk in: " + value);
  }
  return out;
}

/// Registers preset keys under their section name for one preset object.
inline void register_preset_keys(
    const std::string& section, QualityPreset* p,
    std::map<std::string, std::function<void(const std::string&,
                                             const std::string&)>>* reg) {
  const auto dbl = [](double* slot) {
    return [slot](const std::string& k, const std::string& v) {
      *slot = parse_double(k, v);
    };
  };
  const auto intv = [](int* slot) {
    return [slot](const std::string& k, const std::string& v) {
      *slot = static_cast<int>(parse_int(k, v));
    };
  };
  (*reg)[section + ".rolling_min"] = dbl(&p->rolling_deg.first);
  (*reg)[section + ".rolling_max"] = dbl(&p->rolling_deg.second);
  (*reg)[section + ".lc_count_min"] = intv(&p->lc_count.first);
  (*reg)[section + ".lc_count_max"] = intv(&p->lc_count.second);
  (*reg)[section + ".lc_strength_min"] = dbl(&p->lc_strength.first);
  (*reg)[section + ".lc_strength_max"] = dbl(&p->lc_strength.second);
  (*reg)[section + ".lc_radius_min"] = dbl(&p->lc_radius_frac.first);
  (*reg)[section + ".lc_radius_max"] = dbl(&p->lc_radius_frac.second);
  (*reg)[section + ".shadow_min"] = dbl(&p->shadow_depth.first);
  (*reg)[section + ".shadow_max"] = dbl(&p->shadow_depth.second);
  (*reg)[section + ".illumination_min"] = dbl(&p->illumination.first);
  (*reg)[section + ".illumination_max"] = dbl(&p->illumination.second);
  (*reg)[section + ".noise_min"] = dbl(&p->noise_sigma.first);
  (*reg)[section + ".noise_max"] = dbl(&p->noise_sigma.second);
  (*reg)[section + ".dirt_min"] = intv(&p->dirt_count.first);
  (*reg)[section + ".dirt_max"] = intv(&p->dirt_count.second);
  (*reg)[section + ".tone_min"] = dbl(&p->tone_amplitude.first);
  (*reg)[section + ".tone_max"] = dbl(&p->tone_amplitude.second);
  (*reg)[section + ".gain_min"] = dbl(&p->tone_gain.first);
  (*reg)[section + ".gain_max"] = dbl(&p->tone_gain.second);
  (*reg)[section + ".hue_max"] = dbl(&p->hue_shift_max);
  (*reg)[section + ".inversion_min"] = dbl(&p->inversion_strength.first);
  (*reg)[section + ".inversion_max"] = dbl(&p->inversion_strength.second);
}

}  // namespace detail

/// Parse `key = value` lines with `[section]` groups and `#` comments.
/// Unknown or duplicate keys fail fast; the result is validated.
inline GenerationConfig parse_config_text(const std::string& text) {
  GenerationConfig cfg;
  std::map<std::string,
           std::function<void(const std::string&, const std::string&)>>
      reg;
  const auto dbl = [](double* slot) {
    return [slot](const std::string& k, const std::string& v) {
      *slot = detail::parse_double(k, v);
    };
  };
  const auto intv = [](int* slot) {
    return [slot](const std::string& k, const std::string& v) {
      *slot = static_cast<int>(detail::parse_int(k, v));
    };
  };
  const auto str = [](std::string* slot) {
    return [slot](const std::string&, const std::string& v) { *slot = v; };
  };
  reg["run.master_seed"] = [&cfg](const std::string& k, const std::string& v) {
    cfg.master_seed = detail::parse_u64(k, v);
  };
  reg["run.preset"] = str(&cfg.preset_name);
  reg["run.out_dir"] = str(&cfg.out_dir);
  reg["run.format"] = str(&cfg.format);
  reg["canvas.width"] = intv(&cfg.width);
  reg["canvas.height"] = intv(&cfg.height);
  reg["ridge.frequency"] = dbl(&cfg.frequency);
  reg["ridge.frequency_jitter"] = dbl(&cfg.frequency_jitter);
  reg["ridge.frequency_spread"] = dbl(&cfg.frequency_spread);
  reg["ridge.iteration_cap"] = intv(&cfg.iteration_cap);
  reg["ridge.seed_points"] = intv(&cfg.seed_points);
  reg["ridge.mask_margin"] = dbl(&cfg.mask_margin);
  reg["ridge.mask_edge_softness"] = dbl(&cfg.mask_edge_softness);
  reg["geometry.contactless_strength"] = dbl(&cfg.contactless_strength);
  reg["geometry.contactless_jitter"] = dbl(&cfg.contactless_jitter);
  reg["geometry.rolling_max_shift_frac"] = dbl(&cfg.rolling_max_shift_frac);
  reg["capture.erosion_radius"] = intv(&cfg.capture.erosion_radius);
  reg["capture.global_sigma"] = dbl(&cfg.capture.global_sigma);
  reg["capture.border_sigma_max"] = dbl(&cfg.capture.border_sigma_max);
  reg["capture.border_onset"] = dbl(&cfg.capture.border_onset);
  reg["subject.palette"] = str(&cfg.palette_path);
  reg["subject.ridge_depth"] = dbl(&cfg.ridge_depth);
  reg["subject.lc_sigma"] = dbl(&cfg.lc_sigma);
  reg["subject.tone_scale"] = dbl(&cfg.tone_scale);
  reg["subject.alteration_factor"] = dbl(&cfg.alteration_factor);
  reg["environment.lit_threshold"] = dbl(&cfg.lit_threshold);
  reg["environment.inversion_band"] = dbl(&cfg.inversion_band);
  reg["environment.dirt_darkness"] = dbl(&cfg.dirt_darkness);
  reg["environment.dirt_radius_min"] = dbl(&cfg.dirt_radius.first);
  reg["environment.dirt_radius_max"] = dbl(&cfg.dirt_radius.second);
  detail::register_preset_keys("preset.high", &cfg.high, &reg);
  detail::register_preset_keys("preset.medium", &cfg.medium, &reg);
  detail::register_preset_keys("preset.low", &cfg.low, &reg);

  std::istringstream in(text);
  std::string line, section;
  std::vector<std::string> seen;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigInvalid("line " + std::to_string(line_no) +
                            ": unterminated section header");
      }
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        throw ConfigInvalid("line " + std::to_string(line_no) +
                            ": empty section name");
      }
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigInvalid("line " + std::to_string(line_no) +
                          ": expected key = value");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigInvalid("line " + std::to_string(line_no) + ": empty key");
    }
    const std::string full = section.empty() ? key : section + "." + key;
    const auto it = reg.find(full);
    if (it == reg.end()) {
      throw ConfigInvalid("line " + std::to_string(line_no) +
                          ": unknown config key: " + full);
    }
    for (const std::string& s : seen) {
      if (s == full) {
        throw ConfigInvalid("line " + std::to_string(line_no) +
                            ": duplicate config key: " + full);
      }
    }
    seen.push_back(full);
    it->second(full, value);
  }
  validate(cfg);
  return cfg;
}

inline GenerationConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFound("config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace colfin
