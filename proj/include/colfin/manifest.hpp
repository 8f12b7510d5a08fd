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
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "colfin/error.hpp"

namespace colfin {

/// One generated sample. proxy_quality is -1 until evaluated.
struct ManifestRow {
  int identity_id = 0;
  int session_index = 0;
  std::string preset;
  std::uint64_t identity_seed = 0;
  std::uint64_t session_seed_material = 0;
  std::string path;  // relative to the manifest's directory
  double proxy_quality = -1.0;
};

struct SampleManifest {
  std::vector<ManifestRow> rows;
};

inline constexpr const char* kManifestHeader =
    "identity_id,session_index,preset,identity_seed,session_seed_material,"
    "path,proxy_quality";

inline void validate(const SampleManifest& manifest) {
  std::vector<std::string> keys;
  keys.reserve(manifest.rows.size());
  for (const ManifestRow& r : manifest.rows) {
    if (r.preset.find(',') != std::string::npos ||
        r.path.find(',') != std::string::npos) {
      throw ConfigInvalid("manifest fields must not contain commas");
    }
    keys.push_back(std::to_string(r.identity_id) + "|" +
                   std::to_string(r.session_index) + "|" + r.preset);
  }
  std::sort(keys.begin(), keys.end());
  const auto dup = std::adjacent_find(keys.begin(), keys.end());
  if (dup != keys.end()) {
    throw ConfigInvalid("duplicate manifest key: " + *dup);
  }
}

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

}  // namespace detail

inline std::string manifest_to_string(const SampleManifest& manifest) {
  validate(manifest);
  std::ostringstream out;
  out << kManifestHeader << "\n";
  for (const ManifestRow& r : manifest.rows) {
    out << r.identity_id << "," << r.session_index << "," << r.preset << ","
        << r.identity_seed << "," << r.session_seed_material << "," << r.path
        << "," << detail::format_double(r.proxy_quality) << "\n";
  }
  return out.str();
}

/// Writes the manifest (UTF-8, LF). Skips the write when the file already
/// holds identical content so resumed runs leave timestamps alone.
inline void write_manifest(const SampleManifest& manifest,
                           const std::string& path) {
  const std::string content = manifest_to_string(manifest);
  {
    std::ifstream existing(path, std::ios::binary);
    if (existing) {
      std::ostringstream buf;
      buf << existing.rdbuf();
      if (buf.str() == content) return;
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OutputUnwritable("cannot open manifest: " + path);
  out << content;
  if (!out) throw OutputUnwritable("write failed: " + path);
}

inline SampleManifest load_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound("manifest: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DecodeError("manifest is empty: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kManifestHeader) {
    throw DecodeError("unexpected manifest header: " + line);
  }
  SampleManifest manifest;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = detail::split_csv(line);
    if (f.size() != 7) {
      throw DecodeError("manifest line " + std::to_string(line_no) +
                        ": expected 7 fields, got " + std::to_string(f.size()));
    }
    ManifestRow r;
    try {
      std::size_t used = 0;
      r.identity_id = std::stoi(f[0], &used);
      if (used != f[0].size()) throw std::invalid_argument(f[0]);
      r.session_index = std::stoi(f[1], &used);
      if (used != f[1].size()) throw std::invalid_argument(f[1]);
      r.preset = f[2];
      r.identity_seed = std::stoull(f[3], &used);
      if (used != f[3].size()) throw std::invalid_argument(f[3]);
      r.session_seed_material = std::stoull(f[4], &used);
      if (used != f[4].size()) throw std::invalid_argument(f[4]);
      r.path = f[5];
      r.proxy_quality = std::stod(f[6], &used);
      if (used != f[6].size()) throw std::invalid_argument(f[6]);
    } catch (const std::exception&) {
      throw DecodeError("manifest line " + std::to_string(line_no) +
                        ": malformed field");
    }
    manifest.rows.push_back(r);
  }
  validate(manifest);
  return manifest;
}

}  // namespace colfin
