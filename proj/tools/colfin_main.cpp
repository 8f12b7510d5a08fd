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

#include <cstdint>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "colfin/config.hpp"
#include "colfin/evaluation.hpp"
#include "colfin/generation.hpp"
#include "colfin/io.hpp"
#include "colfin/manifest.hpp"

namespace {

std::vector<std::string> split_presets(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int run_generate(const std::string& config_path, std::uint64_t identity_seed,
                 int session, const std::string& out_path) {
  const colfin::GenerationConfig config = colfin::load_config(config_path);
  const colfin::SampleResult sample =
      colfin::generate_sample(config, identity_seed, session);
  colfin::save_png_rgb8(out_path, sample.image);
  std::cout << out_path << "\n";
  return 0;
}

int run_dataset(const std::string& config_path, int identities, int sessions,
                const std::string& presets_csv, const std::string& out_dir,
                int jobs, bool dump_intermediates) {
  const colfin::GenerationConfig config = colfin::load_config(config_path);
  const colfin::QualityParams qp{.frequency = config.frequency};
  const colfin::QualityFn quality =
      [qp](const colfin::ColorImage& img, const colfin::ShapeMask& shape) {
        return colfin::proxy_quality(img, shape, qp);
      };
  const colfin::SampleManifest manifest = colfin::generate_dataset(
      config, identities, sessions, split_presets(presets_csv), out_dir, jobs,
      dump_intermediates, quality);
  std::cout << out_dir << "/manifest.csv: " << manifest.rows.size()
            << " rows\n";
  return 0;
}

int run_evaluate(const std::string& manifest_path,
                 const std::string& presets_csv, const std::string& out_dir,
                 int nonmated_cap, int jobs) {
  const colfin::SampleManifest manifest =
      colfin::load_manifest(manifest_path);
  const std::string root_dir =
      std::filesystem::path(manifest_path).parent_path().string();
  const colfin::MatchParams params;
  std::map<std::string, colfin::DetCurve> curves;
  std::map<std::string, std::vector<double>> qualities;
  for (const std::string& preset : split_presets(presets_csv)) {
    const colfin::ProtocolScores scores = colfin::run_protocol(
        manifest, preset, root_dir, params, nonmated_cap, jobs);
    curves[preset] = colfin::compute_det(scores.mated, scores.nonmated);
    for (const colfin::ManifestRow& row : manifest.rows) {
      if (row.preset == preset && row.proxy_quality >= 0.0) {
        qualities[preset].push_back(row.proxy_quality);
      }
    }
    std::cout << preset << ": " << scores.mated.size() << " mated, "
              << scores.nonmated.size() << " non-mated, EER "
              << curves[preset].eer << "\n";
  }
  colfin::emit_report(curves, qualities, out_dir);
  std::cout << out_dir << "/quality_summary.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"colfin: deterministic synthetic contactless fingerprint "
               "generation and desk-scale evaluation"};
  app.require_subcommand(1);

  std::string config_path, out_path, presets = "high,medium,low";
  std::uint64_t identity_seed = 0;
  int session = 0, identities = 1000, sessions = 6, jobs = 1,
      nonmated_cap = colfin::kDefaultNonmatedCap;
  bool dump_intermediates = false;
  std::string manifest_path;

  CLI::App* generate =
      app.add_subcommand("generate", "Render a single sample to a PNG");
  generate->add_option("--config", config_path, "generation config file")
      ->required();
  generate
      ->add_option("--identity-seed", identity_seed,
                   "64-bit identity seed")
      ->required();
  generate->add_option("--session", session, "session index (>= 0)")
      ->required();
  generate->add_option("--out", out_path, "output PNG path")->required();

  CLI::App* dataset = app.add_subcommand(
      "dataset", "Render an identities x sessions x presets grid");
  dataset->add_option("--config", config_path, "generation config file")
      ->required();
  dataset->add_option("--identities", identities,
                      "number of identities (default 1000)");
  dataset->add_option("--sessions", sessions,
                      "sessions per identity (default 6)");
  dataset->add_option("--presets", presets,
                      "comma-separated preset names (default high,medium,low)");
  dataset->add_option("--out", out_path, "output directory")->required();
  dataset->add_option("--jobs", jobs, "worker threads (default 1)");
  dataset->add_flag("--dump-intermediates", dump_intermediates,
                    "also write per-stage debug rasters");

  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Score a dataset: DET curves, EER, quality summary");
  evaluate->add_option("--manifest", manifest_path, "dataset manifest.csv")
      ->required();
  evaluate->add_option("--presets", presets,
                       "comma-separated preset names (default high,medium,low)");
  evaluate->add_option("--out", out_path, "report directory")->required();
  evaluate->add_option("--nonmated-cap", nonmated_cap,
                       "max non-mated pairs per preset (default 2000)");
  evaluate->add_option("--jobs", jobs, "worker threads (default 1)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) {
      return run_generate(config_path, identity_seed, session, out_path);
    }
    if (dataset->parsed()) {
      return run_dataset(config_path, identities, sessions, presets, out_path,
                         jobs, dump_intermediates);
    }
    if (evaluate->parsed()) {
      return run_evaluate(manifest_path, presets, out_path, nonmated_cap,
                          jobs);
    }
  } catch (const colfin::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
