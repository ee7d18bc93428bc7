// Copyright 2026 The qdiode Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QDIODE_IO_HPP
#define QDIODE_IO_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qdiode/chain.hpp"
#include "qdiode/cpr.hpp"
#include "qdiode/ivlab.hpp"
#include "qdiode/transmon.hpp"

namespace qdiode {

// Every output file starts with a schema-version line:
//   CSV:  "# schema: qdiode.<name>/1"
//   JSON: a top-level "schema" field.

/// Shortest round-trip decimal form of a double (deterministic output files).
std::string format_double(double x);

// ---- cpr ------------------------------------------------------------------

void write_cpr_table_csv(const DiodeCPR& cpr, std::size_t samples,
                         const std::filesystem::path& path);
void write_cpr_summary_json(const DiodeCPR& cpr,
                            const std::filesystem::path& path);

// ---- transmon ---------------------------------------------------------------

void write_potential_csv(const TransmonParams& params, const PhaseGrid& grid,
                         const std::filesystem::path& path);
void write_spectrum_csv(const Spectrum& spectrum, const WellAnalysis& analysis,
                        const std::filesystem::path& path);
void write_spectrum_json(const Spectrum& spectrum, const WellAnalysis& analysis,
                         const std::filesystem::path& path);
void write_sweep_csv(const TwoLevelSweep& sweep,
                     const std::filesystem::path& path);
void write_windows_json(const TwoLevelSweep& sweep,
                        const std::filesystem::path& path);

// ---- chain ------------------------------------------------------------------

void write_fidelity_map_csv(const FidelityMap& map,
                            const std::filesystem::path& path);
void write_map_summary_json(const FidelityMap& map, const ChainConfig& config,
                            const std::optional<NoiseConfig>& noise,
                            double region_threshold,
                            const std::filesystem::path& path);

/// Reads {"chain": {...}, "noise": {...}} (both sections optional).
struct ChainConfigFile {
  ChainConfig chain;
  std::optional<NoiseConfig> noise;
};
ChainConfigFile load_chain_config(const std::filesystem::path& path);

// ---- ivlab ------------------------------------------------------------------

/// CSV with header current_A,voltage_V[,sweep_dir]; '#' lines are comments.
/// Field metadata is not part of the CSV; the manifest carries it.
IVTrace read_iv_trace_csv(const std::filesystem::path& path);
void write_iv_trace_csv(const IVTrace& trace, const std::filesystem::path& path);

/// Filename convention fallback: B<signed-oersted>_<orientation>.csv
std::optional<std::pair<double, Orientation>> parse_trace_filename(
    const std::string& filename);

struct ManifestEntry {
  std::filesystem::path file;  // resolved against the manifest directory
  std::optional<double> b_field_oe;
  std::optional<Orientation> orientation;
  std::optional<double> thickness_nm;
};

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);

void write_manifest(const std::vector<ManifestEntry>& entries,
                    const std::filesystem::path& path);

struct IvPipelineResult {
  std::vector<EfficiencyPoint> series;
  EfficiencyFit fit;
  std::vector<std::string> warnings;
  int n_traces_loaded = 0;
  int n_traces_skipped = 0;
};

/// Manifest -> traces -> efficiency series -> sinusoid fit. Unreadable or
/// undetectable traces are skipped with a warning. Throws
/// InsufficientDataError when fewer than 4 usable field points remain.
IvPipelineResult run_iv_pipeline(const std::filesystem::path& manifest_path,
                                 const ExtractionOptions& extraction,
                                 const FitOptions& fit_options);

void write_efficiency_series_csv(const std::vector<EfficiencyPoint>& points,
                                 const std::filesystem::path& path);
void write_fit_json(const EfficiencyFit& fit, const std::filesystem::path& path);
void write_residuals_csv(const std::vector<EfficiencyPoint>& points,
                         const EfficiencyFit& fit,
                         const std::filesystem::path& path);

}  // namespace qdiode

#endif  // QDIODE_IO_HPP
