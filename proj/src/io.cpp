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

#include "qdiode/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qdiode/errors.hpp"

namespace qdiode {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  return out;
}

void dump_json(const json& j, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == 0) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("bad numeric field '" + s + "' in " + context);
  }
}

json covariance_to_json(const std::array<double, 9>& cov) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) {
    json row = json::array();
    for (int c = 0; c < 3; ++c) row.push_back(cov[r * 3 + c]);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// ---- cpr --------------------------------------------------------------------

void write_cpr_table_csv(const DiodeCPR& cpr, std::size_t samples,
                         const std::filesystem::path& path) {
  validate(cpr);
  if (samples < 2) throw std::invalid_argument("cpr table: samples must be >= 2");
  auto out = open_out(path);
  out << "# schema: qdiode.cpr_table/1\n";
  out << "phi,current,potential\n";
  const double lo = -2.0 * std::numbers::pi;
  const double hi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < samples; ++i) {
    const double phi = lo + (hi - lo) * double(i) / double(samples - 1);
    out << format_double(phi) << ',' << format_double(cpr_current(cpr, phi))
        << ',' << format_double(cpr_potential(cpr, phi)) << "\n";
  }
}

void write_cpr_summary_json(const DiodeCPR& cpr,
                            const std::filesystem::path& path) {
  const CriticalCurrentPair analytic = critical_currents(cpr);
  const CriticalCurrentPair numeric = critical_currents_numeric(cpr);
  json j;
  j["schema"] = "qdiode.cpr_summary/1";
  j["eta"] = cpr.eta;
  j["i_j"] = cpr.i_j;
  j["phi0_rad"] = cpr.phi0();
  j["ic_plus"] = analytic.ic_plus;
  j["ic_minus"] = analytic.ic_minus;
  j["efficiency"] = efficiency(analytic);
  j["ic_plus_numeric"] = numeric.ic_plus;
  j["ic_minus_numeric"] = numeric.ic_minus;
  j["efficiency_numeric"] = efficiency(numeric);
  dump_json(j, path);
}

// ---- transmon -----------------------------------------------------------------

void write_potential_csv(const TransmonParams& params, const PhaseGrid& grid,
                         const std::filesystem::path& path) {
  validate(params);
  validate(grid);
  const DiodeCPR cpr{params.eta, 1.0};
  auto out = open_out(path);
  out << "# schema: qdiode.potential/1\n";
  out << "phi,potential\n";
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    const double phi = grid.point(i);
    out << format_double(phi) << ','
        << format_double(params.e_j * cpr_potential(cpr, phi)) << "\n";
  }
}

void write_spectrum_csv(const Spectrum& spectrum, const WellAnalysis& analysis,
                        const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "# schema: qdiode.spectrum/1\n";
  out << "index,energy,bound_flag,well_weight\n";
  for (std::size_t i = 0; i < spectrum.energies.size(); ++i) {
    const bool bound =
        std::find(analysis.bound_state_indices.begin(),
                  analysis.bound_state_indices.end(),
                  i) != analysis.bound_state_indices.end();
    out << i << ',' << format_double(spectrum.energies[i]) << ','
        << (bound ? 1 : 0) << ',' << format_double(analysis.well_weights[i])
        << "\n";
  }
}

void write_spectrum_json(const Spectrum& spectrum, const WellAnalysis& analysis,
                         const std::filesystem::path& path) {
  json j;
  j["schema"] = "qdiode.spectrum/1";
  j["energies"] = spectrum.energies;
  j["well_weights"] = analysis.well_weights;
  j["bound_state_indices"] = analysis.bound_state_indices;
  j["well_left"] = analysis.well_left;
  j["well_right"] = analysis.well_right;
  j["well_min_phi"] = analysis.well_min_phi;
  j["barrier_energy"] = analysis.barrier_energy;
  dump_json(j, path);
}

void write_sweep_csv(const TwoLevelSweep& sweep,
                     const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "# schema: qdiode.sweep_counts/1\n";
  out << "eta,bound_count\n";
  for (std::size_t i = 0; i < sweep.etas.size(); ++i) {
    out << format_double(sweep.etas[i]) << ',' << sweep.bound_counts[i] << "\n";
  }
}

void write_windows_json(const TwoLevelSweep& sweep,
                        const std::filesystem::path& path) {
  json j;
  j["schema"] = "qdiode.two_level_windows/1";
  json windows = json::array();
  for (const EtaInterval& w : sweep.two_level_windows) {
    windows.push_back({{"eta_lo", w.lo}, {"eta_hi", w.hi}});
  }
  j["windows"] = windows;
  dump_json(j, path);
}

// ---- chain --------------------------------------------------------------------

void write_fidelity_map_csv(const FidelityMap& map,
                            const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "# schema: qdiode.fidelity_map/1\n";
  out << "eta,t_ns,forward,reverse,difference\n";
  for (std::size_t i = 0; i < map.eta_axis.size(); ++i) {
    for (std::size_t j = 0; j < map.time_axis.size(); ++j) {
      const std::size_t cell = map.index(i, j);
      out << format_double(map.eta_axis[i]) << ','
          << format_double(map.time_axis[j]) << ','
          << format_double(map.forward[cell]) << ','
          << format_double(map.reverse[cell]) << ','
          << format_double(map.difference[cell]) << "\n";
    }
  }
}

void write_map_summary_json(const FidelityMap& map, const ChainConfig& config,
                            const std::optional<NoiseConfig>& noise,
                            double region_threshold,
                            const std::filesystem::path& path) {
  const PeakCell peak = peak_difference(map);
  json j;
  j["schema"] = "qdiode.map_summary/1";
  j["noise_applied"] = map.noise_applied;
  j["peak_difference"] = peak.value;
  j["peak_eta"] = map.eta_axis[peak.eta_index];
  j["peak_t_ns"] = map.time_axis[peak.time_index];
  j["peak_difference_se"] = map.difference_se[map.index(peak.eta_index,
                                                        peak.time_index)];
  j["region_threshold"] = region_threshold;
  json regions = json::array();
  for (const EtaRange& r : asymmetry_regions(map, region_threshold)) {
    regions.push_back({{"eta_lo", r.lo}, {"eta_hi", r.hi}});
  }
  j["asymmetry_regions"] = regions;

  json chain;
  chain["n_qubits"] = config.n_qubits;
  chain["coupling_g_rad_per_ns"] = config.coupling_g;
  chain["qubit_frequency_rad_per_ns"] = config.qubit_frequency;
  j["chain"] = chain;
  if (noise) {
    json nj;
    nj["ej_fluctuation"] = noise->ej_fluctuation;
    nj["charge_noise"] = noise->charge_noise;
    nj["phase_noise"] = noise->phase_noise;
    nj["dissipation_rate"] = noise->dissipation_rate;
    nj["measurement_uncertainty"] = noise->measurement_uncertainty;
    nj["n_trajectories"] = noise->n_trajectories;
    nj["seed"] = noise->seed;
    j["noise"] = nj;
  }
  dump_json(j, path);
}

ChainConfigFile load_chain_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& ex) {
    throw DataError("bad JSON in " + path.string() + ": " + ex.what());
  }

  ChainConfigFile cfg;
  if (j.contains("chain")) {
    const json& c = j["chain"];
    if (c.contains("n_qubits")) cfg.chain.n_qubits = c["n_qubits"].get<int>();
    if (c.contains("coupling_g_rad_per_ns")) {
      cfg.chain.coupling_g = c["coupling_g_rad_per_ns"].get<double>();
    }
    if (c.contains("eta")) cfg.chain.eta = c["eta"].get<double>();
    if (c.contains("qubit_frequency_rad_per_ns")) {
      cfg.chain.qubit_frequency = c["qubit_frequency_rad_per_ns"].get<double>();
    }
  }
  if (j.contains("noise")) {
    NoiseConfig n;
    const json& nj = j["noise"];
    if (nj.contains("ej_fluctuation")) n.ej_fluctuation = nj["ej_fluctuation"];
    if (nj.contains("charge_noise")) n.charge_noise = nj["charge_noise"];
    if (nj.contains("phase_noise")) n.phase_noise = nj["phase_noise"];
    if (nj.contains("dissipation_rate")) n.dissipation_rate = nj["dissipation_rate"];
    if (nj.contains("measurement_uncertainty")) {
      n.measurement_uncertainty = nj["measurement_uncertainty"];
    }
    if (nj.contains("n_trajectories")) n.n_trajectories = nj["n_trajectories"];
    if (nj.contains("seed")) n.seed = nj["seed"].get<std::uint64_t>();
    cfg.noise = n;
  }
  return cfg;
}

// ---- ivlab --------------------------------------------------------------------

IVTrace read_iv_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open trace: " + path.string());

  IVTrace trace;
  trace.source = path.filename().string();
  std::string line;
  bool header_seen = false;
  int col_current = -1, col_voltage = -1, col_dir = -1;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_csv_line(line);
    if (!header_seen) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] == "current_A") col_current = static_cast<int>(i);
        if (fields[i] == "voltage_V") col_voltage = static_cast<int>(i);
        if (fields[i] == "sweep_dir") col_dir = static_cast<int>(i);
      }
      if (col_current < 0 || col_voltage < 0) {
        throw DataError("trace " + path.string() +
                        ": header must name current_A and voltage_V");
      }
      header_seen = true;
      continue;
    }
    const std::string ctx = path.string() + ":" + std::to_string(line_no);
    if (static_cast<int>(fields.size()) <= std::max(col_current, col_voltage)) {
      throw DataError("short row in " + ctx);
    }
    trace.current.push_back(parse_double(fields[col_current], ctx));
    trace.voltage.push_back(parse_double(fields[col_voltage], ctx));
    if (col_dir >= 0 && static_cast<int>(fields.size()) > col_dir) {
      const std::string& d = fields[col_dir];
      if (d == "up" || d == "+1" || d == "1") {
        trace.sweep_dir.push_back(+1);
      } else if (d == "down" || d == "-1") {
        trace.sweep_dir.push_back(-1);
      } else {
        throw DataError("bad sweep_dir '" + d + "' in " + ctx);
      }
    }
  }
  if (!header_seen) throw DataError("trace " + path.string() + ": no header");
  return trace;
}

void write_iv_trace_csv(const IVTrace& trace, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "# schema: qdiode.iv_trace/1\n";
  const bool dir = !trace.sweep_dir.empty();
  out << (dir ? "current_A,voltage_V,sweep_dir\n" : "current_A,voltage_V\n");
  for (std::size_t i = 0; i < trace.current.size(); ++i) {
    out << format_double(trace.current[i]) << ','
        << format_double(trace.voltage[i]);
    if (dir) out << ',' << (trace.sweep_dir[i] > 0 ? "up" : "down");
    out << "\n";
  }
}

std::optional<std::pair<double, Orientation>> parse_trace_filename(
    const std::string& filename) {
  // B<signed-oersted>_<orientation>.csv, e.g. B-13_out-of-plane.csv
  if (filename.size() < 2 || filename[0] != 'B') return std::nullopt;
  const auto underscore = filename.find('_');
  if (underscore == std::string::npos) return std::nullopt;
  const std::string field_str = filename.substr(1, underscore - 1);
  auto dot = filename.rfind(".csv");
  if (dot == std::string::npos) dot = filename.size();
  const std::string orient_str = filename.substr(underscore + 1, dot - underscore - 1);
  try {
    const double field = std::stod(field_str);
    return std::make_pair(field, orientation_from_string(orient_str));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& ex) {
    throw DataError("bad JSON in " + path.string() + ": " + ex.what());
  }
  if (!j.contains("traces") || !j["traces"].is_array()) {
    throw DataError("manifest " + path.string() + ": missing traces array");
  }

  const std::filesystem::path base = path.parent_path();
  std::vector<ManifestEntry> entries;
  for (const json& t : j["traces"]) {
    ManifestEntry e;
    if (!t.contains("file")) {
      throw DataError("manifest entry without file in " + path.string());
    }
    std::filesystem::path f = t["file"].get<std::string>();
    e.file = f.is_absolute() ? f : base / f;
    if (t.contains("b_field_oe")) e.b_field_oe = t["b_field_oe"].get<double>();
    if (t.contains("orientation")) {
      e.orientation = orientation_from_string(t["orientation"].get<std::string>());
    }
    if (t.contains("thickness_nm")) e.thickness_nm = t["thickness_nm"].get<double>();
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_manifest(const std::vector<ManifestEntry>& entries,
                    const std::filesystem::path& path) {
  json j;
  j["schema"] = "qdiode.iv_manifest/1";
  json traces = json::array();
  for (const ManifestEntry& e : entries) {
    json t;
    t["file"] = e.file.filename().string();
    if (e.b_field_oe) t["b_field_oe"] = *e.b_field_oe;
    if (e.orientation) t["orientation"] = to_string(*e.orientation);
    if (e.thickness_nm) t["thickness_nm"] = *e.thickness_nm;
    traces.push_back(t);
  }
  j["traces"] = traces;
  dump_json(j, path);
}

IvPipelineResult run_iv_pipeline(const std::filesystem::path& manifest_path,
                                 const ExtractionOptions& extraction,
                                 const FitOptions& fit_options) {
  const std::vector<ManifestEntry> entries = load_manifest(manifest_path);

  IvPipelineResult result;
  std::vector<IVTrace> traces;
  for (const ManifestEntry& e : entries) {
    try {
      IVTrace trace = read_iv_trace_csv(e.file);
      const auto from_name = parse_trace_filename(e.file.filename().string());
      if (e.b_field_oe) {
        trace.b_field = *e.b_field_oe;
      } else if (from_name) {
        trace.b_field = from_name->first;
      } else {
        throw DataError("no b_field_oe and filename not parseable");
      }
      if (e.orientation) {
        trace.orientation = *e.orientation;
      } else if (from_name) {
        trace.orientation = from_name->second;
      }
      trace.thickness_nm = e.thickness_nm;
      validate(trace);
      traces.push_back(std::move(trace));
      ++result.n_traces_loaded;
    } catch (const std::exception& ex) {
      result.warnings.push_back("skipped " + e.file.string() + ": " + ex.what());
      ++result.n_traces_skipped;
    }
  }
  if (traces.empty()) {
    throw InsufficientDataError("iv pipeline: no readable traces");
  }

  SeriesResult series = efficiency_series(traces, extraction);
  for (auto& w : series.warnings) result.warnings.push_back(std::move(w));
  result.series = std::move(series.points);
  if (result.series.size() < 4) {
    throw InsufficientDataError(
        "iv pipeline: fewer than 4 usable field points (" +
        std::to_string(result.series.size()) + ")");
  }
  result.fit = fit_sinusoid(result.series, fit_options);
  return result;
}

void write_efficiency_series_csv(const std::vector<EfficiencyPoint>& points,
                                 const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "# schema: qdiode.efficiency_series/1\n";
  out << "b_field_oe,eta,sigma_eta\n";
  for (const EfficiencyPoint& p : points) {
    out << format_double(p.b_field) << ',' << format_double(p.eta) << ','
        << format_double(p.sigma_eta) << "\n";
  }
}

void write_fit_json(const EfficiencyFit& fit, const std::filesystem::path& path) {
  json j;
  j["schema"] = "qdiode.efficiency_fit/1";
  j["a"] = fit.a;
  j["b_per_oe"] = fit.b;
  j["c_rad"] = fit.c;
  j["offset"] = fit.offset;
  j["r_squared"] = fit.r_squared;
  j["covariance"] = covariance_to_json(fit.covariance);
  j["n_points"] = fit.n_points;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["degenerate"] = fit.degenerate;
  dump_json(j, path);
}

void write_residuals_csv(const std::vector<EfficiencyPoint>& points,
                         const EfficiencyFit& fit,
                         const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "# schema: qdiode.fit_residuals/1\n";
  out << "b_field_oe,eta,sigma_eta,model,residual,weighted_residual\n";
  for (const EfficiencyPoint& p : points) {
    const double model = sinusoid_model(fit, p.b_field);
    const double res = p.eta - model;
    const double wres = p.sigma_eta > 0.0 ? res / p.sigma_eta : res;
    out << format_double(p.b_field) << ',' << format_double(p.eta) << ','
        << format_double(p.sigma_eta) << ',' << format_double(model) << ','
        << format_double(res) << ',' << format_double(wres) << "\n";
  }
}

}  // namespace qdiode
