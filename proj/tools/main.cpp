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

// qdiode: nonreciprocal-junction circuit toolkit.
//
// Subcommands:
//   cpr           current-phase relation tables and critical currents
//   wells         tilted-washboard spectra, bound states, eta sweeps
//   fidelity-map  forward/reverse excitation-transfer maps for qubit chains
//   iv            I-V sweep reduction: critical currents -> eta(B) fit
//
// Exit codes: 0 success, 2 invalid arguments, 3 numerical failure,
// 4 insufficient data.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qdiode/chain.hpp"
#include "qdiode/cpr.hpp"
#include "qdiode/errors.hpp"
#include "qdiode/io.hpp"
#include "qdiode/ivlab.hpp"
#include "qdiode/transmon.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qdiode;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitInsufficient = 4;

fs::path resolve_outdir(const std::string& flag_value) {
  fs::path dir;
  if (!flag_value.empty()) {
    dir = flag_value;
  } else if (const char* env = std::getenv("QDIODE_OUT"); env && *env) {
    dir = env;
  } else {
    dir = "qdiode_out";
  }
  fs::create_directories(dir);
  return dir;
}

void write_run_config(const json& config, const fs::path& outdir) {
  json j = config;
  j["schema"] = "qdiode.run_config/1";
  std::ofstream out(outdir / "run_config.json");
  out << j.dump(2) << "\n";
}

std::vector<double> make_grid(double lo, double hi, double step,
                              const std::string& what) {
  if (!(step > 0.0) || hi < lo) {
    throw std::invalid_argument("bad " + what + " grid: [" +
                                std::to_string(lo) + ", " + std::to_string(hi) +
                                "] step " + std::to_string(step));
  }
  std::vector<double> grid;
  for (double x = lo; x <= hi + 0.5 * step; x += step) grid.push_back(x);
  if (grid.empty()) grid.push_back(lo);
  return grid;
}

// --- cpr ---------------------------------------------------------------------

int cmd_cpr(double eta, double i_j, std::size_t samples,
            const std::string& out_flag) {
  const fs::path outdir = resolve_outdir(out_flag);
  const DiodeCPR cpr{eta, i_j};
  validate(cpr);

  write_cpr_table_csv(cpr, samples, outdir / "cpr_table.csv");
  write_cpr_summary_json(cpr, outdir / "cpr_summary.json");
  write_run_config({{"command", "cpr"},
                    {"eta", eta},
                    {"i_j", i_j},
                    {"samples", samples}},
                   outdir);

  const CriticalCurrentPair ic = critical_currents(cpr);
  std::cout << "eta " << eta << "  phi0 " << cpr.phi0() << " rad\n"
            << "ic_plus " << ic.ic_plus << "  ic_minus " << ic.ic_minus
            << "  efficiency " << efficiency(ic) << "\n"
            << "wrote " << (outdir / "cpr_table.csv").string() << ", "
            << (outdir / "cpr_summary.json").string() << "\n";
  return kExitOk;
}

// --- wells -------------------------------------------------------------------

struct WellsArgs {
  double ej_ec = 20.0;
  double eta = 0.276;
  double e_c_ghz = 0.0;  // 0 = report E_C units only
  double grid_min = -2.0 * std::numbers::pi;
  double grid_max = 2.0 * std::numbers::pi;
  std::size_t points = 2001;
  int n_fock = 60;
  std::string sweep;  // "lo:hi:step"
  int threads = 1;
  std::string out;
};

int cmd_wells(const WellsArgs& args) {
  const fs::path outdir = resolve_outdir(args.out);
  PhaseGrid grid;
  grid.phi_min = args.grid_min;
  grid.phi_max = args.grid_max;
  grid.n_points = args.points;
  validate(grid);

  if (!args.sweep.empty()) {
    double lo = 0, hi = 0, step = 0;
    if (std::sscanf(args.sweep.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3) {
      throw std::invalid_argument("--sweep expects lo:hi:step");
    }
    const std::vector<double> etas = make_grid(lo, hi, step, "eta");
    const TwoLevelSweep sweep =
        sweep_two_level_window(args.ej_ec, etas, grid, args.threads);
    write_sweep_csv(sweep, outdir / "sweep_counts.csv");
    write_windows_json(sweep, outdir / "two_level_windows.json");
    write_run_config({{"command", "wells"},
                      {"ej_ec", args.ej_ec},
                      {"sweep", args.sweep},
                      {"grid_min", grid.phi_min},
                      {"grid_max", grid.phi_max},
                      {"points", grid.n_points}},
                     outdir);
    std::cout << "sweep of " << etas.size() << " eta values; "
              << sweep.two_level_windows.size() << " two-level window(s)\n";
    for (const EtaInterval& w : sweep.two_level_windows) {
      std::cout << "  exactly-2 window: [" << w.lo << ", " << w.hi << "]\n";
    }
    std::cout << "wrote " << (outdir / "sweep_counts.csv").string() << ", "
              << (outdir / "two_level_windows.json").string() << "\n";
    return kExitOk;
  }

  TransmonParams params;
  params.e_j = args.ej_ec;
  params.e_c = 1.0;
  params.eta = args.eta;
  validate(params);
  if (!params.in_transmon_regime()) {
    std::cerr << "warning: e_j/e_c = " << args.ej_ec
              << " is below the charge-insensitive regime (>= 10)\n";
  }

  const WellResult res = solve_wells(params, grid);
  write_potential_csv(params, grid, outdir / "potential.csv");
  write_spectrum_csv(res.spectrum, res.analysis, outdir / "spectrum.csv");
  write_spectrum_json(res.spectrum, res.analysis, outdir / "spectrum.json");

  json summary;
  summary["schema"] = "qdiode.wells_summary/1";
  summary["bound_count"] = res.analysis.bound_state_indices.size();
  summary["barrier_energy"] = res.analysis.barrier_energy;
  summary["well_left"] = res.analysis.well_left;
  summary["well_right"] = res.analysis.well_right;
  summary["well_min_phi"] = res.analysis.well_min_phi;

  std::vector<double> bound_energies;
  for (std::size_t idx : res.analysis.bound_state_indices) {
    bound_energies.push_back(res.spectrum.energies[idx]);
  }
  const bool from_bound = bound_energies.size() >= 3;
  const std::vector<double>& freq_src =
      from_bound ? bound_energies : res.spectrum.energies;
  if (freq_src.size() >= 3) {
    const QubitFrequencies f = qubit_frequencies(freq_src);
    summary["frequency_source"] = from_bound ? "bound_states" : "lowest_levels";
    summary["omega01"] = f.omega01;
    summary["omega12"] = f.omega12;
    summary["anharmonicity"] = f.anharmonicity;
    if (args.e_c_ghz > 0.0) {
      summary["e_c_ghz"] = args.e_c_ghz;
      summary["omega01_ghz"] = f.omega01 * args.e_c_ghz;
      summary["omega12_ghz"] = f.omega12 * args.e_c_ghz;
      summary["anharmonicity_ghz"] = f.anharmonicity * args.e_c_ghz;
    }
  }

  const TruncatedSpectrum trunc = solve_truncated(params, args.n_fock);
  summary["n_fock"] = args.n_fock;
  summary["truncated_levels"] = trunc.physical_energies;
  if (trunc.physical_energies.size() >= 3) {
    const QubitFrequencies ft = qubit_frequencies(trunc.physical_energies);
    summary["truncated_omega01"] = ft.omega01;
    summary["truncated_anharmonicity"] = ft.anharmonicity;
  }
  std::ofstream(outdir / "wells_summary.json") << summary.dump(2) << "\n";

  write_run_config({{"command", "wells"},
                    {"ej_ec", args.ej_ec},
                    {"eta", args.eta},
                    {"e_c_ghz", args.e_c_ghz},
                    {"grid_min", grid.phi_min},
                    {"grid_max", grid.phi_max},
                    {"points", grid.n_points},
                    {"n_fock", args.n_fock}},
                   outdir);

  std::cout << "bound_count=" << res.analysis.bound_state_indices.size()
            << " barrier=" << res.analysis.barrier_energy << " E_C\n"
            << "wrote " << (outdir / "spectrum.csv").string() << ", "
            << (outdir / "wells_summary.json").string() << "\n";
  return kExitOk;
}

// --- fidelity-map ------------------------------------------------------------

struct MapArgs {
  std::string config_file;
  double eta_min = 0.0, eta_max = 0.9, eta_step = 0.05;
  double t_min = 1.0, t_max = 10.0, t_step = 0.25;
  bool noise = false;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int trajectories = 0;
  int threads = 1;
  double threshold = 0.5;
  std::string out;
};

int cmd_fidelity_map(const MapArgs& args) {
  const fs::path outdir = resolve_outdir(args.out);

  ChainConfig config;
  std::optional<NoiseConfig> noise;
  if (!args.config_file.empty()) {
    const ChainConfigFile file = load_chain_config(args.config_file);
    config = file.chain;
    if (file.noise) noise = file.noise;
  }
  if (args.noise && !noise) noise = NoiseConfig{};
  if (noise) {
    if (args.seed_set) noise->seed = args.seed;
    if (args.trajectories > 0) noise->n_trajectories = args.trajectories;
  }

  const std::vector<double> eta_grid =
      make_grid(args.eta_min, args.eta_max, args.eta_step, "eta");
  const std::vector<double> t_grid =
      make_grid(args.t_min, args.t_max, args.t_step, "time");

  const FidelityMap map =
      fidelity_map(config, eta_grid, t_grid, noise, args.threads);
  write_fidelity_map_csv(map, outdir / "fidelity_map.csv");
  write_map_summary_json(map, config, noise, args.threshold,
                         outdir / "map_summary.json");

  json rc{{"command", "fidelity-map"},
          {"eta_min", args.eta_min},
          {"eta_max", args.eta_max},
          {"eta_step", args.eta_step},
          {"t_min", args.t_min},
          {"t_max", args.t_max},
          {"t_step", args.t_step},
          {"noise", noise.has_value()},
          {"threads", args.threads},
          {"threshold", args.threshold},
          {"n_qubits", config.n_qubits},
          {"coupling_g_rad_per_ns", config.coupling_g},
          {"qubit_frequency_rad_per_ns", config.qubit_frequency}};
  if (noise) {
    rc["seed"] = noise->seed;
    rc["n_trajectories"] = noise->n_trajectories;
    rc["ej_fluctuation"] = noise->ej_fluctuation;
    rc["charge_noise"] = noise->charge_noise;
    rc["phase_noise"] = noise->phase_noise;
    rc["dissipation_rate"] = noise->dissipation_rate;
    rc["measurement_uncertainty"] = noise->measurement_uncertainty;
  }
  write_run_config(rc, outdir);

  const PeakCell peak = peak_difference(map);
  std::cout << "map " << eta_grid.size() << " x " << t_grid.size()
            << (map.noise_applied ? " (noisy)" : " (noiseless)")
            << "  peak difference " << peak.value << " at eta="
            << map.eta_axis[peak.eta_index] << ", t="
            << map.time_axis[peak.time_index] << " ns\n"
            << "wrote " << (outdir / "fidelity_map.csv").string() << ", "
            << (outdir / "map_summary.json").string() << "\n";
  return kExitOk;
}

// --- iv ----------------------------------------------------------------------

struct IvArgs {
  std::string manifest;
  double threshold_factor = 5.0;
  int resamples = 100;
  int window = 5;
  std::uint64_t seed = 0xb00f5ULL;
  bool offset = false;
  std::string out;
};

int cmd_iv(const IvArgs& args) {
  const fs::path outdir = resolve_outdir(args.out);

  ExtractionOptions extraction;
  extraction.gradient_threshold_factor = args.threshold_factor;
  extraction.n_resamples = args.resamples;
  extraction.window_halfwidth = args.window;
  extraction.seed = args.seed;

  FitOptions fit_options;
  fit_options.with_offset = args.offset;

  const IvPipelineResult result =
      run_iv_pipeline(args.manifest, extraction, fit_options);
  for (const std::string& w : result.warnings) {
    std::cerr << "warning: " << w << "\n";
  }

  write_efficiency_series_csv(result.series, outdir / "efficiency_series.csv");
  write_fit_json(result.fit, outdir / "fit.json");
  write_residuals_csv(result.series, result.fit, outdir / "residuals.csv");
  write_run_config({{"command", "iv"},
                    {"manifest", fs::path(args.manifest).filename().string()},
                    {"threshold_factor", args.threshold_factor},
                    {"resamples", args.resamples},
                    {"window", args.window},
                    {"seed", args.seed},
                    {"offset", args.offset}},
                   outdir);

  std::cout << "fields " << result.series.size() << " (skipped "
            << result.n_traces_skipped << ")  fit: a=" << result.fit.a
            << " b=" << result.fit.b << " c=" << result.fit.c
            << " R2=" << result.fit.r_squared
            << (result.fit.converged ? "" : " [not converged]") << "\n"
            << "wrote " << (outdir / "efficiency_series.csv").string() << ", "
            << (outdir / "fit.json").string() << ", "
            << (outdir / "residuals.csv").string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qdiode: nonreciprocal-junction circuit toolkit"};
  app.require_subcommand(1);

  // cpr
  double cpr_eta = 0.0, cpr_ij = 1.0;
  std::size_t cpr_samples = 513;
  std::string cpr_out;
  CLI::App* cpr = app.add_subcommand("cpr", "current-phase relation summary");
  cpr->add_option("--eta", cpr_eta, "diode efficiency fraction, |eta| < 1")
      ->required();
  cpr->add_option("--i-j", cpr_ij, "junction critical-current scale");
  cpr->add_option("--samples", cpr_samples, "table rows over [-2pi, 2pi]");
  cpr->add_option("--out", cpr_out, "output directory");

  // wells
  WellsArgs wargs;
  CLI::App* wells = app.add_subcommand("wells", "tilted-well spectra and sweeps");
  wells->add_option("--ej-ec", wargs.ej_ec, "E_J / E_C ratio");
  wells->add_option("--eta", wargs.eta, "diode efficiency fraction");
  wells->add_option("--e-c-ghz", wargs.e_c_ghz, "E_C in GHz*h for GHz outputs");
  wells->add_option("--grid-min", wargs.grid_min, "phase grid lower bound, rad");
  wells->add_option("--grid-max", wargs.grid_max, "phase grid upper bound, rad");
  wells->add_option("--points", wargs.points, "grid points (odd)");
  wells->add_option("--n-fock", wargs.n_fock, "oscillator basis size");
  wells->add_option("--sweep", wargs.sweep, "eta sweep lo:hi:step");
  wells->add_option("--threads", wargs.threads,
                    "sweep worker threads (identical results for any value)");
  wells->add_option("--out", wargs.out, "output directory");

  // fidelity-map
  MapArgs margs;
  CLI::App* fmap = app.add_subcommand("fidelity-map",
                                      "forward/reverse transfer fidelity map");
  fmap->add_option("--config", margs.config_file, "chain/noise JSON config");
  fmap->add_option("--eta-min", margs.eta_min, "eta grid start");
  fmap->add_option("--eta-max", margs.eta_max, "eta grid end");
  fmap->add_option("--eta-step", margs.eta_step, "eta grid step");
  fmap->add_option("--t-min", margs.t_min, "time grid start, ns");
  fmap->add_option("--t-max", margs.t_max, "time grid end, ns");
  fmap->add_option("--t-step", margs.t_step, "time grid step, ns");
  fmap->add_flag("--noise", margs.noise, "apply the quasi-static noise model");
  auto* seed_opt = fmap->add_option("--seed", margs.seed, "noise PRNG seed");
  fmap->add_option("--trajectories", margs.trajectories,
                   "Monte Carlo trajectories per cell");
  fmap->add_option("--threads", margs.threads,
                   "worker threads (identical results for any value)");
  fmap->add_option("--threshold", margs.threshold,
                   "asymmetry-region difference threshold");
  fmap->add_option("--out", margs.out, "output directory");

  // iv
  IvArgs ivargs;
  CLI::App* iv = app.add_subcommand("iv", "I-V sweep reduction and eta(B) fit");
  iv->add_option("--manifest", ivargs.manifest, "trace manifest JSON")
      ->required();
  iv->add_option("--threshold-factor", ivargs.threshold_factor,
                 "gradient threshold factor");
  iv->add_option("--resamples", ivargs.resamples, "bootstrap resamples");
  iv->add_option("--window", ivargs.window, "bootstrap window halfwidth");
  iv->add_option("--seed", ivargs.seed, "bootstrap PRNG seed");
  iv->add_flag("--offset", ivargs.offset, "fit an additive offset term");
  iv->add_option("--out", ivargs.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (cpr->parsed()) return cmd_cpr(cpr_eta, cpr_ij, cpr_samples, cpr_out);
    if (wells->parsed()) return cmd_wells(wargs);
    if (fmap->parsed()) {
      margs.seed_set = seed_opt->count() > 0;
      return cmd_fidelity_map(margs);
    }
    if (iv->parsed()) return cmd_iv(ivargs);
  } catch (const InsufficientDataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInsufficient;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return iv->parsed() ? kExitUsage : kExitNumeric;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitUsage;
}
