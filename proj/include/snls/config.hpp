#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "snls/cutoff.hpp"
#include "snls/field.hpp"
#include "snls/integrator.hpp"
#include "snls/montecarlo.hpp"
#include "snls/noise.hpp"
#include "snls/probes.hpp"

namespace snls {

struct InitialDataSpec {
  enum class Family { gaussian, plane_wave, file };
  Family family = Family::gaussian;
  double amplitude = 1.0;
  double width = 1.0;                 // gaussian
  std::vector<double> center;         // gaussian; empty -> box center
  std::vector<int> mode;              // plane wave; empty -> lowest mode
  std::string path;                   // file
};

/// Everything one experiment needs; parsed from a single JSON file with
/// unknown keys rejected. All defaults are materialized on emission so the
/// written summary is self-describing.
struct ExperimentConfig {
  GridSpec grid{1, 128, 16.0};
  NoiseSpec noise;
  SolverConfig solver;
  CutoffSpec cutoff;
  InitialDataSpec initial;

  double horizon = 1.0;       // run-one horizon
  int snapshot_stride = 1;    // diagnostics row every k-th step

  int trajectories = 100;
  std::vector<double> horizons = {0.64, 0.4032, 0.254016, 0.16003, 0.100819, 0.0635161};
  bool nested = true;

  int fit_bootstrap = 200;
  double fit_fixed_beta = 0.25;  // <= 0 means free-beta fit
  bool fit_use_censored = true;  // false drops zero-success cells

  ConvolutionProbeParams bdg;
  ConvergenceProbeParams convergence;
  struct DispersiveParams {
    double p = 12.0 / 5.0;
    double t0 = 0.8;
    double t1 = 1.6;
    int samples = 12;
    double tolerance = 0.05;
  } dispersive;
  struct KhintchineParams {
    std::vector<double> rhos = {2.0, 4.0, 8.0};
    int samples = 100000;
    int dimension = 32;
  } khintchine;

  std::string out_dir = "out";
  std::uint64_t seed = 1;
  int workers = 1;

  void validate() const;
};

/// Parses and validates; throws ConfigError naming the offending key path.
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_json(const nlohmann::json& j);

/// Emits the fully-defaulted config (lossless round trip with parse).
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Materializes the configured initial data on the grid.
Field build_initial_data(const InitialDataSpec& spec, const GridSpec& grid);

/// EnsembleSetup view of the config.
EnsembleSetup ensemble_setup(const ExperimentConfig& cfg);

}  // namespace snls
