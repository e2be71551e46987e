#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ymlab {

/// Experiment description: one nested config covering the grid, the flow,
/// the density probes, and the singular-set diagnostics. Parsed from JSON;
/// canonical_config echoes it back losslessly.

struct GridSection {
  std::vector<int> extents;
  double spacing = 1.0;
};

struct GroupSection {
  int n = 1;  // unitary rank of the gauge group
};

struct InitialSection {
  std::string kind = "flat";  // flat | abelian_wave | random_bump | two_bump |
                              // planted_tube (static density, no flow)
  double amplitude = 1.0;
  std::uint64_t seed = 1;
  std::vector<int> mode;              // abelian_wave
  std::vector<double> polarization;   // abelian_wave, optional
  std::vector<double> center;         // bumps and the tube point
  std::vector<double> center2;        // two_bump
  double envelope_sharpness = 4.0;
  bool traceless = false;
  std::vector<int> axes;     // planted_tube: spanned coordinate axes
  double exponent = 4.0;     // planted_tube falloff power
  double core_radius = 0.0;  // planted_tube, 0 picks 0.75 h
};

struct FlowSection {
  double horizon = 0.0;
  double dt = 0.0;  // 0 derives the step from cfl_fraction
  double cfl_fraction = 0.1;
  int snapshot_cadence = 0;  // 0 picks one compatible with the rho ladder
  bool project_skew = true;
  double instability_tol = 0.01;
  InitialSection initial;
};

struct DensitySection {
  std::vector<double> rho_ladder;  // empty = default_ladder(grid)
  double r_trunc = 8.0;
  int j = 3;          // rungs entering the liminf surrogate
  double tau = -1.0;  // probe time, -1 = flow horizon
  std::vector<std::vector<double>> probes;  // empty = torus midpoint
  std::string probe_file;  // optional CSV "z1..zm,tau,rho" batch
};

struct SingularSection {
  double epsilon = 1.0;
  std::vector<double> s_list{0.25, 0.5};  // cone apertures
  std::vector<double> r_ladder;           // cone radii, empty = L/4, L/8, L/16
  int plane_samples = 12;                 // sampled 4-planes for slicing
  std::uint64_t seed = 7;
};

struct OutputSection {
  std::string directory = "out";
  bool write_snapshots = false;  // per-ledger-row YMF1 dumps besides the final
};

struct ExperimentConfig {
  std::string name = "experiment";
  GridSection grid;
  GroupSection group;
  FlowSection flow;
  DensitySection density;
  SingularSection singular;
  OutputSection output;
  int workers = 1;
};

/// Strict parse: unknown keys, wrong types, and out-of-range values all
/// raise ConfigError naming the offending field.
ExperimentConfig parse_config(const std::string& json_text);

/// Full echo-back; parse_config(canonical_config(c)) reproduces c exactly.
std::string canonical_config(const ExperimentConfig& c);

/// Range checks with field-precise messages; parse_config calls this too.
void validate_config(const ExperimentConfig& c);

std::vector<std::string> preset_names();
ExperimentConfig preset_config(const std::string& name);

/// Which pipeline stages run_experiment executes. The flow always runs when
/// the source is a gauge field; the flag only controls ledger/snapshot output.
struct StageSelection {
  bool flow = false;
  bool probes = false;
  bool singular = false;
  bool monotonicity = false;
  bool slices = false;
  bool cones = false;
  bool pde = false;
  bool identity = false;
};

/// Everything the config supports: skips slices/cones below m = 4 and
/// monotonicity on static sources instead of failing.
StageSelection run_stages(const ExperimentConfig& c);

struct ExperimentResult {
  std::vector<std::string> files;  // relative names, manifest.json last
  std::vector<std::string> log;    // one human-readable line per check
  int failures = 0;                // identity tolerance breaches
};

ExperimentResult run_experiment(const ExperimentConfig& c, const StageSelection& sel,
                                const std::filesystem::path& out_dir);

std::string sha256_hex(std::string_view bytes);
std::string sha256_hex_file(const std::filesystem::path& p);

}  // namespace ymlab
