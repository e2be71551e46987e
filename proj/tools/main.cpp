#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ymlab/errors.hpp"
#include "ymlab/experiment.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string preset;
  std::string output;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string probe_file;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool with_probes) {
  cmd->add_option("--config", a.config_path, "experiment config JSON file");
  cmd->add_option("--preset", a.preset, "shipped preset name");
  cmd->add_option("--output", a.output, "artifact directory (overrides config)");
  cmd->add_option("--seed", a.seed, "override initial-data and sampling seeds");
  cmd->add_option("--workers", a.workers, "worker threads (0 = hardware)");
  if (with_probes)
    cmd->add_option("--probes", a.probe_file,
                    "probe batch CSV with header 'z1..zm,tau,rho'");
}

ymlab::ExperimentConfig load_config(const CommonArgs& a) {
  if (!a.preset.empty() && !a.config_path.empty())
    throw ymlab::ConfigError("give either --config or --preset, not both");
  ymlab::ExperimentConfig c;
  if (!a.preset.empty()) {
    c = ymlab::preset_config(a.preset);
  } else if (!a.config_path.empty()) {
    std::ifstream in(a.config_path);
    if (!in) throw ymlab::ConfigError("cannot open config " + a.config_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    c = ymlab::parse_config(ss.str());
  } else {
    throw ymlab::ConfigError("need --config or --preset");
  }
  if (a.seed) {
    c.flow.initial.seed = *a.seed;
    c.singular.seed = *a.seed;
  }
  if (a.workers) c.workers = *a.workers;
  if (!a.output.empty()) c.output.directory = a.output;
  if (!a.probe_file.empty()) c.density.probe_file = a.probe_file;
  return c;
}

int execute(const CommonArgs& a,
            const std::function<ymlab::StageSelection(const ymlab::ExperimentConfig&)>& pick) {
  const ymlab::ExperimentConfig c = load_config(a);
  std::cout << ymlab::canonical_config(c);
  const ymlab::ExperimentResult res =
      ymlab::run_experiment(c, pick(c), c.output.directory);
  for (const std::string& line : res.log) std::cout << line << "\n";
  std::cout << "artifacts: " << c.output.directory << " (" << res.files.size()
            << " files)\n";
  return res.failures > 0 ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"periodic-torus Yang-Mills flow and parabolic density laboratory"};
  app.require_subcommand(1);

  CommonArgs args;
  int rc = 0;
  auto add = [&](const char* name, const char* help, bool with_probes,
                 std::function<ymlab::StageSelection(const ymlab::ExperimentConfig&)> pick) {
    CLI::App* cmd = app.add_subcommand(name, help);
    add_common(cmd, args, with_probes);
    cmd->callback([&args, &rc, pick = std::move(pick)] { rc = execute(args, pick); });
  };

  using ymlab::ExperimentConfig;
  using ymlab::StageSelection;
  add("run", "full pipeline: flow, probes, and every applicable diagnostic", false,
      [](const ExperimentConfig& c) { return ymlab::run_stages(c); });
  add("flow-run", "evolve the field and write the energy ledger", false,
      [](const ExperimentConfig&) { return StageSelection{.flow = true}; });
  add("density-probe", "evaluate theta on probe points or a CSV batch", true,
      [](const ExperimentConfig&) { return StageSelection{.probes = true}; });
  add("singular-extract", "threshold the liminf surrogate over the grid", false,
      [](const ExperimentConfig&) { return StageSelection{.singular = true}; });
  add("diag-monotonicity", "fit the minimal admissible monotonicity constant", false,
      [](const ExperimentConfig&) { return StageSelection{.monotonicity = true}; });
  add("diag-slice", "integrate theta over sampled 4-planes across the ladder", false,
      [](const ExperimentConfig&) { return StageSelection{.slices = true}; });
  add("diag-cone", "cone census of the extracted singular candidates", false,
      [](const ExperimentConfig&) { return StageSelection{.cones = true}; });
  add("diag-pde", "finite-difference residual of the density evolution equation",
      false, [](const ExperimentConfig&) { return StageSelection{.pde = true}; });
  add("identity-suite", "dissipation, rescaling, and global-integral checks", false,
      [](const ExperimentConfig&) { return StageSelection{.identity = true}; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ymlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ymlab::InvalidProbeError& e) {
    std::cerr << "invalid probe: " << e.what() << "\n";
    return 2;
  } catch (const ymlab::LadderError& e) {
    std::cerr << "ladder error: " << e.what() << "\n";
    return 2;
  } catch (const ymlab::CflError& e) {
    std::cerr << "step-size error: " << e.what() << "\n";
    return 2;
  } catch (const ymlab::SnapshotFormatError& e) {
    std::cerr << "snapshot error: " << e.what() << "\n";
    return 2;
  } catch (const ymlab::InvalidArgumentError& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return 2;
  } catch (const ymlab::FlowInstabilityError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 1;
  } catch (const ymlab::WrapContaminationError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
