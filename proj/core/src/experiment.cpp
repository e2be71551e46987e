#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include <json.hpp>

#include "ymlab/density.hpp"
#include "ymlab/errors.hpp"
#include "ymlab/experiment.hpp"
#include "ymlab/field.hpp"
#include "ymlab/flow.hpp"
#include "ymlab/geometry.hpp"
#include "ymlab/grid.hpp"
#include "ymlab/parallel.hpp"
#include "ymlab/snapshot.hpp"

namespace ymlab {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> keys) {
  if (!j.is_object()) bad(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const bool known = std::any_of(keys.begin(), keys.end(),
                                   [&](const char* k) { return it.key() == k; });
    if (!known) bad(path + "." + it.key(), "unknown key");
  }
}

template <class F>
void with(const json& parent, const std::string& path, const char* key, F f) {
  auto it = parent.find(key);
  if (it != parent.end()) f(*it, path + "." + key);
}

void as_double(const json& v, const std::string& p, double& out) {
  if (!v.is_number()) bad(p, "expected a number");
  out = v.get<double>();
}

void as_int(const json& v, const std::string& p, int& out) {
  if (!v.is_number_integer()) bad(p, "expected an integer");
  const long long x = v.get<long long>();
  if (x < INT_MIN || x > INT_MAX) bad(p, "integer out of range");
  out = static_cast<int>(x);
}

void as_u64(const json& v, const std::string& p, std::uint64_t& out) {
  if (v.is_number_unsigned()) {
    out = v.get<std::uint64_t>();
    return;
  }
  if (v.is_number_integer() && v.get<long long>() >= 0) {
    out = static_cast<std::uint64_t>(v.get<long long>());
    return;
  }
  bad(p, "expected a nonnegative integer");
}

void as_bool(const json& v, const std::string& p, bool& out) {
  if (!v.is_boolean()) bad(p, "expected a boolean");
  out = v.get<bool>();
}

void as_string(const json& v, const std::string& p, std::string& out) {
  if (!v.is_string()) bad(p, "expected a string");
  out = v.get<std::string>();
}

void as_ints(const json& v, const std::string& p, std::vector<int>& out) {
  if (!v.is_array()) bad(p, "expected an array of integers");
  out.clear();
  for (std::size_t i = 0; i < v.size(); ++i) {
    int x = 0;
    as_int(v[i], p + "[" + std::to_string(i) + "]", x);
    out.push_back(x);
  }
}

void as_doubles(const json& v, const std::string& p, std::vector<double>& out) {
  if (!v.is_array()) bad(p, "expected an array of numbers");
  out.clear();
  for (std::size_t i = 0; i < v.size(); ++i) {
    double x = 0;
    as_double(v[i], p + "[" + std::to_string(i) + "]", x);
    out.push_back(x);
  }
}

void as_points(const json& v, const std::string& p,
               std::vector<std::vector<double>>& out) {
  if (!v.is_array()) bad(p, "expected an array of points");
  out.clear();
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::vector<double> pt;
    as_doubles(v[i], p + "[" + std::to_string(i) + "]", pt);
    out.push_back(std::move(pt));
  }
}

void parse_initial(const json& j, const std::string& path, InitialSection& s) {
  check_keys(j, path,
             {"kind", "amplitude", "seed", "mode", "polarization", "center",
              "center2", "envelope_sharpness", "traceless", "axes", "exponent",
              "core_radius"});
  with(j, path, "kind", [&](const json& v, const std::string& p) { as_string(v, p, s.kind); });
  with(j, path, "amplitude", [&](const json& v, const std::string& p) { as_double(v, p, s.amplitude); });
  with(j, path, "seed", [&](const json& v, const std::string& p) { as_u64(v, p, s.seed); });
  with(j, path, "mode", [&](const json& v, const std::string& p) { as_ints(v, p, s.mode); });
  with(j, path, "polarization", [&](const json& v, const std::string& p) { as_doubles(v, p, s.polarization); });
  with(j, path, "center", [&](const json& v, const std::string& p) { as_doubles(v, p, s.center); });
  with(j, path, "center2", [&](const json& v, const std::string& p) { as_doubles(v, p, s.center2); });
  with(j, path, "envelope_sharpness", [&](const json& v, const std::string& p) { as_double(v, p, s.envelope_sharpness); });
  with(j, path, "traceless", [&](const json& v, const std::string& p) { as_bool(v, p, s.traceless); });
  with(j, path, "axes", [&](const json& v, const std::string& p) { as_ints(v, p, s.axes); });
  with(j, path, "exponent", [&](const json& v, const std::string& p) { as_double(v, p, s.exponent); });
  with(j, path, "core_radius", [&](const json& v, const std::string& p) { as_double(v, p, s.core_radius); });
}

json dump_initial(const InitialSection& s) {
  json j;
  j["kind"] = s.kind;
  j["amplitude"] = s.amplitude;
  j["seed"] = s.seed;
  j["mode"] = s.mode;
  j["polarization"] = s.polarization;
  j["center"] = s.center;
  j["center2"] = s.center2;
  j["envelope_sharpness"] = s.envelope_sharpness;
  j["traceless"] = s.traceless;
  j["axes"] = s.axes;
  j["exponent"] = s.exponent;
  j["core_radius"] = s.core_radius;
  return j;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string z_header(int m) {
  std::string h;
  for (int i = 0; i < m; ++i) {
    if (i) h += ',';
    h += 'z' + std::to_string(i + 1);
  }
  return h;
}

void append_point(std::ostringstream& os, std::span<const double> z) {
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (i) os << ',';
    os << fmt(z[i]);
  }
}

/// Tracks every artifact so the manifest can list them all.
class ArtifactDir {
 public:
  ArtifactDir(std::filesystem::path dir, ExperimentResult& res)
      : dir_(std::move(dir)), res_(res) {
    std::filesystem::create_directories(dir_);
  }
  void write_text(const std::string& name, const std::string& content) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
    out << content;
    res_.files.push_back(name);
  }
  void note(const std::string& name) { res_.files.push_back(name); }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  ExperimentResult& res_;
};

struct ProbeRow {
  std::vector<double> z;
  double tau = 0.0;
  double rho = 0.0;
};

std::vector<ProbeRow> read_probe_csv(const std::string& path, int m) {
  std::ifstream in(path);
  if (!in) bad("density.probe_file", "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) bad("density.probe_file", "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::string want = z_header(m) + ",tau,rho";
  if (line != want)
    bad("density.probe_file", "header must be '" + want + "', got '" + line + "'");
  std::vector<ProbeRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        const double x = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        vals.push_back(x);
      } catch (const std::exception&) {
        bad("density.probe_file", "line " + std::to_string(lineno) +
                                      ": '" + cell + "' is not a number");
      }
    }
    if (static_cast<int>(vals.size()) != m + 2)
      bad("density.probe_file",
          "line " + std::to_string(lineno) + ": expected " +
              std::to_string(m + 2) + " columns");
    ProbeRow r;
    r.z.assign(vals.begin(), vals.begin() + m);
    r.tau = vals[m];
    r.rho = vals[m + 1];
    rows.push_back(std::move(r));
  }
  return rows;
}

InitialData to_initial_data(const ExperimentConfig& c) {
  InitialData d;
  d.kind = c.flow.initial.kind;
  d.n = c.group.n;
  d.amplitude = c.flow.initial.amplitude;
  d.mode = c.flow.initial.mode;
  d.polarization = c.flow.initial.polarization;
  d.center = c.flow.initial.center;
  d.center2 = c.flow.initial.center2;
  d.envelope_sharpness = c.flow.initial.envelope_sharpness;
  d.traceless = c.flow.initial.traceless;
  d.seed = c.flow.initial.seed;
  return d;
}

bool is_gauge_kind(const std::string& kind) {
  return kind == "flat" || kind == "abelian_wave" || kind == "random_bump" ||
         kind == "two_bump";
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config: not valid JSON");
  check_keys(j, "config",
             {"name", "grid", "group", "flow", "density", "singular", "output",
              "workers"});
  ExperimentConfig c;
  with(j, "config", "name", [&](const json& v, const std::string& p) { as_string(v, p, c.name); });
  with(j, "config", "workers", [&](const json& v, const std::string& p) { as_int(v, p, c.workers); });
  with(j, "config", "grid", [&](const json& v, const std::string& p) {
    check_keys(v, p, {"extents", "spacing"});
    with(v, p, "extents", [&](const json& w, const std::string& q) { as_ints(w, q, c.grid.extents); });
    with(v, p, "spacing", [&](const json& w, const std::string& q) { as_double(w, q, c.grid.spacing); });
  });
  with(j, "config", "group", [&](const json& v, const std::string& p) {
    check_keys(v, p, {"n"});
    with(v, p, "n", [&](const json& w, const std::string& q) { as_int(w, q, c.group.n); });
  });
  with(j, "config", "flow", [&](const json& v, const std::string& p) {
    check_keys(v, p,
               {"horizon", "dt", "cfl_fraction", "snapshot_cadence",
                "project_skew", "instability_tol", "initial"});
    with(v, p, "horizon", [&](const json& w, const std::string& q) { as_double(w, q, c.flow.horizon); });
    with(v, p, "dt", [&](const json& w, const std::string& q) { as_double(w, q, c.flow.dt); });
    with(v, p, "cfl_fraction", [&](const json& w, const std::string& q) { as_double(w, q, c.flow.cfl_fraction); });
    with(v, p, "snapshot_cadence", [&](const json& w, const std::string& q) { as_int(w, q, c.flow.snapshot_cadence); });
    with(v, p, "project_skew", [&](const json& w, const std::string& q) { as_bool(w, q, c.flow.project_skew); });
    with(v, p, "instability_tol", [&](const json& w, const std::string& q) { as_double(w, q, c.flow.instability_tol); });
    with(v, p, "initial", [&](const json& w, const std::string& q) { parse_initial(w, q, c.flow.initial); });
  });
  with(j, "config", "density", [&](const json& v, const std::string& p) {
    check_keys(v, p, {"rho_ladder", "r_trunc", "j", "tau", "probes", "probe_file"});
    with(v, p, "rho_ladder", [&](const json& w, const std::string& q) { as_doubles(w, q, c.density.rho_ladder); });
    with(v, p, "r_trunc", [&](const json& w, const std::string& q) { as_double(w, q, c.density.r_trunc); });
    with(v, p, "j", [&](const json& w, const std::string& q) { as_int(w, q, c.density.j); });
    with(v, p, "tau", [&](const json& w, const std::string& q) { as_double(w, q, c.density.tau); });
    with(v, p, "probes", [&](const json& w, const std::string& q) { as_points(w, q, c.density.probes); });
    with(v, p, "probe_file", [&](const json& w, const std::string& q) { as_string(w, q, c.density.probe_file); });
  });
  with(j, "config", "singular", [&](const json& v, const std::string& p) {
    check_keys(v, p, {"epsilon", "s_list", "r_ladder", "plane_samples", "seed"});
    with(v, p, "epsilon", [&](const json& w, const std::string& q) { as_double(w, q, c.singular.epsilon); });
    with(v, p, "s_list", [&](const json& w, const std::string& q) { as_doubles(w, q, c.singular.s_list); });
    with(v, p, "r_ladder", [&](const json& w, const std::string& q) { as_doubles(w, q, c.singular.r_ladder); });
    with(v, p, "plane_samples", [&](const json& w, const std::string& q) { as_int(w, q, c.singular.plane_samples); });
    with(v, p, "seed", [&](const json& w, const std::string& q) { as_u64(w, q, c.singular.seed); });
  });
  with(j, "config", "output", [&](const json& v, const std::string& p) {
    check_keys(v, p, {"directory", "write_snapshots"});
    with(v, p, "directory", [&](const json& w, const std::string& q) { as_string(w, q, c.output.directory); });
    with(v, p, "write_snapshots", [&](const json& w, const std::string& q) { as_bool(w, q, c.output.write_snapshots); });
  });
  validate_config(c);
  return c;
}

std::string canonical_config(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["workers"] = c.workers;
  j["grid"] = {{"extents", c.grid.extents}, {"spacing", c.grid.spacing}};
  j["group"] = {{"n", c.group.n}};
  json flow;
  flow["horizon"] = c.flow.horizon;
  flow["dt"] = c.flow.dt;
  flow["cfl_fraction"] = c.flow.cfl_fraction;
  flow["snapshot_cadence"] = c.flow.snapshot_cadence;
  flow["project_skew"] = c.flow.project_skew;
  flow["instability_tol"] = c.flow.instability_tol;
  flow["initial"] = dump_initial(c.flow.initial);
  j["flow"] = std::move(flow);
  json density;
  density["rho_ladder"] = c.density.rho_ladder;
  density["r_trunc"] = c.density.r_trunc;
  density["j"] = c.density.j;
  density["tau"] = c.density.tau;
  density["probes"] = c.density.probes;
  density["probe_file"] = c.density.probe_file;
  j["density"] = std::move(density);
  json singular;
  singular["epsilon"] = c.singular.epsilon;
  singular["s_list"] = c.singular.s_list;
  singular["r_ladder"] = c.singular.r_ladder;
  singular["plane_samples"] = c.singular.plane_samples;
  singular["seed"] = c.singular.seed;
  j["singular"] = std::move(singular);
  j["output"] = {{"directory", c.output.directory},
                 {"write_snapshots", c.output.write_snapshots}};
  return j.dump(2) + "\n";
}

void validate_config(const ExperimentConfig& c) {
  if (c.name.empty()) bad("name", "must be non-empty");
  if (c.grid.extents.empty()) bad("grid.extents", "required");
  if (c.grid.extents.size() > 16) bad("grid.extents", "at most 16 axes");
  double volume = 1.0;
  for (std::size_t i = 0; i < c.grid.extents.size(); ++i) {
    if (c.grid.extents[i] < 4)
      bad("grid.extents[" + std::to_string(i) + "]", "must be >= 4");
    volume *= c.grid.extents[i];
  }
  if (volume > 4294967296.0) bad("grid.extents", "site count exceeds 2^32");
  if (!(c.grid.spacing > 0.0) || !std::isfinite(c.grid.spacing))
    bad("grid.spacing", "must be a positive number");
  if (c.group.n < 1 || c.group.n > 64) bad("group.n", "must be in [1, 64]");

  const std::string& kind = c.flow.initial.kind;
  if (!is_gauge_kind(kind) && kind != "planted_tube")
    bad("flow.initial.kind",
        "unknown kind '" + kind +
            "' (flat, abelian_wave, random_bump, two_bump, planted_tube)");
  if (!(c.flow.horizon >= 0.0) || !std::isfinite(c.flow.horizon))
    bad("flow.horizon", "must be >= 0");
  if (kind == "planted_tube" && c.flow.horizon != 0.0)
    bad("flow.horizon", "must be 0 for a planted_tube source");
  if (c.flow.dt < 0.0 || !std::isfinite(c.flow.dt)) bad("flow.dt", "must be >= 0");
  if (!(c.flow.cfl_fraction > 0.0) || c.flow.cfl_fraction > 1.0)
    bad("flow.cfl_fraction", "must be in (0, 1]");
  if (c.flow.snapshot_cadence < 0) bad("flow.snapshot_cadence", "must be >= 0");
  if (!(c.flow.instability_tol > 0.0)) bad("flow.instability_tol", "must be > 0");
  if (!std::isfinite(c.flow.initial.amplitude))
    bad("flow.initial.amplitude", "must be finite");
  const int m = static_cast<int>(c.grid.extents.size());
  auto check_size = [&](const std::vector<double>& v, const char* field) {
    if (!v.empty() && static_cast<int>(v.size()) != m)
      bad(std::string("flow.initial.") + field,
          "needs " + std::to_string(m) + " entries");
  };
  check_size(c.flow.initial.polarization, "polarization");
  check_size(c.flow.initial.center, "center");
  check_size(c.flow.initial.center2, "center2");
  if (!c.flow.initial.mode.empty() &&
      static_cast<int>(c.flow.initial.mode.size()) != m)
    bad("flow.initial.mode", "needs " + std::to_string(m) + " entries");
  if (kind == "abelian_wave" && c.flow.initial.mode.empty())
    bad("flow.initial.mode", "required for abelian_wave");
  for (int axis : c.flow.initial.axes)
    if (axis < 0 || axis >= m) bad("flow.initial.axes", "axis out of range");
  if (!(c.flow.initial.exponent > 0.0))
    bad("flow.initial.exponent", "must be > 0");
  if (c.flow.initial.core_radius < 0.0)
    bad("flow.initial.core_radius", "must be >= 0");

  if (c.density.r_trunc < 2.0 || c.density.r_trunc > 8.0)
    bad("density.r_trunc", "must be in [2, 8]");
  if (c.density.j < 1) bad("density.j", "must be >= 1");
  if (c.density.tau != -1.0 && c.density.tau < 0.0)
    bad("density.tau", "must be >= 0, or -1 for the flow horizon");
  for (std::size_t i = 0; i < c.density.rho_ladder.size(); ++i)
    if (!(c.density.rho_ladder[i] > 0.0))
      bad("density.rho_ladder[" + std::to_string(i) + "]", "must be > 0");
  for (std::size_t i = 0; i < c.density.probes.size(); ++i)
    if (static_cast<int>(c.density.probes[i].size()) != m)
      bad("density.probes[" + std::to_string(i) + "]",
          "needs " + std::to_string(m) + " coordinates");

  if (!(c.singular.epsilon > 0.0)) bad("singular.epsilon", "must be > 0");
  for (std::size_t i = 0; i < c.singular.s_list.size(); ++i)
    if (!(c.singular.s_list[i] > 0.0) || c.singular.s_list[i] >= 1.0)
      bad("singular.s_list[" + std::to_string(i) + "]", "must be in (0, 1)");
  for (std::size_t i = 0; i < c.singular.r_ladder.size(); ++i)
    if (!(c.singular.r_ladder[i] > 0.0))
      bad("singular.r_ladder[" + std::to_string(i) + "]", "must be > 0");
  if (c.singular.plane_samples < 1) bad("singular.plane_samples", "must be >= 1");

  if (c.output.directory.empty()) bad("output.directory", "must be non-empty");
  if (c.workers < 0 || c.workers > 256) bad("workers", "must be in [0, 256]");
}

StageSelection run_stages(const ExperimentConfig& c) {
  StageSelection s;
  const bool gauge = is_gauge_kind(c.flow.initial.kind);
  const int m = static_cast<int>(c.grid.extents.size());
  s.flow = gauge && c.flow.horizon > 0.0;
  s.probes = true;
  s.singular = true;
  s.monotonicity = gauge && c.flow.horizon > 0.0;
  s.slices = m >= 4;
  s.cones = m >= 4 || c.flow.initial.kind == "planted_tube";
  s.pde = true;
  return s;
}

ExperimentResult run_experiment(const ExperimentConfig& c, const StageSelection& sel,
                                const std::filesystem::path& out_dir) {
  validate_config(c);
  set_workers(c.workers);
  ExperimentResult res;
  ArtifactDir art(out_dir, res);
  art.write_text("config_echo.json", canonical_config(c));

  Grid g(c.grid.extents, c.grid.spacing);
  const int m = g.dim();
  const double h = g.spacing();

  std::vector<double> ladder = c.density.rho_ladder;
  if (ladder.empty())
    ladder = default_ladder(g);
  else
    std::sort(ladder.begin(), ladder.end(), std::greater<>());
  const double rho_top = ladder.front();
  const double rho_min = ladder.back();

  QuadratureConfig q;
  q.r_trunc = c.density.r_trunc;

  std::vector<std::vector<double>> probes = c.density.probes;
  if (probes.empty()) {
    std::vector<double> mid(m);
    for (int i = 0; i < m; ++i) mid[i] = 0.5 * g.length(i);
    probes.push_back(std::move(mid));
  }

  std::optional<EnergySeries> series;
  std::optional<ScalarField> e_static;
  double ym0 = 0.0;
  double balance_residual = 0.0;
  double tau_probe = c.density.tau;

  if (c.flow.initial.kind == "planted_tube") {
    TubeSpec ts;
    ts.point = c.flow.initial.center;
    if (ts.point.empty()) {
      ts.point.resize(m);
      for (int i = 0; i < m; ++i) ts.point[i] = 0.5 * g.length(i);
    }
    ts.axes = c.flow.initial.axes;
    ts.amplitude = c.flow.initial.amplitude;
    ts.exponent = c.flow.initial.exponent;
    ts.core_radius = c.flow.initial.core_radius;
    e_static = synthetic_tube_density(g, ts);
    ym0 = scalar_sum(*e_static) * std::pow(h, m);
    if (tau_probe < 0.0) tau_probe = 0.0;
    res.log.push_back("source: planted tube, total energy " + fmt(ym0));
  } else if (c.flow.horizon == 0.0) {
    LieField a0 = make_initial(g, to_initial_data(c));
    e_static = energy_density(curvature(a0));
    ym0 = scalar_sum(*e_static) * std::pow(h, m);
    if (tau_probe < 0.0) tau_probe = 0.0;
    res.log.push_back("source: static initial data, ym " + fmt(ym0));
  } else {
    FlowParams p;
    p.horizon = c.flow.horizon;
    if (c.flow.dt > 0.0) p.dt = c.flow.dt;
    p.cfl_fraction = c.flow.cfl_fraction;
    p.project_skew_each_step = c.flow.project_skew;
    p.instability_tol = c.flow.instability_tol;
    int cadence = c.flow.snapshot_cadence;
    if (cadence == 0) {
      const double dt_nominal = c.flow.dt > 0.0 ? c.flow.dt : c.flow.cfl_fraction * h * h;
      cadence = std::max(1, static_cast<int>(std::floor(
                                rho_min * rho_min / 4.0 / dt_nominal)));
    }
    p.snapshot_cadence = cadence;
    EnergySeries s;
    const bool dump_rows = sel.flow && c.output.write_snapshots;
    FlowResult fr = run_flow(make_initial(g, to_initial_data(c)), p,
                             [&](double tau, const LieField& a, int step) {
                               s.push(tau, energy_density(curvature(a)));
                               if (dump_rows) {
                                 char name[32];
                                 std::snprintf(name, sizeof name,
                                               "snapshot_%06d.ymf", step);
                                 write_field(art.dir() / name, a, tau);
                                 art.note(name);
                               }
                             });
    series = std::move(s);
    ym0 = fr.ledger.front().ym;
    balance_residual = fr.ledger.back().residual;
    if (tau_probe < 0.0) tau_probe = c.flow.horizon;
    if (sel.flow) {
      std::ostringstream csv;
      csv << "tau,ym,dissipation_cum,residual\n";
      for (const LedgerRow& r : fr.ledger)
        csv << fmt(r.tau) << ',' << fmt(r.ym) << ',' << fmt(r.dissipation_cum)
            << ',' << fmt(r.residual) << '\n';
      art.write_text("ledger.csv", csv.str());
      write_field(art.dir() / "field_final.ymf", fr.a, c.flow.horizon);
      art.note("field_final.ymf");
      res.log.push_back("flow: " + std::to_string(fr.steps) + " steps, dt " +
                        fmt(fr.dt) + ", ym " + fmt(ym0) + " -> " +
                        fmt(fr.ledger.back().ym) + ", balance residual " +
                        fmt(balance_residual));
    }
  }

  auto theta_at = [&](std::span<const double> z, double rho, double tau) {
    return e_static ? theta(*e_static, z, rho, q)
                    : theta_at_time(*series, z, rho, tau, q);
  };
  auto field_at = [&](double rho) {
    return e_static ? *e_static : series->at(tau_probe - rho * rho);
  };

  if (sel.probes) {
    std::ostringstream csv;
    csv << z_header(m) << ",tau,rho,theta\n";
    int rows = 0;
    if (!c.density.probe_file.empty()) {
      for (const ProbeRow& r : read_probe_csv(c.density.probe_file, m)) {
        append_point(csv, r.z);
        csv << ',' << fmt(r.tau) << ',' << fmt(r.rho) << ','
            << fmt(theta_at(r.z, r.rho, r.tau)) << '\n';
        ++rows;
      }
    } else {
      for (const auto& z : probes)
        for (double rho : ladder) {
          append_point(csv, z);
          csv << ',' << fmt(tau_probe) << ',' << fmt(rho) << ','
              << fmt(theta_at(z, rho, tau_probe)) << '\n';
          ++rows;
        }
    }
    art.write_text("probes.csv", csv.str());
    std::ostringstream lcsv;
    lcsv << "rho,theta\n";
    for (double rho : ladder)
      lcsv << fmt(rho) << ',' << fmt(theta_at(probes[0], rho, tau_probe)) << '\n';
    art.write_text("ladder.csv", lcsv.str());
    res.log.push_back("probes: " + std::to_string(rows) + " rows at tau " +
                      fmt(tau_probe));
  }

  std::vector<SingularSite> sites;
  bool have_sites = false;
  auto ensure_sites = [&] {
    if (have_sites) return;
    sites = e_static
                ? extract_singular_set(*e_static, ladder, c.singular.epsilon,
                                       c.density.j, q)
                : extract_singular_set(*series, tau_probe, ladder,
                                       c.singular.epsilon, c.density.j, q);
    have_sites = true;
  };

  if (sel.singular) {
    ensure_sites();
    std::ostringstream csv;
    csv << z_header(m) << ",liminf_theta\n";
    for (const SingularSite& s : sites) {
      append_point(csv, g.site_position(s.site));
      csv << ',' << fmt(s.liminf) << '\n';
    }
    art.write_text("singular.csv", csv.str());
    res.log.push_back("singular: " + std::to_string(sites.size()) + " of " +
                      std::to_string(g.volume()) + " sites above epsilon " +
                      fmt(c.singular.epsilon));
  }

  if (sel.monotonicity) {
    if (!series)
      throw ConfigError("monotonicity: needs a flow source (static density given)");
    std::ostringstream csv;
    csv << z_header(m) << ",c_min\n";
    double worst = 0.0;
    for (const auto& z : probes) {
      DensityLadder dl = density_ladder(*series, z, tau_probe, ladder, q);
      const double cmin = monotonicity_fit_c(dl, ym0);
      append_point(csv, z);
      csv << ',' << fmt(cmin) << '\n';
      worst = std::max(worst, cmin);
    }
    art.write_text("monotonicity.csv", csv.str());
    res.log.push_back("monotonicity: minimal admissible C " + fmt(worst) +
                      " across " + std::to_string(probes.size()) + " probes");
  }

  if (sel.slices) {
    if (m < 4) throw ConfigError("slices: need at least 4 axes");
    std::mt19937_64 rng(c.singular.seed);
    const double half = g.min_length() / 8.0;
    std::vector<ScalarField> rung_fields;
    for (double rho : ladder) rung_fields.push_back(field_at(rho));
    std::ostringstream csv;
    csv << "plane_id,rho,slice_value\n";
    std::ostringstream pcsv;
    pcsv << "plane_id,row," << z_header(m) << "\n";
    for (int pid = 0; pid < c.singular.plane_samples; ++pid) {
      Plane pl = grassmann_sample(m, 4, rng);
      pl.base = probes[0];
      pcsv << pid << ",base,";
      append_point(pcsv, pl.base);
      pcsv << '\n';
      for (int r = 0; r < 4; ++r) {
        pcsv << pid << ",frame" << r << ',';
        append_point(pcsv, pl.frame[r]);
        pcsv << '\n';
      }
      for (std::size_t k = 0; k < ladder.size(); ++k)
        csv << pid << ',' << fmt(ladder[k]) << ','
            << fmt(slice_integral(rung_fields[k], pl, ladder[k], half, 0.0, q))
            << '\n';
    }
    art.write_text("slices.csv", csv.str());
    art.write_text("planes.csv", pcsv.str());
    res.log.push_back("slices: " + std::to_string(c.singular.plane_samples) +
                      " planes x " + std::to_string(ladder.size()) +
                      " scales, half width " + fmt(half));
  }

  if (sel.cones) {
    ensure_sites();
    std::vector<double> apex = probes[0];
    if (!sites.empty()) {
      const SingularSite* best = &sites[0];
      for (const SingularSite& s : sites)
        if (s.liminf > best->liminf) best = &s;
      apex = g.site_position(best->site);
    }
    Plane axis;
    if (c.flow.initial.kind == "planted_tube") {
      axis = axis_plane(m, c.flow.initial.axes, apex);
    } else if (m >= 4) {
      std::vector<int> axes(m - 4);
      for (int i = 0; i < m - 4; ++i) axes[i] = i;
      axis = axis_plane(m, axes, apex);
    } else {
      throw ConfigError("cones: need at least 4 axes or a planted tube");
    }
    std::vector<std::vector<double>> points;
    for (const SingularSite& s : sites) points.push_back(g.site_position(s.site));
    std::vector<double> radii = c.singular.r_ladder;
    if (radii.empty())
      radii = {g.min_length() / 4.0, g.min_length() / 8.0, g.min_length() / 16.0};
    std::ostringstream csv;
    csv << "r,s,nonempty\n";
    for (double r : radii)
      for (double s : c.singular.s_list) {
        Cone cone{axis, s};
        const ConeCensus census = cone_census(cone, points, r);
        csv << fmt(r) << ',' << fmt(s) << ',' << (census.inside > 0 ? 1 : 0)
            << '\n';
      }
    art.write_text("cones.csv", csv.str());
    std::string line = "cones: apex (";
    for (int i = 0; i < m; ++i) line += (i ? "," : "") + fmt(apex[i]);
    line += "), " + std::to_string(points.size()) + " candidate sites";
    if (axis.dim() >= 1) {
      const ScalarField ef = field_at(rho_min);
      const DirectionalDensity dd =
          directional_density(ef, apex, axis, 2.0 * h, rho_min, q);
      line += ", directional along " + fmt(dd.along) + " vs perp " + fmt(dd.perp);
    }
    res.log.push_back(std::move(line));
  }

  if (sel.pde) {
    std::ostringstream csv;
    csv << z_header(m) << ",tau,rho,residual\n";
    double lo = 0.0, hi = 0.0;
    bool first = true;
    int skipped = 0;
    for (const auto& z : probes)
      for (double rho : ladder) {
        // the d_rho stencil probes 1.05 rho; skip rungs whose widened ball
        // would wrap around the torus
        if (2.0 * q.r_trunc * 1.05 * rho > g.min_length()) {
          ++skipped;
          continue;
        }
        const double r =
            e_static ? pde_residual(*e_static, z, rho, {}, q)
                     : pde_residual(*series, z, tau_probe, rho, {}, q);
        append_point(csv, z);
        csv << ',' << fmt(tau_probe) << ',' << fmt(rho) << ',' << fmt(r) << '\n';
        if (first || r < lo) lo = r;
        if (first || r > hi) hi = r;
        first = false;
      }
    art.write_text("pde.csv", csv.str());
    std::string line = first ? "pde: no rung fits the stencil inside one period"
                             : "pde: residual in [" + fmt(lo) + ", " + fmt(hi) +
                                   "] (limit equation, reported only)";
    if (skipped > 0)
      line += ", " + std::to_string(skipped) + " rung(s) skipped for wrap";
    res.log.push_back(std::move(line));
  }

  if (sel.identity) {
    auto pass_line = [&](const std::string& name, bool ok, const std::string& detail) {
      res.log.push_back(std::string(ok ? "PASS " : "FAIL ") + name + ": " + detail);
      if (!ok) ++res.failures;
    };
    if (series) {
      pass_line("dissipation", std::abs(balance_residual) <= 1e-3,
                "energy balance residual " + fmt(balance_residual) + " (tol 1e-3)");
    } else {
      res.log.push_back("SKIP dissipation: static source has no flow ledger");
    }

    const ScalarField ef = e_static ? *e_static : series->at(series->back_tau());
    const double ym_e = scalar_sum(ef) * std::pow(h, m);
    ScalarField tf = theta_grid(ef, rho_top, q);
    const double measured = global_density_integral(tf, rho_top);
    const double expected = std::pow(4.0 * std::numbers::pi, m / 2.0) * ym_e;
    const bool zero = std::abs(measured) < 1e-30 && std::abs(expected) < 1e-30;
    const bool okg =
        zero || std::abs(measured - expected) <= 1e-4 * std::abs(expected);
    pass_line("global-integral", okg,
              fmt(measured) + " vs " + fmt(expected) + " at rho " + fmt(rho_top) +
                  " (tol 1e-4 relative)");

    const double rho_r = g.min_length() / 23.0;
    if (rho_r < 0.6 * h * (1.0 - 1e-12)) {
      res.log.push_back(
          "SKIP rescaling: shortest period cannot hold the doubled-scale ball");
    } else {
      const std::vector<double> x(m, 0.0);
      const RescalingCheck rc = rescaling_check(ef, probes[0], rho_r, x, q);
      const double denom = std::max(std::abs(rc.direct), std::abs(rc.via_theta));
      const bool okr =
          denom < 1e-30 || std::abs(rc.direct - rc.via_theta) <= 1e-4 * denom;
      pass_line("rescaling", okr,
                fmt(rc.direct) + " vs " + fmt(rc.via_theta) + " at rho " +
                    fmt(rho_r) + " (tol 1e-4 relative)");
    }
  }

  json man;
  man["name"] = c.name;
  json files = json::object();
  for (const std::string& f : res.files) files[f] = sha256_hex_file(out_dir / f);
  man["files"] = std::move(files);
  art.write_text("manifest.json", man.dump(2) + "\n");
  return res;
}

}  // namespace ymlab
