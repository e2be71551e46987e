#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include <unistd.h>

#include "ymlab/errors.hpp"
#include "ymlab/experiment.hpp"

using namespace ymlab;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() /
               ("ymlab_exp_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<double>> csv_rows(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

TEST_CASE("every preset echoes back losslessly") {
  for (const std::string& name : preset_names()) {
    ExperimentConfig c = preset_config(name);
    const std::string once = canonical_config(c);
    const std::string twice = canonical_config(parse_config(once));
    CHECK(once == twice);
  }
  ExperimentConfig d;
  d.grid.extents = {8, 8};
  CHECK(canonical_config(d) == canonical_config(parse_config(canonical_config(d))));
}

TEST_CASE("parser names the offending field") {
  CHECK_THROWS_WITH_AS(parse_config("{"), "config: not valid JSON", ConfigError);
  auto message = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message(R"({"grid":{"extents":[16,16,16],"spacng":0.5}})")
            .find("grid.spacng") != std::string::npos);
  CHECK(message(R"({"grid":{"extents":[3,16,16]}})").find("grid.extents[0]") !=
        std::string::npos);
  CHECK(message(R"({"grid":{"extents":[16,16,16]},"density":{"r_trunc":99}})")
            .find("density.r_trunc") != std::string::npos);
  CHECK(message(R"({"grid":{"extents":[16,16,16]},"workers":-1})")
            .find("workers") != std::string::npos);
  CHECK(message(R"({"grid":{"extents":[8,8]},"density":{"probes":[[1.0]]}})")
            .find("density.probes[0]") != std::string::npos);
  CHECK(message(R"({"grid":{"extents":[8,8,8]},"flow":{"horizon":0.1,)"
                R"("initial":{"kind":"planted_tube"}}})")
            .find("flow.horizon") != std::string::npos);
  CHECK(message(R"({"grid":{"extents":[8,8,8]},"flow":{"initial":)"
                R"({"kind":"vortex"}}})")
            .find("flow.initial.kind") != std::string::npos);
  CHECK_THROWS_AS(preset_config("no-such-preset"), ConfigError);
}

TEST_CASE("flat run: zero ledger, empty singular set, complete manifest") {
  const fs::path dir = fresh_dir("flat");
  ExperimentConfig c = preset_config("flat");
  ExperimentResult res = run_experiment(c, run_stages(c), dir);
  CHECK(res.failures == 0);

  for (const auto& row : csv_rows(dir / "ledger.csv")) {
    CHECK(row[1] == 0.0);  // ym
    CHECK(row[3] == 0.0);  // residual
  }
  CHECK(slurp(dir / "singular.csv") == "z1,z2,z3,liminf_theta\n");

  // manifest: every listed file exists with the advertised hash, and every
  // artifact except the manifest itself is listed
  nlohmann::json man = nlohmann::json::parse(slurp(dir / "manifest.json"));
  std::size_t on_disk = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().filename() == "manifest.json") continue;
    ++on_disk;
    const std::string name = entry.path().filename().string();
    REQUIRE(man["files"].contains(name));
    CHECK(man["files"][name].get<std::string>() ==
          sha256_hex_file(entry.path()));
  }
  CHECK(man["files"].size() == on_disk);
  fs::remove_all(dir);
}

TEST_CASE("absurd epsilon leaves only the csv header") {
  const fs::path dir = fresh_dir("eps");
  ExperimentConfig c = preset_config("su2-bump");
  c.singular.epsilon = 1e9;
  StageSelection sel;
  sel.singular = true;
  run_experiment(c, sel, dir);
  CHECK(slurp(dir / "singular.csv") == "z1,z2,z3,liminf_theta\n");
  fs::remove_all(dir);
}

TEST_CASE("single-worker reruns are byte-identical") {
  const fs::path a = fresh_dir("det_a");
  const fs::path b = fresh_dir("det_b");
  ExperimentConfig c = preset_config("su2-bump");
  StageSelection sel;
  sel.flow = true;
  sel.probes = true;
  run_experiment(c, sel, a);
  run_experiment(c, sel, b);
  for (const char* f : {"ledger.csv", "probes.csv", "ladder.csv", "field_final.ymf"})
    CHECK(slurp(a / f) == slurp(b / f));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("heatwave ledger follows the semi-discrete decay law") {
  const fs::path dir = fresh_dir("heat");
  ExperimentConfig c = preset_config("abelian-heatwave");
  StageSelection sel;
  sel.flow = true;
  run_experiment(c, sel, dir);
  const auto rows = csv_rows(dir / "ledger.csv");
  REQUIRE(rows.size() > 2);
  const double ym0 = rows.front()[1];
  const double ymT = rows.back()[1];
  const double h = c.grid.spacing;
  const double L = h * c.grid.extents[0];
  const double s = std::sin(2.0 * std::acos(-1.0) * h / L) / h;
  const double want = std::exp(-2.0 * s * s * c.flow.horizon);
  CHECK(ymT / ym0 == doctest::Approx(want).epsilon(1e-4));
  // monotone energy along every row
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i][1] <= rows[i - 1][1]);
  fs::remove_all(dir);
}

TEST_CASE("probe batches read from csv get theta appended") {
  const fs::path dir = fresh_dir("batch");
  fs::create_directories(dir);
  const fs::path batch = dir / "batch.csv";
  {
    std::ofstream out(batch);
    out << "z1,z2,z3,tau,rho\n";
    out << "1.0,1.0,1.0,0.1,0.25\n";
    out << "2.0,2.0,2.0,0.1,0.15\n";
  }
  ExperimentConfig c = preset_config("abelian-heatwave");
  c.density.probe_file = batch.string();
  StageSelection sel;
  sel.probes = true;
  run_experiment(c, sel, dir / "out");
  const auto rows = csv_rows(dir / "out" / "probes.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].size() == 6);  // z1,z2,z3,tau,rho,theta
  CHECK(rows[0][5] > 0.0);
  CHECK(rows[1][5] > 0.0);

  {
    std::ofstream out(batch);
    out << "x,y\n1,2\n";
  }
  CHECK_THROWS_AS(run_experiment(c, sel, dir / "out2"), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("probe time before the top rung's backward reach is rejected") {
  const fs::path dir = fresh_dir("probe_guard");
  ExperimentConfig c = preset_config("abelian-heatwave");
  c.flow.horizon = 0.02;
  c.density.tau = 0.01;  // rho_top^2 = 0.0625 reaches back past tau = 0
  StageSelection sel;
  sel.probes = true;
  CHECK_THROWS_AS(run_experiment(c, sel, dir), InvalidProbeError);
  fs::remove_all(dir);
}

TEST_CASE("sha256 helpers agree with a known vector") {
  // sha256("abc")
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const fs::path dir = fresh_dir("sha");
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "abc.txt", std::ios::binary);
    out << "abc";
  }
  CHECK(sha256_hex_file(dir / "abc.txt") == sha256_hex("abc"));
  fs::remove_all(dir);
}
