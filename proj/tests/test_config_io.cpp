#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "diraclab/config.hpp"
#include "diraclab/io.hpp"
#include "diraclab/presets.hpp"

using namespace diraclab;
namespace fs = std::filesystem;

namespace {

// Scratch directory under the test working directory, removed on scope exit.
struct TmpDir {
  fs::path root = "io_test_tmp";
  TmpDir() { fs::create_directories(root); }
  ~TmpDir() {
    std::error_code ec;
    fs::remove_all(root, ec);
  }
  std::string operator/(const char* name) const { return (root / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

Frame density_frame(double t, std::initializer_list<double> upper,
                    std::initializer_list<double> lower) {
  Frame fr;
  fr.t = t;
  fr.upper_density = Eigen::Map<const VecXd>(upper.begin(),
                                             static_cast<Eigen::Index>(upper.size()));
  fr.lower_density = Eigen::Map<const VecXd>(lower.begin(),
                                             static_cast<Eigen::Index>(lower.size()));
  return fr;
}

}  // namespace

TEST_CASE("config parsing accepts the documented format", "[config]") {
  const std::string text =
      "# a scattering run\n"
      "kind = klein\n"
      "\n"
      "n = 512\n"
      "x_min = -40   # inline comment\n"
      "x_max = 40\n"
      "m = 0.5\n"
      "p0 = 4\n"
      "branch = positive\n"
      "solver = comoving\n"
      "t_final = 10\n";
  const ScenarioConfig cfg = parse_config(text);
  CHECK(cfg.kind == "klein");
  CHECK(cfg.integer("n") == 512);
  CHECK(cfg.number("x_min") == -40.0);
  CHECK(cfg.number("m") == 0.5);
  CHECK(cfg.word("solver") == "comoving");
  CHECK(cfg.word("method", "branch") == "branch");
  CHECK(cfg.number("dt", 0.25) == 0.25);
  CHECK_FALSE(cfg.has("dt"));

  const ScenarioConfig sweep = parse_config(
      "kind = sweep\nt_final = 4\nmasses = 0, 0.5 ,1.25\n");
  const std::vector<double> masses = sweep.number_list("masses");
  REQUIRE(masses.size() == 3);
  CHECK(masses[0] == 0.0);
  CHECK(masses[1] == 0.5);
  CHECK(masses[2] == 1.25);
}

TEST_CASE("config parsing reports every problem at once", "[config]") {
  const std::string text =
      "n = 64\n"
      "kind = klein\n"
      "bogus = 12\n"
      "n = 32\n"
      "dt = fast\n"
      "width = -2\n"
      "problem = scalar\n";
  std::string msg;
  try {
    parse_config(text);
    FAIL("expected a validation_error");
  } catch (const validation_error& e) {
    msg = e.what();
  }
  CHECK(msg.find("line 3: unknown key 'bogus'") != std::string::npos);
  CHECK(msg.find("line 4: duplicate key 'n' (first defined on line 1)") !=
        std::string::npos);
  CHECK(msg.find("line 5: key 'dt' expected a number") != std::string::npos);
  CHECK(msg.find("line 6: key 'width' must be > 0") != std::string::npos);
  CHECK(msg.find("line 7: key 'problem' is not valid for kind 'klein'") !=
        std::string::npos);
  CHECK(msg.find("missing required key 't_final' for kind 'klein'") !=
        std::string::npos);

  CHECK_THROWS_WITH(parse_config("n = 64\nt_final = 1\n"),
                    Catch::Matchers::ContainsSubstring(
                        "missing required key 'kind'"));
  CHECK_THROWS_AS(parse_config("kind = flavor\n"), validation_error);
  CHECK_THROWS_AS(parse_config("kind klein\n"), validation_error);
}

TEST_CASE("config serialization is canonical and stable", "[config]") {
  const ScenarioConfig cfg =
      parse_config("t_final = 10\nkind = klein\nn = 512\nm = 0.5\n");
  CHECK(serialize_config(cfg) ==
        "kind = klein\n"
        "m = 0.5\n"
        "n = 512\n"
        "t_final = 10\n");

  const std::vector<std::string> names = preset_names();
  CHECK(names.size() == 9);
  for (const std::string& name : names) {
    INFO("preset " << name);
    const ScenarioConfig parsed = parse_config(preset_text(name));
    const ScenarioConfig reparsed = parse_config(serialize_config(parsed));
    CHECK(reparsed == parsed);
  }
  CHECK_THROWS_AS(preset_text("no_such_preset"), validation_error);
}

TEST_CASE("frames csv has the documented bytes", "[config]") {
  TmpDir tmp;
  const Grid g = grid_new(8, -2.0, 2.0);
  const Frame fr = density_frame(0.5, {0, 0.25, 0.5, 1.5, 0, 0, 0.125, 0},
                                 {0, 0.25, 0.25, 0.5, 0, 2, 0, 0});
  const std::string path = tmp / "frames.csv";
  write_frames_csv({fr}, g, path);
  CHECK(slurp(path) ==
        "t,x,density,upper_density,lower_density\n"
        "0.5,-2,0,0,0\n"
        "0.5,-1.5,0.5,0.25,0.25\n"
        "0.5,-1,0.75,0.5,0.25\n"
        "0.5,-0.5,2,1.5,0.5\n"
        "0.5,0,0,0,0\n"
        "0.5,0.5,2,0,2\n"
        "0.5,1,0.125,0.125,0\n"
        "0.5,1.5,0,0,0\n");

  CHECK_THROWS_AS(write_frames_csv({}, g, tmp / "x.csv"), validation_error);
  const Frame bad = density_frame(0.0, {1, 2}, {0, 0});
  CHECK_THROWS_AS(write_frames_csv({bad}, g, tmp / "x.csv"), validation_error);
}

TEST_CASE("heatmap ppm has the documented bytes", "[config]") {
  TmpDir tmp;
  const Frame f0 = density_frame(0.0, {0, 0.4, 0.8, 2, 0, 0, 0, 0},
                                 {0, 0, 0, 0, 0, 0, 0, 0});
  const Frame f1 = density_frame(1.0, {0.4, 0, 0, 0, 0, 0, 0, 2},
                                 {0, 0, 0, 0, 0, 0, 0, 0});
  const std::string path = tmp / "heatmap.ppm";
  write_heatmap_ppm({f0, f1}, path);

  std::string expect = "P6\n8 2\n255\n";
  const unsigned char gray[2][8] = {{0, 51, 102, 255, 0, 0, 0, 0},
                                    {51, 0, 0, 0, 0, 0, 0, 255}};
  for (const auto& row : gray)
    for (unsigned char v : row)
      expect.append(3, static_cast<char>(v));
  CHECK(slurp(path) == expect);

  CHECK_THROWS_AS(write_heatmap_ppm({}, tmp / "x.ppm"), validation_error);
}

TEST_CASE("tabular writers have the documented bytes", "[config]") {
  TmpDir tmp;

  VecXd eigs(3);
  eigs << -1.5, 0.0, 0.25;
  const std::string spath = tmp / "spectrum.csv";
  write_spectrum_csv(eigs, spath);
  CHECK(slurp(spath) ==
        "index,eigenvalue\n"
        "0,-1.5\n"
        "1,0\n"
        "2,0.25\n");

  SweepRow ok;
  ok.mass = 0.5;
  ok.exponent = 0.25;
  ok.transmission = 0.5;
  ok.lz = 0.25;
  ok.abs_delta = 0.25;
  ok.ok = true;
  SweepRow bad;
  bad.mass = 1.0;
  bad.exponent = 1.0;
  bad.ok = false;
  bad.error = "boom, with commas\nand newline";
  const std::string wpath = tmp / "sweep.csv";
  write_sweep_csv({ok, bad}, wpath);
  CHECK(slurp(wpath) ==
        "mass,exponent,transmission,lz_probability,abs_delta,status\n"
        "0.5,0.25,0.5,0.25,0.25,ok\n"
        "1,1,0,0,0,boom; with commas;and newline\n");

  OrbitSample s;
  s.t = 1.0;
  s.x_mean = 0.5;
  s.p_mean = -0.25;
  s.h2 = 2.0;
  const std::string opath = tmp / "orbit.csv";
  write_orbit_csv({s}, opath);
  CHECK(slurp(opath) ==
        "t,x_mean,p_mean,h2\n"
        "1,0.5,-0.25,2\n");

  FidelitySample fsample;
  fsample.t = 0.5;
  fsample.ion_negative = 0.25;
  fsample.fidelity = 0.75;
  fsample.leak = 0.125;
  const std::string ipath = tmp / "ion.csv";
  write_ion_csv({fsample}, ipath);
  CHECK(slurp(ipath) ==
        "t,negative_branch,fidelity,leak\n"
        "0.5,0.25,0.75,0.125\n");

  CHECK_THROWS_AS(write_spectrum_csv(VecXd(), tmp / "x.csv"),
                  validation_error);
  CHECK_THROWS_AS(write_sweep_csv({}, tmp / "x.csv"), validation_error);
  CHECK_THROWS_AS(write_orbit_csv({}, tmp / "x.csv"), validation_error);
  CHECK_THROWS_AS(write_ion_csv({}, tmp / "x.csv"), validation_error);
}

TEST_CASE("writers reject unwritable paths", "[config]") {
  VecXd eigs(1);
  eigs << 1.0;
  CHECK_THROWS_AS(
      write_spectrum_csv(eigs, "io_test_missing_dir/nested/spectrum.csv"),
      validation_error);
  const Frame fr = density_frame(0.0, {1.0}, {0.0});
  CHECK_THROWS_AS(
      write_heatmap_ppm({fr}, "io_test_missing_dir/nested/heatmap.ppm"),
      validation_error);
}
