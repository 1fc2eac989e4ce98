// diraclab: command-line laboratory for the 1+1 dimensional Dirac equation.
//
//   diraclab <subcommand> [--preset NAME | --config FILE] [--out DIR] [--serial]
//
// Subcommands: evolve, klein, sweep, spectrum, ion, orbits.
// Exit codes: 0 success, 2 validation failure, 3 numerical abort.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "diraclab/diraclab.hpp"
#include "diraclab/presets.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw diraclab::validation_error("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kSubcommands[] = {"evolve", "klein",  "sweep",
                              "spectrum", "ion", "orbits"};

const char* describe(const std::string& name) {
  if (name == "evolve") return "Propagate a wavepacket and record density frames";
  if (name == "klein") return "Scattering off a linear electric potential";
  if (name == "sweep") return "Transmission versus mass, against the Landau-Zener law";
  if (name == "spectrum") return "Bound-state spectra (scalar ladder / Dirac oscillator)";
  if (name == "ion") return "Two-ion emulation of the Dirac dynamics";
  return "Phase-space orbits in a pseudoscalar potential";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"diraclab: a laboratory for the 1+1 dimensional Dirac equation"};
  app.require_subcommand(1);

  std::string preset;
  std::string config_path;
  std::string out_dir = ".";
  bool serial = false;
  for (const char* name : kSubcommands) {
    CLI::App* sub = app.add_subcommand(name, describe(name));
    auto* p = sub->add_option("--preset", preset,
                              "Name of a built-in configuration");
    auto* c = sub->add_option("--config", config_path,
                              "Path to a configuration file");
    p->excludes(c);
    c->excludes(p);
    sub->add_option("--out", out_dir, "Output directory (created if missing)");
    sub->add_flag("--serial", serial,
                  "Force single-threaded, deterministic execution");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const std::string kind = app.get_subcommands().front()->get_name();
    if (preset.empty() && config_path.empty())
      throw diraclab::validation_error(
          "one of --preset or --config is required (available presets: " +
          [] {
            std::string s;
            for (const auto& n : diraclab::preset_names())
              s += (s.empty() ? "" : ", ") + n;
            return s;
          }() +
          ")");
    const std::string text = config_path.empty()
                                 ? diraclab::preset_text(preset)
                                 : read_file(config_path);
    const diraclab::ScenarioConfig cfg = diraclab::parse_config(text);
    if (cfg.kind != kind)
      throw diraclab::validation_error("configuration has kind '" + cfg.kind +
                                       "' but the subcommand is '" + kind +
                                       "'");
    std::filesystem::create_directories(out_dir);
    const diraclab::RunOutcome outcome =
        diraclab::run_scenario(cfg, out_dir, serial);
    std::printf("%s\n", outcome.summary.c_str());
    return 0;
  } catch (const diraclab::validation_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const diraclab::numerical_error& e) {
    std::fprintf(stderr, "numerical abort: %s\n", e.what());
    return 3;
  }
}
