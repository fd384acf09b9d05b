#include "wfc/errors.hpp"
#include "wfc/experiments.hpp"
#include "wfc/sampling.hpp"
#include "wfc/state_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

json load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw wfc::ConfigError("cannot open config file " + path.string());
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw wfc::ConfigError("config file " + path.string() + ": " + e.what());
  }
}

void write_outputs(const fs::path& dir, std::string_view experiment, const wfc::ExperimentOutput& out) {
  fs::create_directories(dir);
  for (const auto& file : out.files) {
    std::ofstream os(dir / file.name, file.binary ? std::ios::binary : std::ios::out);
    os << file.content;
    if (!os) throw std::runtime_error("failed writing " + (dir / file.name).string());
  }
  const json provenance{{"experiment", experiment}, {"version", wfc::kVersion}, {"config", out.resolved}};
  std::ofstream(dir / "config.resolved.json") << provenance.dump(2) << '\n';
  std::ofstream(dir / "summary.json") << json{{"experiment", experiment}, {"summary", out.summary}}.dump(2) << '\n';
}

// Prints the header of a WFC1 state or WFM1 mask file as JSON.
void info(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw wfc::ConfigError("cannot open " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  const std::string tag(magic.data(), static_cast<std::size_t>(in.gcount()));
  in.close();
  json j{{"path", path.string()}, {"bytes", fs::file_size(path)}};
  if (tag == "WFC1") {
    const wfc::StateVector s = wfc::read_state(path);
    j["format"] = "WFC1";
    j["n"] = s.num_sites();
    j["d"] = s.local_dim();
    j["boundary"] = std::string(wfc::to_string(s.boundary()));
    j["amplitudes"] = s.size();
    j["norm"] = s.norm();
  } else if (tag == "WFM1") {
    const wfc::MaskFileInfo m = wfc::inspect_mask(path);
    j["format"] = "WFM1";
    j["total"] = m.total;
    j["count"] = m.count;
    j["seed"] = m.seed;
    j["rate"] = m.rate;
  } else {
    throw wfc::ConfigError(path.string() + " is neither a WFC1 state nor a WFM1 mask");
  }
  std::cout << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wavefunction completion experiments"};
  app.set_version_flag("--version", std::string(wfc::kVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int workers = 1;
  std::optional<std::uint64_t> seed;
  bool print_defaults = false;

  for (const auto& name : wfc::experiment_names()) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config_path, "JSON config (keys absent fall back to defaults)");
    sub->add_option("--out", out_dir, "output directory (default out/<subcommand>)");
    sub->add_option("--workers", workers, "concurrent cells")->check(CLI::Range(1, 1024));
    sub->add_option("--seed", seed, "replaces the config's base seed");
    sub->add_flag("--print-defaults", print_defaults, "print the default config and exit");
  }
  CLI::App* info_cmd = app.add_subcommand("info", "inspect a WFC1 state or WFM1 mask file");
  std::string info_path;
  info_cmd->add_option("--config,path", info_path, "file to inspect")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (info_cmd->parsed()) {
      info(info_path);
      return 0;
    }
    const std::string experiment = app.get_subcommands().front()->get_name();
    if (print_defaults) {
      std::cout << wfc::default_config(experiment).dump(2) << '\n';
      return 0;
    }
    const json config = config_path.empty() ? json::object() : load_config(config_path);
    const wfc::ExperimentOutput out = wfc::run_experiment(experiment, config, {workers, seed});
    const fs::path dir = out_dir.empty() ? fs::path("out") / experiment : fs::path(out_dir);
    write_outputs(dir, experiment, out);
    std::cout << json{{"experiment", experiment}, {"out", dir.string()}, {"summary", out.summary}}.dump(2) << '\n';
    return 0;
  } catch (const wfc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const wfc::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
