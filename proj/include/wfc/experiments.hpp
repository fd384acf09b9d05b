#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wfc {

inline constexpr std::string_view kVersion = WFC_VERSION_STRING;

struct RunOptions {
  int workers = 1;
  std::optional<std::uint64_t> seed;  // replaces the config's base seed
};

struct OutputFile {
  std::string name;
  std::string content;  // CSV text starts with a "# {json}" provenance line
  bool binary = false;
};

struct ExperimentOutput {
  nlohmann::json resolved;  // config with every default expanded
  std::vector<OutputFile> files;
  nlohmann::json summary;   // headline numbers, also written as summary.json
};

/// Names accepted by run_experiment, in CLI order.
const std::vector<std::string>& experiment_names();

/// The config used when a key is absent: the document every user config is
/// merged into.
nlohmann::json default_config(std::string_view experiment);

/// Merges `config` over the defaults; unknown keys and ill-typed values throw
/// ConfigError. Solver failures propagate as SolverError.
ExperimentOutput run_experiment(std::string_view experiment, const nlohmann::json& config,
                                const RunOptions& options = {});

ExperimentOutput cmd_spectra(const nlohmann::json& config, const RunOptions& options = {});
ExperimentOutput cmd_phase_sweep(const nlohmann::json& config, const RunOptions& options = {});
ExperimentOutput cmd_alpha_fit(const nlohmann::json& config, const RunOptions& options = {});
ExperimentOutput cmd_complete(const nlohmann::json& config, const RunOptions& options = {});
ExperimentOutput cmd_sweep_rates(const nlohmann::json& config, const RunOptions& options = {});
ExperimentOutput cmd_compare_methods(const nlohmann::json& config, const RunOptions& options = {});
ExperimentOutput cmd_exact_vs_alg(const nlohmann::json& config, const RunOptions& options = {});
ExperimentOutput cmd_gen_state(const nlohmann::json& config, const RunOptions& options = {});

/// Runs fn(i) for i in [0, count) on up to `workers` threads. Results land at
/// their index, so output order never depends on scheduling. The exception
/// of the lowest failing index is rethrown.
template <class T, class F>
std::vector<T> parallel_map(std::size_t count, int workers, F fn);

}  // namespace wfc

#include "wfc/parallel_map.ipp"
