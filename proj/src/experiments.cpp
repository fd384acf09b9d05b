#include "wfc/experiments.hpp"

#include "wfc/analysis.hpp"
#include "wfc/completers.hpp"
#include "wfc/eigensolve.hpp"
#include "wfc/errors.hpp"
#include "wfc/hamiltonian.hpp"
#include "wfc/rng.hpp"
#include "wfc/sampling.hpp"
#include "wfc/state_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace wfc {

using nlohmann::json;

namespace {

// ---- config plumbing --------------------------------------------------------

json hamiltonian_defaults() {
  return {{"n", 16},  {"d", 2}, {"l", 2}, {"boundary", "periodic"}, {"kind", "random_inhomogeneous"},
          {"lambda", 0.0}, {"seed", 0}};
}

json lanczos_defaults() { return {{"tol", 1e-12}, {"max_restarts", 50}, {"krylov_dim", 64}}; }

// k_max is the desk-scale value; inner sweeps beyond a handful per chi level
// do not change the final error.
json completer_defaults() {
  return {{"chi_max", 0},          {"chi_start", 0},          {"k_max", 5},
          {"inner_tol", 1e-9},     {"outer_tol", 1e-12},      {"schedule", "automatic"},
          {"shuffle_schedule", true}, {"truncation", "gram"},     {"trace_entropy", true}};
}

// Batch experiments only report final errors, so they switch trace_entropy off.
json batch_completer_defaults() {
  json c = completer_defaults();
  c["trace_entropy"] = false;
  return c;
}

json svt_defaults() { return {{"tau", nullptr}, {"delta", nullptr}, {"max_iters", 2000}, {"tol", 1e-7}}; }

json nelder_mead_defaults() { return {{"x_tol", 1e-12}, {"f_tol", 1e-14}, {"max_evals", 500}}; }

json pair_search_defaults() { return {{"phase_grid", 8}, {"mix_grid", 6}, {"nelder_mead", nelder_mead_defaults()}}; }

json seeds_defaults(std::uint64_t base, int count) { return {{"base", base}, {"count", count}}; }

// Rejects keys of `user` absent from `defaults`, recursing into objects that
// both sides hold. Arrays are replaced wholesale and checked by their readers.
void check_keys(const json& defaults, const json& user, const std::string& where) {
  if (!user.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : user.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!defaults.contains(key)) throw ConfigError("unknown config key '" + path + "'");
    const json& d = defaults.at(key);
    if (d.is_object() && value.is_object()) check_keys(d, value, path);
  }
}

json merge(json defaults, const json& user, const std::string& where) {
  if (user.is_null()) return defaults;
  check_keys(defaults, user, where);
  defaults.merge_patch(user);
  return defaults;
}

// Converts parse-time failures of library validators into ConfigError.
template <class F>
auto parse_stage(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::overflow_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

HamiltonianSpec read_hamiltonian(const json& j) {
  HamiltonianSpec spec = spec_from_json(j);
  spec.validate();
  return spec;
}

LanczosOptions read_lanczos(const json& j) {
  LanczosOptions o;
  o.tol = j.at("tol").get<double>();
  o.max_restarts = j.at("max_restarts").get<int>();
  o.krylov_dim = j.at("krylov_dim").get<int>();
  if (!(o.tol > 0.0) || o.max_restarts < 1 || o.krylov_dim < 2)
    throw ConfigError("lanczos: need tol > 0, max_restarts >= 1, krylov_dim >= 2");
  return o;
}

CompleterConfig read_completer(const json& j) {
  CompleterConfig c;
  c.chi_max = j.at("chi_max").get<int>();
  c.chi_start = j.at("chi_start").get<int>();
  c.k_max = j.at("k_max").get<int>();
  c.inner_tol = j.at("inner_tol").get<double>();
  c.outer_tol = j.at("outer_tol").get<double>();
  c.schedule_kind = schedule_kind_from_string(j.at("schedule").get<std::string>());
  c.shuffle_schedule = j.at("shuffle_schedule").get<bool>();
  c.truncation = truncation_from_string(j.at("truncation").get<std::string>());
  c.trace_entropy = j.at("trace_entropy").get<bool>();
  return c;
}

SvtOptions read_svt(const json& j) {
  SvtOptions o;
  if (j.contains("tau") && !j.at("tau").is_null()) o.tau = j.at("tau").get<double>();
  if (j.contains("delta") && !j.at("delta").is_null()) o.delta = j.at("delta").get<double>();
  o.max_iters = j.at("max_iters").get<int>();
  o.tol = j.at("tol").get<double>();
  return o;
}

NelderMeadOptions read_nelder_mead(const json& j) {
  NelderMeadOptions o;
  o.x_tol = j.at("x_tol").get<double>();
  o.f_tol = j.at("f_tol").get<double>();
  o.max_evals = j.at("max_evals").get<int>();
  if (!(o.x_tol > 0.0) || !(o.f_tol > 0.0) || o.max_evals < 1)
    throw ConfigError("nelder_mead: tolerances must be positive and max_evals >= 1");
  return o;
}

PairSearchOptions read_pair_search(const json& j) {
  PairSearchOptions o;
  o.phase_grid = j.at("phase_grid").get<int>();
  o.mix_grid = j.at("mix_grid").get<int>();
  o.nelder_mead = read_nelder_mead(j.at("nelder_mead"));
  return o;
}

// "seeds" is either an explicit list or {"base": b, "count": c} meaning
// b, b+1, ..., b+c-1. A command-line seed replaces the base (or the first
// entry of a list, shifting the rest by the same amount).
std::vector<std::uint64_t> read_seeds(json& j, const RunOptions& options) {
  std::vector<std::uint64_t> seeds;
  if (j.is_array()) {
    for (const auto& s : j) seeds.push_back(s.get<std::uint64_t>());
    if (seeds.empty()) throw ConfigError("seeds list is empty");
    if (options.seed) {
      const std::uint64_t shift = *options.seed - seeds.front();
      for (auto& s : seeds) s += shift;
    }
  } else if (j.is_object()) {
    check_keys(seeds_defaults(0, 0), j, "seeds");
    if (!j.contains("base") || !j.contains("count")) throw ConfigError("seeds object needs base and count");
    if (options.seed) j["base"] = *options.seed;
    const auto base = j.at("base").get<std::uint64_t>();
    const int count = j.at("count").get<int>();
    if (count < 1) throw ConfigError("seeds.count must be >= 1");
    for (int i = 0; i < count; ++i) seeds.push_back(base + static_cast<std::uint64_t>(i));
  } else {
    throw ConfigError("seeds must be a list or {base, count}");
  }
  j = seeds;
  return seeds;
}

std::vector<double> read_rates(const json& j) {
  std::vector<double> rates = j.get<std::vector<double>>();
  if (rates.empty()) throw ConfigError("rates list is empty");
  for (double r : rates)
    if (!(r > 0.0 && r <= 1.0)) throw ConfigError("sample rates must lie in (0, 1]");
  return rates;
}

std::vector<int> read_sizes(const json& j) {
  std::vector<int> sizes = j.get<std::vector<int>>();
  if (sizes.empty()) throw ConfigError("sizes list is empty");
  return sizes;
}

// ---- output plumbing ----------------------------------------------------

std::string provenance_line(std::string_view experiment, const json& resolved) {
  return "# " + json{{"experiment", experiment}, {"version", kVersion}, {"config", resolved}}.dump() + "\n";
}

class Csv {
 public:
  Csv(std::string_view experiment, const json& resolved, std::string_view header) {
    os_ << provenance_line(experiment, resolved) << header << '\n';
    os_.precision(17);
  }

  template <class... Ts>
  void row(const Ts&... fields) {
    bool first = true;
    ((os_ << (first ? "" : ",") << fields, first = false), ...);
    os_ << '\n';
  }

  std::ostream& stream() { return os_; }
  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

OutputFile state_file(const std::string& name, const StateVector& state) {
  std::ostringstream os(std::ios::binary);
  write_state(os, state);
  return {name, os.str(), true};
}

OutputFile sidecar(const std::string& name, std::string_view experiment, const json& resolved, const json& extra) {
  json j{{"experiment", experiment}, {"version", kVersion}, {"config", resolved}};
  for (const auto& [k, v] : extra.items()) j[k] = v;
  return {name + ".json", j.dump(2) + "\n", false};
}

std::string aggregate_text(std::string_view experiment, const json& resolved, std::span<const AggregateRow> rows) {
  std::ostringstream os;
  os << provenance_line(experiment, resolved);
  write_aggregate_csv(os, rows);
  return os.str();
}

double circular_distance(double a, double b) {
  const double two_pi = 2.0 * std::numbers::pi;
  double d = std::fmod(std::abs(a - b), two_pi);
  return std::min(d, two_pi - d);
}

// Shortest form that reads back to the same double.
std::string fmt(double v) {
  char buf[32];
  const auto end = std::to_chars(buf, buf + sizeof buf, v).ptr;
  return std::string(buf, end);
}

StateVector solve(const HamiltonianSpec& spec, const LanczosOptions& lanczos) {
  return ground_state(spec, lanczos).state;
}

double final_error(const StateVector& exact, const StateVector& completed) {
  return fidelity_error(exact, completed);
}

// ---- defaults -------------------------------------------------------------

json spectra_model_defaults() {
  return {{"name", ""}, {"hamiltonian", hamiltonian_defaults()}, {"seeds", nullptr}};
}

const std::map<std::string, std::function<json()>, std::less<>>& default_table() {
  static const std::map<std::string, std::function<json()>, std::less<>> table = {
      {"spectra",
       [] {
         auto model = [](std::string name, json h) {
           json m = spectra_model_defaults();
           m["name"] = std::move(name);
           m["hamiltonian"].merge_patch(h);
           m.erase("seeds");
           return m;
         };
         return json{{"models", json::array({model("ising_lambda0", {{"kind", "transverse_ising"}, {"lambda", 0.0}}),
                                             model("ising_lambda0.8", {{"kind", "transverse_ising"}, {"lambda", 0.8}}),
                                             model("xx", {{"kind", "xx"}}), model("random_l2", {{"l", 2}}),
                                             model("random_l3", {{"l", 3}}), model("random_l4", {{"l", 4}})})},
                     {"cutoff", 1e-10},
                     {"lanczos", lanczos_defaults()}};
       }},
      {"phase-sweep",
       [] {
         json h = hamiltonian_defaults();
         h["n"] = 14;
         h["l"] = 3;
         return json{{"hamiltonian", h},
                     {"seeds", seeds_defaults(1, 10)},
                     {"indices_per_state", 2},
                     {"grid_points", 256},
                     {"block_start", 1},
                     {"block_len", 0},
                     {"sweep_draw", 0},
                     {"nelder_mead", nelder_mead_defaults()},
                     {"lanczos", lanczos_defaults()}};
       }},
      {"alpha-fit",
       [] {
         return json{{"groups", json::array({{{"d", 2}, {"l", 2}, {"sizes", {6, 8, 10, 12}}},
                                             {{"d", 2}, {"l", 3}, {"sizes", {6, 8, 10, 12}}},
                                             {{"d", 3}, {"l", 2}, {"sizes", {4, 5, 6, 7, 8}}}})},
                     {"states_per_point", 10},
                     {"pairs_per_state", 5},
                     {"base_seed", 1},
                     {"boundary", "periodic"},
                     {"kind", "random_inhomogeneous"},
                     {"pair_search", pair_search_defaults()},
                     {"lanczos", lanczos_defaults()}};
       }},
      {"complete",
       [] {
         json h = hamiltonian_defaults();
         h["l"] = 3;
         h["boundary"] = "open";
         h["seed"] = 1;
         return json{{"hamiltonian", h},  {"rate", 0.5},       {"seed", 1},
                     {"method", "tensor"}, {"completer", completer_defaults()}, {"svt", svt_defaults()},
                     {"lanczos", lanczos_defaults()}};
       }},
      {"sweep-rates",
       [] {
         json h = hamiltonian_defaults();
         h["n"] = 12;
         return json{{"hamiltonian", h},
                     {"sizes", {12}},
                     {"rates", {0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99}},
                     {"seeds", seeds_defaults(1, 5)},
                     {"completer", batch_completer_defaults()},
                     {"lanczos", lanczos_defaults()}};
       }},
      {"compare-methods",
       [] {
         json h = hamiltonian_defaults();
         h["n"] = 14;
         h["kind"] = "random_homogeneous";
         return json{{"hamiltonian", h},
                     {"rates", {0.4, 0.5, 0.6}},
                     {"seeds", seeds_defaults(1, 10)},
                     {"methods", {"svt", "matrix", "tensor"}},
                     {"completer", batch_completer_defaults()},
                     {"matrix_k_max", 50},
                     {"svt", svt_defaults()},
                     {"lanczos", lanczos_defaults()}};
       }},
      {"exact-vs-alg",
       [] {
         json h = hamiltonian_defaults();
         h["kind"] = "random_homogeneous";
         h["seed"] = 1;
         return json{{"hamiltonian", h},
                     {"sizes", {10, 12}},
                     {"unsampled", 50},
                     {"seed", 1},
                     {"completer", batch_completer_defaults()},
                     {"pair_search", pair_search_defaults()},
                     {"lanczos", lanczos_defaults()}};
       }},
      {"gen-state",
       [] {
         return json{{"hamiltonian", hamiltonian_defaults()}, {"solver", "lanczos"}, {"lanczos", lanczos_defaults()}};
       }},
  };
  return table;
}

json resolve(std::string_view experiment, const json& config) {
  return parse_stage([&] { return merge(default_config(experiment), config, ""); });
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"spectra",         "phase-sweep",  "alpha-fit", "complete",
                                                 "sweep-rates",     "compare-methods", "exact-vs-alg", "gen-state"};
  return names;
}

json default_config(std::string_view experiment) {
  const auto& table = default_table();
  const auto it = table.find(experiment);
  if (it == table.end()) throw ConfigError("unknown experiment '" + std::string(experiment) + "'");
  return it->second();
}

// ---- spectra ----------------------------------------------------------------

ExperimentOutput cmd_spectra(const json& config, const RunOptions& options) {
  constexpr std::string_view kName = "spectra";
  json resolved = resolve(kName, config);

  struct Model {
    std::string name;
    HamiltonianSpec spec;
  };
  double cutoff = 0.0;
  LanczosOptions lanczos;
  std::vector<Model> models;
  parse_stage([&] {
    cutoff = resolved.at("cutoff").get<double>();
    lanczos = read_lanczos(resolved.at("lanczos"));
    json expanded = json::array();
    for (auto& entry : resolved.at("models")) {
      json m = merge(spectra_model_defaults(), entry, "models[]");
      if (m.at("name").get<std::string>().empty()) throw ConfigError("every model needs a name");
      const std::string name = m.at("name").get<std::string>();
      if (m.at("seeds").is_null()) {
        m.erase("seeds");
        models.push_back({name, read_hamiltonian(m.at("hamiltonian"))});
      } else {
        for (auto seed : read_seeds(m.at("seeds"), options)) {
          json h = m.at("hamiltonian");
          h["seed"] = seed;
          models.push_back({name + "/seed" + std::to_string(seed), read_hamiltonian(h)});
        }
      }
      expanded.push_back(m);
    }
    if (models.empty()) throw ConfigError("spectra needs at least one model");
    resolved["models"] = expanded;
    return 0;
  });

  struct Row {
    std::vector<double> sigma;
    int rank;
  };
  const auto rows = parallel_map<Row>(models.size(), options.workers, [&](std::size_t i) {
    const StateVector psi = solve(models[i].spec, lanczos);
    SingularSpectrum s = singular_values(psi, central_cut(psi.shape()));
    const int rank = effective_rank(s, cutoff);
    return Row{std::move(s.values), rank};
  });

  Csv csv(kName, resolved, "model,k,sigma_k,effective_rank");
  json summary = json::object();
  for (std::size_t i = 0; i < models.size(); ++i) {
    for (std::size_t k = 0; k < rows[i].sigma.size(); ++k)
      csv.row(models[i].name, k + 1, fmt(rows[i].sigma[k]), rows[i].rank);
    summary[models[i].name] = {{"effective_rank", rows[i].rank}, {"sigma", rows[i].sigma}};
  }
  return {resolved, {{"spectra.csv", csv.str()}}, summary};
}

// ---- phase sweep ------------------------------------------------------------

ExperimentOutput cmd_phase_sweep(const json& config, const RunOptions& options) {
  constexpr std::string_view kName = "phase-sweep";
  json resolved = resolve(kName, config);

  HamiltonianSpec base;
  std::vector<std::uint64_t> seeds;
  int per_state = 0;
  PhaseSearchOptions search;
  Bipartition cut;
  int sweep_draw = 0;
  LanczosOptions lanczos;
  parse_stage([&] {
    base = read_hamiltonian(resolved.at("hamiltonian"));
    seeds = read_seeds(resolved.at("seeds"), options);
    per_state = resolved.at("indices_per_state").get<int>();
    if (per_state < 1) throw ConfigError("indices_per_state must be >= 1");
    search.grid_points = resolved.at("grid_points").get<int>();
    if (search.grid_points < 2) throw ConfigError("grid_points must be >= 2");
    search.nelder_mead = read_nelder_mead(resolved.at("nelder_mead"));
    cut.block_start = resolved.at("block_start").get<int>();
    cut.block_len = resolved.at("block_len").get<int>();
    if (cut.block_len == 0) cut.block_len = base.num_sites / 2;
    resolved["block_len"] = cut.block_len;
    validate_cut(base.shape(), cut);
    sweep_draw = resolved.at("sweep_draw").get<int>();
    if (sweep_draw < 0 || static_cast<std::size_t>(sweep_draw) >= seeds.size() * static_cast<std::size_t>(per_state))
      throw ConfigError("sweep_draw out of range");
    lanczos = read_lanczos(resolved.at("lanczos"));
    return 0;
  });

  struct Draw {
    std::uint64_t seed;
    std::size_t index;
    PhaseMinimizationResult result;
  };
  using StateDraws = std::vector<Draw>;
  const auto per_seed = parallel_map<StateDraws>(seeds.size(), options.workers, [&](std::size_t s) {
    HamiltonianSpec spec = base;
    spec.seed = seeds[s];
    const StateVector psi = solve(spec, lanczos);
    Rng pick = Rng::stream(seeds[s], streams::index_pick);
    StateDraws draws;
    while (draws.size() < static_cast<std::size_t>(per_state)) {
      const std::size_t index = pick.below(psi.size());
      if (std::abs(psi[index]) == 0.0) continue;
      draws.push_back({seeds[s], index, minimize_single_phase(psi, index, cut, search)});
    }
    return draws;
  });

  Csv markers(kName, resolved,
              "seed,index,theta_exact,theta_s_half,theta_s_one,dtheta_s_half,dtheta_s_one,s_half_at_exact,"
              "s_half_at_min,s_one_at_exact,s_one_at_min");
  std::vector<double> d_half;
  std::vector<double> d_one;
  const PhaseMinimizationResult* shown = nullptr;
  int draw_id = 0;
  for (const auto& draws : per_seed)
    for (const auto& d : draws) {
      const auto& r = d.result;
      d_half.push_back(circular_distance(r.theta_s_half, r.theta_exact));
      d_one.push_back(circular_distance(r.theta_s_one, r.theta_exact));
      markers.row(d.seed, d.index, fmt(r.theta_exact), fmt(r.theta_s_half), fmt(r.theta_s_one), fmt(d_half.back()),
                  fmt(d_one.back()), fmt(r.s_half_at_exact), fmt(r.s_half_at_min), fmt(r.s_one_at_exact),
                  fmt(r.s_one_at_min));
      if (draw_id++ == sweep_draw) shown = &r;
    }

  Csv sweep(kName, resolved, "theta,s_half,s_one");
  for (std::size_t j = 0; j < shown->sweep.theta.size(); ++j)
    sweep.row(fmt(shown->sweep.theta[j]), fmt(shown->sweep.s_half[j]), fmt(shown->sweep.s_one[j]));

  const json summary{{"draws", d_half.size()},
                     {"median_dtheta_s_half", aggregate_trials(d_half).median},
                     {"median_dtheta_s_one", aggregate_trials(d_one).median},
                     {"markers",
                      {{"theta_exact", shown->theta_exact},
                       {"theta_s_half", shown->theta_s_half},
                       {"theta_s_one", shown->theta_s_one}}}};
  return {resolved, {{"phase_sweep.csv", sweep.str()}, {"phase_markers.csv", markers.str()}}, summary};
}

// ---- alpha fit ----------------------------------------------------------------

ExperimentOutput cmd_alpha_fit(const json& config, const RunOptions& options) {
  constexpr std::string_view kName = "alpha-fit";
  json resolved = resolve(kName, config);

  struct Group {
    int d;
    int l;
    std::vector<int> sizes;
  };
  std::vector<Group> groups;
  int states = 0;
  int pairs = 0;
  std::uint64_t base_seed = 0;
  Boundary boundary = Boundary::periodic;
  ModelKind kind = ModelKind::random_inhomogeneous;
  PairSearchOptions search;
  LanczosOptions lanczos;
  parse_stage([&] {
    for (const auto& g : resolved.at("groups")) {
      check_keys(json{{"d", 0}, {"l", 0}, {"sizes", 0}}, g, "groups[]");
      groups.push_back({g.at("d").get<int>(), g.at("l").get<int>(), read_sizes(g.at("sizes"))});
      if (groups.back().sizes.size() < 3) throw ConfigError("each alpha-fit group needs at least 3 sizes");
    }
    if (groups.empty()) throw ConfigError("alpha-fit needs at least one group");
    states = resolved.at("states_per_point").get<int>();
    pairs = resolved.at("pairs_per_state").get<int>();
    if (states < 1 || pairs < 1) throw ConfigError("states_per_point and pairs_per_state must be >= 1");
    if (options.seed) resolved["base_seed"] = *options.seed;
    base_seed = resolved.at("base_seed").get<std::uint64_t>();
    boundary = boundary_from_string(resolved.at("boundary").get<std::string>());
    kind = model_kind_from_string(resolved.at("kind").get<std::string>());
    search = read_pair_search(resolved.at("pair_search"));
    lanczos = read_lanczos(resolved.at("lanczos"));
    for (const auto& g : groups)
      for (int n : g.sizes) {
        HamiltonianSpec spec{n, g.d, g.l, boundary, kind, 0.0, base_seed};
        spec.validate();
      }
    return 0;
  });

  struct Cell {
    std::size_t group;
    int n;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (int n : groups[g].sizes)
      for (int s = 0; s < states; ++s) cells.push_back({g, n, base_seed + static_cast<std::uint64_t>(s)});

  const auto medians = parallel_map<double>(cells.size(), options.workers, [&](std::size_t i) {
    const Cell& c = cells[i];
    const HamiltonianSpec spec{c.n, groups[c.group].d, groups[c.group].l, boundary, kind, 0.0, c.seed};
    const StateVector psi = solve(spec, lanczos);
    Rng pick = Rng::stream(c.seed, streams::index_pick);
    std::vector<double> errors;
    for (int p = 0; p < pairs; ++p) {
      const std::size_t a = pick.below(psi.size());
      std::size_t b = pick.below(psi.size());
      while (b == a) b = pick.below(psi.size());
      errors.push_back(minimize_pair(psi, a, b, central_cut(psi.shape()), search).coefficient_error);
    }
    return aggregate_trials(errors).median;
  });

  Csv per_state(kName, resolved, "d,l,n,seed,median_eps");
  Csv points_csv(kName, resolved, "d,l,n,median_eps,normalized_eps,n_states");
  std::vector<FitRow> fits;
  json summary = json::array();
  std::size_t i = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::vector<std::pair<double, double>> points;
    for (int n : groups[g].sizes) {
      const double scale = std::pow(static_cast<double>(groups[g].d), n);
      std::vector<double> normalized;
      std::vector<double> raw;
      for (int s = 0; s < states; ++s, ++i) {
        per_state.row(groups[g].d, groups[g].l, n, cells[i].seed, fmt(medians[i]));
        raw.push_back(medians[i]);
        normalized.push_back(medians[i] / scale);
      }
      const double point = median_of_medians(normalized);
      points_csv.row(groups[g].d, groups[g].l, n, fmt(median_of_medians(raw)), fmt(point), states);
      points.emplace_back(n, point);
    }
    const ExponentialFit fit = parse_stage([&] { return fit_exponential(points); });
    fits.push_back({groups[g].d, groups[g].l, fit});
    summary.push_back({{"d", groups[g].d},
                       {"l", groups[g].l},
                       {"alpha", fit.alpha},
                       {"beta", fit.beta},
                       {"r_squared", fit.r_squared}});
  }
  std::ostringstream fit_csv;
  fit_csv << provenance_line(kName, resolved);
  write_fit_csv(fit_csv, fits);
  return {resolved,
          {{"alpha_fit.csv", fit_csv.str()}, {"alpha_points.csv", points_csv.str()},
           {"alpha_states.csv", per_state.str()}},
          {{"fits", summary}}};
}

// ---- single completion ------------------------------------------------------

namespace {

enum class Method { svt, matrix, tensor };

Method method_from_string(const std::string& s) {
  if (s == "svt") return Method::svt;
  if (s == "matrix") return Method::matrix;
  if (s == "tensor") return Method::tensor;
  throw ConfigError("unknown completion method '" + s + "'");
}

CompletionResult run_method(Method method, const SampleMask& mask, CompleterConfig completer, const SvtOptions& svt,
                            std::uint64_t seed, const StateVector& exact) {
  completer.shuffle_seed = Rng::child_seed(seed, streams::schedule_shuffle);
  switch (method) {
    case Method::svt: return svt_complete(mask, svt, &exact);
    case Method::matrix: return matrix_complete(mask, completer, &exact);
    case Method::tensor: break;
  }
  return tensor_complete(mask, completer, &exact);
}

}  // namespace

ExperimentOutput cmd_complete(const json& config, const RunOptions& options) {
  constexpr std::string_view kName = "complete";
  json resolved = resolve(kName, config);

  HamiltonianSpec spec;
  double rate = 0.0;
  std::uint64_t seed = 0;
  Method method = Method::tensor;
  CompleterConfig completer;
  SvtOptions svt;
  LanczosOptions lanczos;
  parse_stage([&] {
    spec = read_hamiltonian(resolved.at("hamiltonian"));
    rate = read_rates(json::array({resolved.at("rate")})).front();
    if (options.seed) resolved["seed"] = *options.seed;
    seed = resolved.at("seed").get<std::uint64_t>();
    method = method_from_string(resolved.at("method").get<std::string>());
    completer = read_completer(resolved.at("completer"));
    completer.validate(spec.shape());
    svt = read_svt(resolved.at("svt"));
    lanczos = read_lanczos(resolved.at("lanczos"));
    return 0;
  });

  const StateVector exact = solve(spec, lanczos);
  const SampleMask mask = draw_mask(exact, rate, Rng::child_seed(seed, streams::mask));
  const double initial_error = fidelity_error(exact, build_initial(mask));
  const CompletionResult result = run_method(method, mask, completer, svt, seed, exact);
  const double final_err = final_error(exact, result.state);

  Csv trace(kName, resolved, "chi,k,cut_sweeps,fidelity_error,mean_s_half,rel_change");
  for (const auto& r : result.trace.records)
    trace.row(r.chi, r.k, r.cut_sweeps, fmt(r.fidelity_error), fmt(r.mean_s_half), fmt(r.rel_change));
  Csv summary_csv(kName, resolved,
                  "n,rate,seed,initial_fidelity_error,final_fidelity_error,final_chi,cut_sweeps,converged");
  const int sweeps = result.trace.records.empty() ? 0 : result.trace.records.back().cut_sweeps;
  summary_csv.row(spec.num_sites, fmt(rate), seed, fmt(initial_error), fmt(final_err), result.trace.final_chi, sweeps,
                  result.trace.converged ? 1 : 0);

  std::ostringstream mask_bytes(std::ios::binary);
  write_mask(mask_bytes, mask);
  const json side{{"seed", seed}, {"mask_seed", mask.seed}};
  return {resolved,
          {{"trace.csv", trace.str()},
           {"complete.csv", summary_csv.str()},
           state_file("completed.wfc", result.state),
           sidecar("completed.wfc", kName, resolved, side),
           {"mask.wfm", mask_bytes.str(), true},
           sidecar("mask.wfm", kName, resolved, side)},
          {{"initial_fidelity_error", initial_error},
           {"final_fidelity_error", final_err},
           {"final_chi", result.trace.final_chi},
           {"cut_sweeps", sweeps},
           {"trace_rows", result.trace.records.size()}}};
}

// ---- rate sweep -------------------------------------------------------------

ExperimentOutput cmd_sweep_rates(const json& config, const RunOptions& options) {
  constexpr std::string_view kName = "sweep-rates";
  json resolved = resolve(kName, config);

  HamiltonianSpec base;
  std::vector<int> sizes;
  std::vector<double> rates;
  std::vector<std::uint64_t> seeds;
  CompleterConfig completer;
  LanczosOptions lanczos;
  parse_stage([&] {
    base = read_hamiltonian(resolved.at("hamiltonian"));
    sizes = read_sizes(resolved.at("sizes"));
    rates = read_rates(resolved.at("rates"));
    seeds = read_seeds(resolved.at("seeds"), options);
    completer = read_completer(resolved.at("completer"));
    lanczos = read_lanczos(resolved.at("lanczos"));
    for (int n : sizes) {
      HamiltonianSpec s = base;
      s.num_sites = n;
      s.validate();
      completer.validate(s.shape());
    }
    return 0;
  });

  struct StateKey {
    int n;
    std::uint64_t seed;
  };
  std::vector<StateKey> state_keys;
  for (int n : sizes)
    for (auto s : seeds) state_keys.push_back({n, s});
  const auto states = parallel_map<StateVector>(state_keys.size(), options.workers, [&](std::size_t i) {
    HamiltonianSpec spec = base;
    spec.num_sites = state_keys[i].n;
    spec.seed = state_keys[i].seed;
    return solve(spec, lanczos);
  });

  struct Cell {
    std::size_t state;
    double rate;
  };
  std::vector<Cell> cells;
  for (std::size_t si = 0; si < state_keys.size(); ++si)
    for (double r : rates) cells.push_back({si, r});
  const auto errors = parallel_map<double>(cells.size(), options.workers, [&](std::size_t i) {
    const StateVector& exact = states[cells[i].state];
    const std::uint64_t seed = state_keys[cells[i].state].seed;
    const SampleMask mask = draw_mask(exact, cells[i].rate, Rng::child_seed(seed, streams::mask));
    return final_error(exact, run_method(Method::tensor, mask, completer, {}, seed, exact).state);
  });

  // Rows sorted by (n, rate, seed).
  std::vector<std::size_t> order(cells.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto key = [&](std::size_t i) {
    return std::tuple{state_keys[cells[i].state].n, cells[i].rate, state_keys[cells[i].state].seed};
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });

  Csv csv(kName, resolved, "n,rate,seed,final_fidelity_error");
  std::map<std::pair<int, double>, std::vector<double>> groups;
  for (std::size_t i : order) {
    const auto [n, rate, seed] = key(i);
    csv.row(n, fmt(rate), seed, fmt(errors[i]));
    groups[{n, rate}].push_back(errors[i]);
  }
  std::vector<AggregateRow> aggregates;
  json summary = json::array();
  for (const auto& [k, values] : groups) {
    aggregates.push_back({"n=" + std::to_string(k.first) + ";rate=" + fmt(k.second), aggregate_trials(values)});
    summary.push_back({{"n", k.first}, {"rate", k.second}, {"median", aggregates.back().stats.median}});
  }
  return {resolved,
          {{"sweep_rates.csv", csv.str()}, {"sweep_rates_aggregate.csv", aggregate_text(kName, resolved, aggregates)}},
          {{"medians", summary}}};
}

// ---- method comparison ------------------------------------------------------

ExperimentOutput cmd_compare_methods(const json& config, const RunOptions& options) {
  constexpr std::string_view kName = "compare-methods";
  json resolved = resolve(kName, config);

  HamiltonianSpec base;
  std::vector<double> rates;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> method_names;
  CompleterConfig completer;
  CompleterConfig matrix_completer;
  SvtOptions svt;
  LanczosOptions lanczos;
  parse_stage([&] {
    base = read_hamiltonian(resolved.at("hamiltonian"));
    rates = read_rates(resolved.at("rates"));
    seeds = read_seeds(resolved.at("seeds"), options);
    method_names = resolved.at("methods").get<std::vector<std::string>>();
    if (method_names.empty()) throw ConfigError("methods list is empty");
    for (const auto& m : method_names) (void)method_from_string(m);
    completer = read_completer(resolved.at("completer"));
    completer.validate(base.shape());
    // A single cut costs far less per sweep than the full schedule, so it gets its own sweep budget.
    matrix_completer = completer;
    matrix_completer.k_max = resolved.at("matrix_k_max").get<int>();
    matrix_completer.validate(base.shape());
    svt = read_svt(resolved.at("svt"));
    lanczos = read_lanczos(resolved.at("lanczos"));
    return 0;
  });

  const auto states = parallel_map<StateVector>(seeds.size(), options.workers, [&](std::size_t i) {
    HamiltonianSpec spec = base;
    spec.seed = seeds[i];
    return solve(spec, lanczos);
  });

  struct Cell {
    std::size_t method;
    double rate;
    std::size_t seed;
  };
  std::vector<Cell> cells;
  for (std::size_t m = 0; m < method_names.size(); ++m)
    for (double r : rates)
      for (std::size_t s = 0; s < seeds.size(); ++s) cells.push_back({m, r, s});
  const auto errors = parallel_map<double>(cells.size(), options.workers, [&](std::size_t i) {
    const Cell& c = cells[i];
    const StateVector& exact = states[c.seed];
    // Every method sees the same mask for a given (seed, rate).
    const SampleMask mask = draw_mask(exact, c.rate, Rng::child_seed(seeds[c.seed], streams::mask));
    const Method method = method_from_string(method_names[c.method]);
    const CompleterConfig& cfg = method == Method::matrix ? matrix_completer : completer;
    return final_error(exact, run_method(method, mask, cfg, svt, seeds[c.seed], exact).state);
  });

  Csv csv(kName, resolved, "method,rate,seed,final_fidelity_error");
  std::vector<AggregateRow> aggregates;
  json summary = json::object();
  for (std::size_t m = 0, i = 0; m < method_names.size(); ++m)
    for (double r : rates) {
      std::vector<double> values;
      for (std::size_t s = 0; s < seeds.size(); ++s, ++i) {
        csv.row(method_names[m], fmt(r), seeds[s], fmt(errors[i]));
        values.push_back(errors[i]);
      }
      aggregates.push_back({"method=" + method_names[m] + ";rate=" + fmt(r), aggregate_trials(values)});
      summary[method_names[m]][fmt(r)] = aggregates.back().stats.median;
    }
  return {resolved,
          {{"compare_methods.csv", csv.str()},
           {"compare_methods_aggregate.csv", aggregate_text(kName, resolved, aggregates)}},
          {{"medians", summary}}};
}

// ---- exact minimization vs algorithm ----------------------------------------

ExperimentOutput cmd_exact_vs_alg(const json& config, const RunOptions& options) {
  constexpr std::string_view kName = "exact-vs-alg";
  json resolved = resolve(kName, config);

  HamiltonianSpec base;
  std::vector<int> sizes;
  int unsampled = 0;
  std::uint64_t seed = 0;
  CompleterConfig completer;
  PairSearchOptions search;
  LanczosOptions lanczos;
  parse_stage([&] {
    base = read_hamiltonian(resolved.at("hamiltonian"));
    sizes = read_sizes(resolved.at("sizes"));
    unsampled = resolved.at("unsampled").get<int>();
    if (unsampled < 2) throw ConfigError("unsampled must be >= 2");
    if (options.seed) resolved["seed"] = *options.seed;
    seed = resolved.at("seed").get<std::uint64_t>();
    completer = read_completer(resolved.at("completer"));
    search = read_pair_search(resolved.at("pair_search"));
    lanczos = read_lanczos(resolved.at("lanczos"));
    for (int n : sizes) {
      HamiltonianSpec s = base;
      s.num_sites = n;
      s.validate();
      completer.validate(s.shape());
      if (static_cast<std::size_t>(unsampled) >= s.shape().size())
        throw ConfigError("unsampled must be smaller than d^N");
    }
    return 0;
  });

  struct SizeResult {
    std::vector<std::uint64_t> indices;
    std::vector<Complex> exact;
    std::vector<double> eps_exact;
    std::vector<double> eps_alg;
    double fidelity_error;
  };
  // The same operator (base.seed) at every N; only the mask seed is shared.
  const auto results = parallel_map<SizeResult>(sizes.size(), options.workers, [&](std::size_t i) {
    HamiltonianSpec spec = base;
    spec.num_sites = sizes[i];
    const StateVector psi = solve(spec, lanczos);
    const SampleMask mask =
        draw_mask_count(psi, psi.size() - static_cast<std::size_t>(unsampled), Rng::child_seed(seed, streams::mask));
    const std::vector<std::uint64_t> free = unsampled_indices(mask);
    const CompletionResult completed = run_method(Method::tensor, mask, completer, {}, seed, psi);

    SizeResult r;
    r.indices = free;
    r.fidelity_error = final_error(psi, completed.state);
    const Bipartition cut = central_cut(psi.shape());
    for (std::size_t k = 0; k < free.size(); ++k) {
      const std::size_t a = free[k];
      const std::size_t b = free[(k + 1) % free.size()];
      r.exact.push_back(psi[a]);
      r.eps_exact.push_back(minimize_pair(psi, a, b, cut, search).coefficient_error);
      r.eps_alg.push_back(coefficient_error(psi[a], completed.state[a]));
    }
    return r;
  });

  Csv csv(kName, resolved, "n,index,c_re,c_im,eps_exact_min,eps_algorithm");
  std::vector<AggregateRow> aggregates;
  json summary = json::array();
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const auto& r = results[i];
    for (std::size_t k = 0; k < r.indices.size(); ++k)
      csv.row(sizes[i], r.indices[k], fmt(r.exact[k].real()), fmt(r.exact[k].imag()), fmt(r.eps_exact[k]),
              fmt(r.eps_alg[k]));
    const TrialAggregate ex = aggregate_trials(r.eps_exact);
    const TrialAggregate alg = aggregate_trials(r.eps_alg);
    aggregates.push_back({"n=" + std::to_string(sizes[i]) + ";method=exact_min", ex});
    aggregates.push_back({"n=" + std::to_string(sizes[i]) + ";method=algorithm", alg});
    summary.push_back({{"n", sizes[i]},
                       {"median_eps_exact_min", ex.median},
                       {"median_eps_algorithm", alg.median},
                       {"fidelity_error", r.fidelity_error}});
  }
  return {resolved,
          {{"exact_vs_alg.csv", csv.str()},
           {"exact_vs_alg_aggregate.csv", aggregate_text(kName, resolved, aggregates)}},
          {{"sizes", summary}}};
}

// ---- ground state generation ------------------------------------------------

ExperimentOutput cmd_gen_state(const json& config, const RunOptions& options) {
  constexpr std::string_view kName = "gen-state";
  json resolved = resolve(kName, config);

  HamiltonianSpec spec;
  bool dense = false;
  LanczosOptions lanczos;
  parse_stage([&] {
    if (options.seed) resolved["hamiltonian"]["seed"] = *options.seed;
    spec = read_hamiltonian(resolved.at("hamiltonian"));
    const auto solver = resolved.at("solver").get<std::string>();
    if (solver != "lanczos" && solver != "dense") throw ConfigError("solver must be lanczos or dense");
    dense = solver == "dense";
    lanczos = read_lanczos(resolved.at("lanczos"));
    return 0;
  });

  const GroundStateResult gs = dense ? dense_ground_state(spec) : ground_state(spec, lanczos);
  Csv csv(kName, resolved, "n,d,l,boundary,kind,seed,energy,residual,iterations,degenerate");
  csv.row(spec.num_sites, spec.local_dim, spec.interaction_len, to_string(spec.boundary), to_string(spec.kind),
          spec.seed, fmt(gs.energy), fmt(gs.residual), gs.iterations, gs.degenerate ? 1 : 0);
  return {resolved,
          {{"gen_state.csv", csv.str()}, state_file("state.wfc", gs.state),
           sidecar("state.wfc", kName, resolved, json{{"energy", gs.energy}})},
          {{"energy", gs.energy}, {"residual", gs.residual}, {"degenerate", gs.degenerate}}};
}

ExperimentOutput run_experiment(std::string_view experiment, const json& config, const RunOptions& options) {
  if (experiment == "spectra") return cmd_spectra(config, options);
  if (experiment == "phase-sweep") return cmd_phase_sweep(config, options);
  if (experiment == "alpha-fit") return cmd_alpha_fit(config, options);
  if (experiment == "complete") return cmd_complete(config, options);
  if (experiment == "sweep-rates") return cmd_sweep_rates(config, options);
  if (experiment == "compare-methods") return cmd_compare_methods(config, options);
  if (experiment == "exact-vs-alg") return cmd_exact_vs_alg(config, options);
  if (experiment == "gen-state") return cmd_gen_state(config, options);
  throw ConfigError("unknown experiment '" + std::string(experiment) + "'");
}

}  // namespace wfc
