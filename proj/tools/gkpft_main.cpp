// Command-line front end: sweep the memory experiment over noise grids,
// fit thresholds and scaling laws from emitted tables, verify the gate
// identities, or run a single seeded trial.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error,
// 4 threshold fit found no crossing.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gkpft/fitting.hpp"
#include "gkpft/montecarlo.hpp"
#include "gkpft/symplectic.hpp"
#include "json.hpp"

using namespace gkpft;

namespace {

struct RunConfig {
  std::vector<int> distances = {3};
  std::vector<double> epsilons;
  std::vector<double> dbs;
  double eta = 1.0;
  std::vector<double> p_swaps = {0.0};
  std::string prep = "iid";
  int trials = 1000;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out;
  std::string table;
};

PrepMode prep_mode_of(const std::string& name) {
  if (name == "iid") return PrepMode::iid_swap;
  if (name == "fixed-one-gkp") return PrepMode::fixed_one_gkp;
  throw std::invalid_argument("prep must be 'iid' or 'fixed-one-gkp'");
}

// Configuration file: a flat JSON object whose keys mirror the long flags.
// Flags override file values; unknown keys are rejected.
void load_config_file(const std::string& path, RunConfig* cfg) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  nlohmann::json j;
  in >> j;
  if (!j.is_object()) {
    throw std::invalid_argument("config file must hold a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    if (key == "distances") {
      cfg->distances = value.get<std::vector<int>>();
    } else if (key == "epsilon") {
      cfg->epsilons = value.get<std::vector<double>>();
    } else if (key == "db") {
      cfg->dbs = value.get<std::vector<double>>();
    } else if (key == "eta") {
      cfg->eta = value.get<double>();
    } else if (key == "p_swap") {
      cfg->p_swaps = value.get<std::vector<double>>();
    } else if (key == "prep") {
      cfg->prep = value.get<std::string>();
    } else if (key == "trials") {
      cfg->trials = value.get<int>();
    } else if (key == "seed") {
      cfg->seed = value.get<std::uint64_t>();
    } else if (key == "workers") {
      cfg->workers = value.get<int>();
    } else if (key == "out") {
      cfg->out = value.get<std::string>();
    } else if (key == "table") {
      cfg->table = value.get<std::string>();
    } else {
      throw std::invalid_argument("unknown config key: " + key);
    }
  }
}

// The epsilon grid comes either directly or from a (dB, eta) grid, not both.
std::vector<double> resolve_epsilons(const RunConfig& cfg) {
  if (!cfg.epsilons.empty() && !cfg.dbs.empty()) {
    throw std::invalid_argument(
        "give either an epsilon grid or a dB grid, not both");
  }
  if (!cfg.epsilons.empty()) {
    for (double e : cfg.epsilons) {
      if (!(e >= 0.0)) throw std::invalid_argument("epsilon must be >= 0");
    }
    return cfg.epsilons;
  }
  if (!cfg.dbs.empty()) {
    std::vector<double> eps;
    eps.reserve(cfg.dbs.size());
    for (double db : cfg.dbs) {
      eps.push_back(noise_from_db(db, cfg.eta).epsilon());
    }
    return eps;
  }
  throw std::invalid_argument("an epsilon or dB grid is required");
}

int effective_workers(const RunConfig& cfg) {
  if (const char* env = std::getenv("GKPFT_WORKERS")) {
    const int w = std::atoi(env);
    if (w < 1) throw std::invalid_argument("GKPFT_WORKERS must be >= 1");
    return w;
  }
  if (cfg.workers < 1) throw std::invalid_argument("workers must be >= 1");
  return cfg.workers;
}

void emit(const nlohmann::json& j, const std::string& out) {
  const std::string line = j.dump();
  std::printf("%s\n", line.c_str());
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write output file: " + out);
    f << line << "\n";
  }
}

int cmd_trial(const RunConfig& cfg) {
  const auto eps = resolve_epsilons(cfg);
  if (cfg.distances.size() != 1 || eps.size() != 1 ||
      cfg.p_swaps.size() != 1) {
    throw std::invalid_argument(
        "trial takes exactly one distance, one epsilon, and one p_swap");
  }
  TrialConfig tc;
  tc.distance = cfg.distances[0];
  tc.epsilon = eps[0];
  tc.prep = {prep_mode_of(cfg.prep), cfg.p_swaps[0]};
  tc.seed = cfg.seed;
  const bool failed = run_trial(tc);
  emit(nlohmann::json{{"record", "trial"},
                      {"distance", tc.distance},
                      {"epsilon", tc.epsilon},
                      {"p_swap", tc.prep.p_swap},
                      {"prep", cfg.prep},
                      {"seed", tc.seed},
                      {"failed", failed}},
       cfg.out);
  return 0;
}

int cmd_sweep(const RunConfig& cfg) {
  if (cfg.out.empty()) {
    throw std::invalid_argument("sweep requires --out for the table");
  }
  SweepGrid grid;
  grid.distances = cfg.distances;
  grid.epsilons = resolve_epsilons(cfg);
  grid.p_swaps = cfg.p_swaps;
  grid.prep_mode = prep_mode_of(cfg.prep);
  if (cfg.trials < 1) throw std::invalid_argument("trials must be >= 1");
  grid.n_trials = cfg.trials;
  grid.base_seed = cfg.seed;
  grid.n_workers = effective_workers(cfg);
  const auto rows = sweep(grid, cfg.out, &std::cerr);
  write_plot_columns(cfg.out + ".plot", rows);
  std::printf("%zu cells -> %s (+ .plot)\n", rows.size(), cfg.out.c_str());
  return 0;
}

// Restrict a loaded table to one experimental setting before fitting.
std::vector<SweepRow> load_rows(const RunConfig& cfg) {
  if (cfg.table.empty()) {
    throw std::invalid_argument("fitting requires --table with a sweep table");
  }
  const auto all = read_table(cfg.table);
  const PrepMode mode = prep_mode_of(cfg.prep);
  std::vector<SweepRow> rows;
  for (const auto& r : all) {
    if (r.prep_mode != mode) continue;
    if (cfg.p_swaps.size() == 1 && r.p_swap != cfg.p_swaps[0]) continue;
    rows.push_back(r);
  }
  if (rows.empty()) {
    throw std::invalid_argument("no table rows match the requested setting");
  }
  return rows;
}

int cmd_fit_threshold(const RunConfig& cfg) {
  const ThresholdFit fit = fit_threshold(load_rows(cfg));
  emit(nlohmann::json{{"record", "threshold_fit"},
                      {"epsilon_th", fit.epsilon_th},
                      {"stderr_epsilon", fit.stderr_epsilon},
                      {"nu", fit.nu},
                      {"a", fit.a},
                      {"b", fit.b},
                      {"c", fit.c},
                      {"chi2", fit.chi2},
                      {"n_points", fit.n_points},
                      {"window_center", fit.window_center}},
       cfg.out);
  return 0;
}

int cmd_fit_scaling(const RunConfig& cfg) {
  const ScalingFit fit = fit_scaling(load_rows(cfg));
  emit(nlohmann::json{{"record", "scaling_fit"},
                      {"t", fit.params.t},
                      {"a", fit.params.a},
                      {"nu", fit.params.nu},
                      {"mu", fit.params.mu},
                      {"rss", fit.rss},
                      {"n_points", fit.n_points}},
       cfg.out);
  return 0;
}

int cmd_verify_identities(const RunConfig& cfg) {
  const IdentityReport rep = verify_identities();
  emit(nlohmann::json{{"record", "identities"},
                      {"bs_cx_decomposition", rep.bs_cx_decomposition},
                      {"rotated_bs_cz", rep.rotated_bs_cz},
                      {"momentum_coupling_on_inputs",
                       rep.momentum_coupling_on_inputs},
                      {"form_defect", rep.form_defect},
                      {"max_deviation", rep.max_deviation()}},
       cfg.out);
  return rep.max_deviation() < 1e-12 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Monte Carlo estimator for fault-tolerance thresholds of a "
      "macronode cluster-state memory"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;

  // Every subcommand shares the same option surface; validity of a given
  // combination is checked per subcommand.
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path,
                    "JSON config file; flags override its values");
    sub->add_option("--distances", cfg.distances, "lattice distances");
    sub->add_option("--epsilon", cfg.epsilons, "noise variance grid");
    sub->add_option("--db", cfg.dbs, "squeezing grid in dB");
    sub->add_option("--eta", cfg.eta, "detector efficiency for --db");
    sub->add_option("--p-swap", cfg.p_swaps, "swap-out probability grid");
    sub->add_option("--prep", cfg.prep, "state preparation: iid|fixed-one-gkp");
    sub->add_option("--trials", cfg.trials, "Monte Carlo trials per cell");
    sub->add_option("--seed", cfg.seed, "base RNG seed");
    sub->add_option("--workers", cfg.workers,
                    "worker threads (env GKPFT_WORKERS overrides)");
    sub->add_option("--out", cfg.out, "output path");
    sub->add_option("--table", cfg.table, "input sweep table (fitting)");
  };

  CLI::App* trial = app.add_subcommand("trial", "run one seeded trial");
  CLI::App* swp = app.add_subcommand("sweep", "estimate failure rates");
  CLI::App* fth =
      app.add_subcommand("fit-threshold", "fit a threshold crossing");
  CLI::App* fsc = app.add_subcommand("fit-scaling", "fit the scaling law");
  CLI::App* vid =
      app.add_subcommand("verify-identities", "check the gate identities");
  for (CLI::App* sub : {trial, swp, fth, fsc, vid}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // --help exits 0; any parse failure is config
  }

  try {
    // Flag values win over the file: reparse flags after loading it.
    if (!config_path.empty()) {
      RunConfig flag_values = cfg;
      cfg = RunConfig{};
      load_config_file(config_path, &cfg);
      CLI::App* sub = app.get_subcommands().front();
      const auto keep = [&](const char* name, auto member) {
        if (sub->count(name) > 0) cfg.*member = flag_values.*member;
      };
      keep("--distances", &RunConfig::distances);
      keep("--epsilon", &RunConfig::epsilons);
      keep("--db", &RunConfig::dbs);
      keep("--eta", &RunConfig::eta);
      keep("--p-swap", &RunConfig::p_swaps);
      keep("--prep", &RunConfig::prep);
      keep("--trials", &RunConfig::trials);
      keep("--seed", &RunConfig::seed);
      keep("--workers", &RunConfig::workers);
      keep("--out", &RunConfig::out);
      keep("--table", &RunConfig::table);
    }

    if (app.got_subcommand("trial")) return cmd_trial(cfg);
    if (app.got_subcommand("sweep")) return cmd_sweep(cfg);
    if (app.got_subcommand("fit-threshold")) return cmd_fit_threshold(cfg);
    if (app.got_subcommand("fit-scaling")) return cmd_fit_scaling(cfg);
    return cmd_verify_identities(cfg);
  } catch (const NoCrossingError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
