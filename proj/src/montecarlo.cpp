#include "gkpft/montecarlo.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "gkpft/reduction.hpp"
#include "gkpft/rng.hpp"
#include "json.hpp"

namespace gkpft {

namespace {

constexpr double kZ95 = 1.959963984540054;  // two-sided 95% normal quantile

const char* prep_name(PrepMode mode) {
  return mode == PrepMode::iid_swap ? "iid" : "fixed-one-gkp";
}

PrepMode prep_from_name(const std::string& name) {
  if (name == "iid") return PrepMode::iid_swap;
  if (name == "fixed-one-gkp") return PrepMode::fixed_one_gkp;
  throw std::runtime_error("unknown preparation name: " + name);
}

nlohmann::json row_to_json(const SweepRow& row) {
  return nlohmann::json{{"record", "row"},
                        {"distance", row.distance},
                        {"epsilon", row.epsilon},
                        {"p_swap", row.p_swap},
                        {"prep", prep_name(row.prep_mode)},
                        {"n_trials", row.n_trials},
                        {"n_failures", row.n_failures},
                        {"rate", row.rate},
                        {"ci_low", row.ci_low},
                        {"ci_high", row.ci_high},
                        {"cell", row.cell}};
}

SweepRow row_from_json(const nlohmann::json& j) {
  SweepRow row;
  row.distance = j.at("distance").get<int>();
  row.epsilon = j.at("epsilon").get<double>();
  row.p_swap = j.at("p_swap").get<double>();
  row.prep_mode = prep_from_name(j.at("prep").get<std::string>());
  row.n_trials = j.at("n_trials").get<int>();
  row.n_failures = j.at("n_failures").get<int>();
  row.rate = j.at("rate").get<double>();
  row.ci_low = j.at("ci_low").get<double>();
  row.ci_high = j.at("ci_high").get<double>();
  row.cell = j.at("cell").get<std::uint64_t>();
  return row;
}

nlohmann::json header_json(std::uint64_t base_seed) {
  return nlohmann::json{{"record", "header"},
                        {"rng", kRngAlgorithm},
                        {"base_seed", base_seed}};
}

void check_header(const nlohmann::json& j) {
  if (j.at("rng").get<std::string>() != kRngAlgorithm) {
    throw std::runtime_error(
        "table was produced by a different RNG algorithm: " +
        j.at("rng").get<std::string>());
  }
}

}  // namespace

TrialContext::TrialContext(int distance)
    : lattice_(LatticeSpec{distance}),
      cz_(cz_network(lattice_)),
      bases_(measurement_bases(lattice_.num_nodes())) {
  if (distance < 3 || distance % 2 == 0) {
    throw std::invalid_argument(
        "memory experiments need an odd distance of at least 3");
  }
}

bool TrialContext::run(double epsilon, const StatePrepConfig& prep,
                       std::uint64_t seed) const {
  if (!(epsilon >= 0.0)) {
    throw std::invalid_argument("noise variance must be >= 0");
  }
  TrialRng rng(seed);
  // epsilon counts noise in shot-noise units (vacuum variance = 1).  On the
  // quadrature axis used here, where the grid-state comb is sqrt(pi)-spaced
  // and the vacuum variance is 1/2, one outcome therefore carries absolute
  // variance epsilon / 2.
  const double variance = 0.5 * epsilon;
  const InputSample sample = sample_inputs(lattice_.num_modes(), prep, rng);
  const std::vector<int> pw = build_phys_of_wire(sample.type);
  const Eigen::VectorXd wire_means =
      propagate_macronode_wires(cz_.apply(sample.means), pw);
  const Eigen::VectorXd noisy =
      measure_with_noise(wire_means, bases_, variance, rng);
  TrialRng unused(0);  // the clean record consumes no randomness
  const Eigen::VectorXd clean =
      measure_with_noise(wire_means, bases_, 0.0, unused);

  const auto reduced = reduce_lattice(lattice_, sample.type, pw, noisy,
                                      variance);
  const auto reference = reduce_lattice(lattice_, sample.type, pw, clean, 0.0);
  std::vector<std::uint8_t> error_bits(reduced.size());
  for (std::size_t i = 0; i < reduced.size(); ++i) {
    error_bits[i] =
        static_cast<std::uint8_t>(reduced[i].bit ^ reference[i].bit);
  }
  const auto weights = assign_weights(lattice_, reduced);
  return decode_errors(lattice_, error_bits, weights).failed;
}

bool run_trial(const TrialConfig& cfg) {
  const TrialContext ctx(cfg.distance);
  return ctx.run(cfg.epsilon, cfg.prep, cfg.seed);
}

WilsonInterval wilson_interval(int failures, int trials) {
  if (trials < 1 || failures < 0 || failures > trials) {
    throw std::invalid_argument("need 0 <= failures <= trials, trials >= 1");
  }
  const double n = trials;
  const double p = failures / n;
  const double z2 = kZ95 * kZ95;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      (kZ95 / denom) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  // Pin the boundary cases exactly so 0/n reports low == 0 and n/n high == 1.
  const double low = failures == 0 ? 0.0 : std::max(0.0, center - half);
  const double high = failures == trials ? 1.0 : std::min(1.0, center + half);
  return {low, high};
}

std::uint64_t sweep_cell_id(int distance, double epsilon, double p_swap,
                            PrepMode mode) {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (const std::uint64_t word :
       {static_cast<std::uint64_t>(distance),
        std::bit_cast<std::uint64_t>(epsilon),
        std::bit_cast<std::uint64_t>(p_swap),
        static_cast<std::uint64_t>(mode)}) {
    h = splitmix64(h ^ word);
  }
  return h;
}

SweepRow estimate_rate(const TrialContext& ctx, double epsilon,
                       const StatePrepConfig& prep, int n_trials,
                       std::uint64_t base_seed, int n_workers) {
  if (n_trials < 1) throw std::invalid_argument("need at least one trial");
  if (n_workers < 1) throw std::invalid_argument("need at least one worker");
  const std::uint64_t cell = sweep_cell_id(ctx.lattice().distance(), epsilon,
                                           prep.p_swap, prep.mode);
  std::atomic<int> failures{0};
  auto work = [&](int begin, int end) {
    int local = 0;
    for (int t = begin; t < end; ++t) {
      local += ctx.run(epsilon, prep,
                       derive_seed(base_seed, cell,
                                   static_cast<std::uint64_t>(t)));
    }
    failures += local;
  };
  if (n_workers == 1) {
    work(0, n_trials);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (n_trials + n_workers - 1) / n_workers;
    for (int w = 0; w < n_workers; ++w) {
      const int begin = w * chunk;
      const int end = std::min(n_trials, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  SweepRow row;
  row.distance = ctx.lattice().distance();
  row.epsilon = epsilon;
  row.p_swap = prep.mode == PrepMode::iid_swap ? prep.p_swap : 0.0;
  row.prep_mode = prep.mode;
  row.n_trials = n_trials;
  row.n_failures = failures.load();
  row.rate = static_cast<double>(row.n_failures) / n_trials;
  const WilsonInterval ci = wilson_interval(row.n_failures, n_trials);
  row.ci_low = ci.low;
  row.ci_high = ci.high;
  row.cell = cell;
  return row;
}

std::vector<SweepRow> sweep(const SweepGrid& grid,
                            const std::string& checkpoint_path,
                            std::ostream* progress) {
  if (grid.distances.empty() || grid.epsilons.empty()) {
    throw std::invalid_argument("sweep grid must be nonempty");
  }
  std::vector<double> p_swaps = grid.p_swaps;
  if (grid.prep_mode == PrepMode::fixed_one_gkp || p_swaps.empty()) {
    p_swaps = {0.0};
  }

  // Resume: load finished cells keyed by (cell id, trial count).
  std::vector<SweepRow> done;
  if (!checkpoint_path.empty()) {
    std::ifstream probe(checkpoint_path);
    if (probe.good()) {
      std::uint64_t file_seed = 0;
      done = read_table(checkpoint_path, &file_seed);
      if (!done.empty() && file_seed != grid.base_seed) {
        throw std::runtime_error(
            "checkpoint was written with a different base seed");
      }
    }
  }
  auto find_done = [&](std::uint64_t cell, int n_trials) -> const SweepRow* {
    for (const auto& row : done) {
      if (row.cell == cell && row.n_trials == n_trials) return &row;
    }
    return nullptr;
  };

  std::ofstream out;
  if (!checkpoint_path.empty()) {
    const bool fresh = done.empty();
    out.open(checkpoint_path, fresh ? std::ios::trunc : std::ios::app);
    if (!out) {
      throw std::runtime_error("cannot open checkpoint file: " +
                               checkpoint_path);
    }
    if (fresh) out << header_json(grid.base_seed) << "\n" << std::flush;
  }

  std::vector<SweepRow> table;
  for (const int d : grid.distances) {
    const TrialContext ctx(d);
    for (const double eps : grid.epsilons) {
      for (const double ps : p_swaps) {
        const std::uint64_t cell =
            sweep_cell_id(d, eps, ps, grid.prep_mode);
        if (const SweepRow* prior = find_done(cell, grid.n_trials)) {
          table.push_back(*prior);
          continue;
        }
        const StatePrepConfig prep{grid.prep_mode, ps};
        const SweepRow row = estimate_rate(ctx, eps, prep, grid.n_trials,
                                           grid.base_seed, grid.n_workers);
        table.push_back(row);
        if (out.is_open()) {
          out << row_to_json(row) << "\n" << std::flush;
          if (!out) {
            throw std::runtime_error("checkpoint write failed: " +
                                     checkpoint_path);
          }
        }
        if (progress != nullptr) {
          *progress << "d=" << d << " epsilon=" << eps << " p_swap=" << ps
                    << " rate=" << row.rate << " (" << row.n_failures << "/"
                    << row.n_trials << ")\n"
                    << std::flush;
        }
      }
    }
  }
  return table;
}

void write_table(const std::string& path, std::uint64_t base_seed,
                 const std::vector<SweepRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << header_json(base_seed) << "\n";
  for (const auto& row : rows) out << row_to_json(row) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<SweepRow> read_table(const std::string& path,
                                 std::uint64_t* base_seed_out) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open table file: " + path);
  std::vector<SweepRow> rows;
  std::string line;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const nlohmann::json j = nlohmann::json::parse(line);
    const std::string kind = j.at("record").get<std::string>();
    if (kind == "header") {
      check_header(j);
      if (base_seed_out != nullptr) {
        *base_seed_out = j.at("base_seed").get<std::uint64_t>();
      }
      saw_header = true;
    } else if (kind == "row") {
      rows.push_back(row_from_json(j));
    } else {
      throw std::runtime_error("unknown record kind: " + kind);
    }
  }
  if (!saw_header) {
    throw std::runtime_error("table has no header record: " + path);
  }
  return rows;
}

void write_plot_columns(const std::string& path,
                        const std::vector<SweepRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << "# distance epsilon p_swap rate ci_low ci_high\n";
  char buf[256];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%d %.17g %.17g %.17g %.17g %.17g\n",
                  row.distance, row.epsilon, row.p_swap, row.rate, row.ci_low,
                  row.ci_high);
    out << buf;
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace gkpft
