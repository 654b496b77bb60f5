#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gkpft/decoder.hpp"
#include "gkpft/lattice.hpp"
#include "gkpft/symplectic.hpp"

namespace gkpft {

// One logical-memory experiment: sample resource states, entangle and split,
// measure with noise, reduce to the canonical lattice, decode, and compare
// the three correlation-surface parities against the noiseless record.

struct TrialConfig {
  int distance = 3;
  double epsilon = 0.0;  // combined pre-detection noise variance per quadrature
  StatePrepConfig prep;
  std::uint64_t seed = 0;
};

// Reusable per-distance state (lattice, entangling network, homodyne bases)
// so sweeps do not rebuild them for every trial. Threshold estimation runs on
// odd distances; the constructor enforces this.
class TrialContext {
 public:
  explicit TrialContext(int distance);

  const RhgLattice& lattice() const { return lattice_; }

  // True on logical failure. Deterministic in (epsilon, prep, seed).
  bool run(double epsilon, const StatePrepConfig& prep,
           std::uint64_t seed) const;

 private:
  RhgLattice lattice_;
  SymplecticOp cz_;
  std::vector<Basis> bases_;
};

bool run_trial(const TrialConfig& cfg);

struct WilsonInterval {
  double low = 0.0;
  double high = 1.0;
};

// 95% Wilson score interval for `failures` out of `trials`.
WilsonInterval wilson_interval(int failures, int trials);

struct SweepRow {
  int distance = 0;
  double epsilon = 0.0;
  double p_swap = 0.0;
  PrepMode prep_mode = PrepMode::iid_swap;
  int n_trials = 0;
  int n_failures = 0;
  double rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  std::uint64_t cell = 0;
};

// Stable identifier of a sweep cell; the per-trial seed is
// derive_seed(base_seed, cell, trial), which makes results independent of
// grid order, worker count, and scheduling.
std::uint64_t sweep_cell_id(int distance, double epsilon, double p_swap,
                            PrepMode mode);

// Failure-rate point estimate over n_trials independent trials. n_workers
// threads split the trial range; counts are invariant to the split.
SweepRow estimate_rate(const TrialContext& ctx, double epsilon,
                       const StatePrepConfig& prep, int n_trials,
                       std::uint64_t base_seed, int n_workers = 1);

struct SweepGrid {
  std::vector<int> distances;
  std::vector<double> epsilons;
  std::vector<double> p_swaps;  // ignored by fixed_one_gkp preparation
  PrepMode prep_mode = PrepMode::iid_swap;
  int n_trials = 10000;
  std::uint64_t base_seed = 1;
  int n_workers = 1;
};

// Grid sweep in row-major (d, epsilon, p_swap) order. When checkpoint_path
// is nonempty, finished cells are appended there as they complete and are
// skipped on re-entry, so an interrupted sweep resumes without duplicates.
// `progress`, when given, receives one line per finished cell.
std::vector<SweepRow> sweep(const SweepGrid& grid,
                            const std::string& checkpoint_path = "",
                            std::ostream* progress = nullptr);

// Line-delimited record I/O for sweep tables. The first record is a header
// carrying the RNG algorithm identifier and base seed; read_table rejects a
// header that does not match the running binary's RNG.
void write_table(const std::string& path, std::uint64_t base_seed,
                 const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_table(const std::string& path,
                                 std::uint64_t* base_seed_out = nullptr);

// Flat columnar text (epsilon and failure-rate columns per distance),
// convenient for plotting the rate curves of one preparation setting.
void write_plot_columns(const std::string& path,
                        const std::vector<SweepRow>& rows);

}  // namespace gkpft
