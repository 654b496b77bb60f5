#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

#include "gkpft/lattice.hpp"
#include "gkpft/symplectic.hpp"

namespace gkpft {

// Reduction of the raw macronode homodyne record to canonical-lattice
// outcomes: per macronode, the central wire's momentum outcome is combined
// with the decoupled satellite outcomes of its four partner macronodes to
// recover the outcome an ideal single-mode cluster would have produced, plus
// an analog confidence for the committed bit.

// Nearest multiple of sqrt(pi): x ~ k sqrt(pi); bit is the parity of k.
// Exact half-way points commit to the even multiple.
struct BinResult {
  long long k = 0;
  int bit = 0;
};
BinResult gkp_bin(double x);

// Posterior weight of the parity-`bit` comb of Gaussians of variance sigma2
// against the full half-spaced comb at analog value x:
//   sum_{m == bit mod 2} exp(-(x - m sqrt(pi))^2 / (2 sigma2)) /
//   sum_{all m}          exp(-(x - m sqrt(pi))^2 / (2 sigma2)).
// sigma2 == 0 degenerates to exact bin membership.
double theta_ratio(double x, int bit, double sigma2);

enum class ByproductClass : std::uint8_t {
  none,    // the partnered mode is the neighbor's own central wire
  gkp,     // satellite pins a sqrt(pi)-multiple: bin it out exactly
  p_type,  // satellite is momentum-squeezed: subtract the analog value
};

struct Byproduct {
  double value = 0.0;
  ByproductClass cls = ByproductClass::none;
};

// Which physical slot becomes the central wire: the lowest-index GKP slot,
// or slot 0 (flagged swapped) when the macronode has no GKP mode left.
struct CentralChoice {
  int central_slot = 0;
  std::array<int, 4> phys_of_wire{};  // local permutation, wire -> slot
  bool swapped = false;
};
CentralChoice select_central(const std::array<ModeType, 4>& types);

// Global wire->physical-mode permutation induced by per-macronode central
// selection; entry 4a+w names the physical mode feeding wire w of node a.
std::vector<int> build_phys_of_wire(const std::vector<ModeType>& types);

// Homodyne pattern of the reduced architecture: wire 1 of each macronode in
// p, satellites in q.
std::vector<Basis> measurement_bases(int num_nodes);

// Central position outcome from one macronode's own four wire outcomes
// (all-q diagnostic pattern).
double reduce_q(double m1, double m2, double m3, double m4);

// Decoupled satellite combination for canonical wire 2, 3 or 4 (1-based);
// wire 1 returns 0 (the central is not a satellite).
double satellite_byproduct(int wire, double m2, double m3, double m4);

struct ReducedNode {
  double value = 0.0;   // canonical momentum after byproduct removal
  int bit = 0;          // committed bin parity of `value`
  double p_err = 0.0;   // union-bound odds the committed bit is wrong
  bool swapped = false; // all four physical modes were momentum-squeezed
};

// Canonical momentum recovery for one macronode. `variance` is the
// per-outcome sampling variance of the homodyne record; the remainder
// combination carries (4 + 2t) of it for t momentum-class byproducts and
// each GKP-class byproduct carries 2 of it.
ReducedNode reduce_p(double m1p, const std::array<Byproduct, 4>& byproducts,
                     double variance);

// Full-lattice reduction. `outcomes` is wire-indexed (4a+w), `types` is
// physical-mode-indexed, `phys_of_wire` is the global permutation from
// build_phys_of_wire.
std::vector<ReducedNode> reduce_lattice(const RhgLattice& lattice,
                                        const std::vector<ModeType>& types,
                                        const std::vector<int>& phys_of_wire,
                                        const Eigen::VectorXd& outcomes,
                                        double variance);

// All-q diagnostic reduction: recovers every macronode's central input
// position from its own wires.
std::vector<double> reduce_lattice_q(const RhgLattice& lattice,
                                     const std::vector<int>& phys_of_wire,
                                     const Eigen::VectorXd& outcomes);

}  // namespace gkpft
