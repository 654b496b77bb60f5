#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <vector>

#include "gkpft/lattice.hpp"
#include "gkpft/rng.hpp"

namespace gkpft {

// Means-level Gaussian evolution of the 4N optical modes. A state is the
// length-8N vector of quadrature means ordered (q_0 .. q_{4N-1},
// p_0 .. p_{4N-1}); Heisenberg-picture linear optics acts on it by
// symplectic matrices. Commutator convention [q, p] = i, vacuum variance
// 1/2 per quadrature.

enum class ModeType : std::uint8_t { gkp_plus, p_squeezed };
enum class Basis : std::uint8_t { q, p };

enum class PrepMode : std::uint8_t { iid_swap, fixed_one_gkp };

struct StatePrepConfig {
  PrepMode mode = PrepMode::iid_swap;
  double p_swap = 0.0;  // per-mode replacement probability under iid_swap
};

// Effective single-quadrature noise budget: finite squeezing plus a
// pre-amplified loss channel of transmissivity eta, which adds
// (1 - eta) / (2 eta) of variance per quadrature on top.
struct NoiseModel {
  double sigma2 = 0.0;
  double eta = 1.0;
  double epsilon() const { return sigma2 + (1.0 - eta) / (2.0 * eta); }
};

// squeezing_db is the quadrature noise reduction in dB: sigma2 relative to
// the vacuum comes out as 10^(-db/10), i.e. sigma2 = 10^(-db/10) in units
// where the relevant comparison scale is 1.
NoiseModel noise_from_db(double squeezing_db, double eta);

class SymplecticOp {
 public:
  explicit SymplecticOp(int n_modes);  // identity

  int n_modes() const { return n_; }
  const Eigen::SparseMatrix<double>& matrix() const { return mat_; }

  // Balanced beamsplitter with arrow j -> k:
  //   q_j -> (q_j - q_k)/sqrt2,  q_k -> (q_j + q_k)/sqrt2, same on p.
  static SymplecticOp beamsplitter(int n, int j, int k);
  // C_Z(w): p_j += w q_k, p_k += w q_j.
  static SymplecticOp controlled_z(int n, int j, int k, double weight = 1.0);
  // C_X with control j, target k: q_k += q_j, p_j -= p_k.
  static SymplecticOp controlled_x(int n, int j, int k);
  // Phase-space rotation: q -> q cos t - p sin t, p -> q sin t + p cos t.
  static SymplecticOp rotation(int n, int j, double theta);
  // Squeezer S(xi): q -> q/xi, p -> xi p.
  static SymplecticOp squeeze(int n, int j, double xi);
  // Quadratic momentum coupling e^{i c p_j p_k}: q_j -= c p_k, q_k -= c p_j.
  static SymplecticOp momentum_coupling(int n, int j, int k, double c);
  // Relabeling: wire w reads its input from mode source_of[w].
  static SymplecticOp mode_permutation(const std::vector<int>& source_of);
  static SymplecticOp from_matrix(int n_modes, Eigen::SparseMatrix<double> mat);

  SymplecticOp inverse() const;
  // Composition in temporal order: (this, then later).
  SymplecticOp then(const SymplecticOp& later) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& means) const;

  // max_ij |S^T Omega S - Omega|; zero for exact symplectic matrices.
  double symplectic_defect() const;

 private:
  int n_ = 0;
  Eigen::SparseMatrix<double> mat_;
};

// The fixed entangling layer: one weight-1 C_Z per wired slot pair of the
// lattice, acting on physical modes indexed 4*node + slot.
SymplecticOp cz_network(const RhgLattice& lattice);

// The fixed local four-splitter layer in wire space: per macronode, splitters
// with arrows 2->1, 4->3, 3->1, 4->2 in temporal order (wires numbered 1..4
// here; stored 0-based).
SymplecticOp bs_network(int num_nodes);

// Fast path equivalent to mode_permutation(phys_of_wire) followed by
// bs_network: gathers each macronode's wires from the physical modes and
// applies the 4x4 splitter block in place. Validated against the matrix
// route in the tests.
Eigen::VectorXd propagate_macronode_wires(const Eigen::VectorXd& phys_means,
                                          const std::vector<int>& phys_of_wire);

struct InputSample {
  std::vector<ModeType> type;  // one per physical mode
  Eigen::VectorXd means;       // ideal (noiseless) quadrature means
};

// Draw the per-mode resource states: GKP qunaught means have q in
// {0, sqrt(pi)} with equal odds, momentum-squeezed modes have q uniform on
// [0, 2 sqrt(pi)); every p mean is 0.
InputSample sample_inputs(int n_modes, const StatePrepConfig& prep,
                          TrialRng& rng);

// Homodyne record: outcome_i = selected quadrature mean + N(0, variance).
// `variance` is the per-outcome sampling variance.
Eigen::VectorXd measure_with_noise(const Eigen::VectorXd& means,
                                   const std::vector<Basis>& bases,
                                   double variance, TrialRng& rng);

// Exact-identity self-checks for the elementary-gate conventions. Each field
// is a max-abs deviation; all are zero up to rounding for a correct build.
struct IdentityReport {
  // Beamsplitter as C_X-conjugated two-mode squeezing.
  double bs_cx_decomposition = 0.0;
  // Rotated-splitter network vs C_Z with residual squeezers and a momentum
  // coupling, as an exact matrix identity.
  double rotated_bs_cz = 0.0;
  // The momentum-coupling residual acts trivially on zero-momentum means.
  double momentum_coupling_on_inputs = 0.0;
  // Symplectic-form defect over all elementary generators and the networks.
  double form_defect = 0.0;

  double max_deviation() const;
};

IdentityReport verify_identities();

}  // namespace gkpft
