#include "gkpft/symplectic.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace gkpft {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;

using Triplets = std::vector<Eigen::Triplet<double>>;

void check_mode(int n, int j, const char* what) {
  if (j < 0 || j >= n) {
    throw std::invalid_argument(std::string(what) + " mode index " +
                                std::to_string(j) + " out of range for " +
                                std::to_string(n) + " modes");
  }
}

void check_pair(int n, int j, int k) {
  check_mode(n, j, "first");
  check_mode(n, k, "second");
  if (j == k) {
    throw std::invalid_argument("two-mode gate needs distinct modes");
  }
}

// Sparse matrix that is the identity except for the given replaced rows.
Eigen::SparseMatrix<double> rows_matrix(
    int dim, const std::vector<std::pair<int, Triplets>>& rows) {
  std::vector<bool> replaced(dim, false);
  Triplets trip;
  for (const auto& r : rows) {
    replaced[r.first] = true;
    for (const auto& t : r.second) trip.push_back(t);
  }
  for (int i = 0; i < dim; ++i) {
    if (!replaced[i]) trip.emplace_back(i, i, 1.0);
  }
  Eigen::SparseMatrix<double> m(dim, dim);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

Eigen::SparseMatrix<double> symplectic_form(int n) {
  Triplets trip;
  for (int i = 0; i < n; ++i) {
    trip.emplace_back(i, n + i, 1.0);
    trip.emplace_back(n + i, i, -1.0);
  }
  Eigen::SparseMatrix<double> omega(2 * n, 2 * n);
  omega.setFromTriplets(trip.begin(), trip.end());
  return omega;
}

double max_abs(const Eigen::SparseMatrix<double>& m) {
  double best = 0.0;
  for (int o = 0; o < m.outerSize(); ++o) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, o); it; ++it) {
      best = std::max(best, std::abs(it.value()));
    }
  }
  return best;
}

}  // namespace

NoiseModel noise_from_db(double squeezing_db, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw std::invalid_argument("transmissivity must lie in (0, 1]");
  }
  NoiseModel nm;
  nm.sigma2 = std::pow(10.0, -squeezing_db / 10.0);
  nm.eta = eta;
  return nm;
}

SymplecticOp::SymplecticOp(int n_modes) : n_(n_modes) {
  if (n_ <= 0) throw std::invalid_argument("need a positive mode count");
  mat_.resize(2 * n_, 2 * n_);
  mat_.setIdentity();
}

SymplecticOp SymplecticOp::beamsplitter(int n, int j, int k) {
  check_pair(n, j, k);
  const double s = 1.0 / std::sqrt(2.0);
  SymplecticOp op(n);
  op.mat_ = rows_matrix(
      2 * n, {{j, {{j, j, s}, {j, k, -s}}},
              {k, {{k, j, s}, {k, k, s}}},
              {n + j, {{n + j, n + j, s}, {n + j, n + k, -s}}},
              {n + k, {{n + k, n + j, s}, {n + k, n + k, s}}}});
  return op;
}

SymplecticOp SymplecticOp::controlled_z(int n, int j, int k, double weight) {
  check_pair(n, j, k);
  SymplecticOp op(n);
  op.mat_ = rows_matrix(2 * n,
                        {{n + j, {{n + j, n + j, 1.0}, {n + j, k, weight}}},
                         {n + k, {{n + k, n + k, 1.0}, {n + k, j, weight}}}});
  return op;
}

SymplecticOp SymplecticOp::controlled_x(int n, int j, int k) {
  check_pair(n, j, k);
  SymplecticOp op(n);
  op.mat_ = rows_matrix(2 * n,
                        {{k, {{k, k, 1.0}, {k, j, 1.0}}},
                         {n + j, {{n + j, n + j, 1.0}, {n + j, n + k, -1.0}}}});
  return op;
}

SymplecticOp SymplecticOp::rotation(int n, int j, double theta) {
  check_mode(n, j, "rotation");
  const double c = std::cos(theta), s = std::sin(theta);
  SymplecticOp op(n);
  op.mat_ = rows_matrix(2 * n, {{j, {{j, j, c}, {j, n + j, -s}}},
                                {n + j, {{n + j, j, s}, {n + j, n + j, c}}}});
  return op;
}

SymplecticOp SymplecticOp::squeeze(int n, int j, double xi) {
  check_mode(n, j, "squeeze");
  if (!(xi > 0.0)) throw std::invalid_argument("squeeze parameter must be > 0");
  SymplecticOp op(n);
  op.mat_ = rows_matrix(
      2 * n, {{j, {{j, j, 1.0 / xi}}}, {n + j, {{n + j, n + j, xi}}}});
  return op;
}

SymplecticOp SymplecticOp::momentum_coupling(int n, int j, int k, double c) {
  check_pair(n, j, k);
  SymplecticOp op(n);
  op.mat_ = rows_matrix(2 * n, {{j, {{j, j, 1.0}, {j, n + k, -c}}},
                                {k, {{k, k, 1.0}, {k, n + j, -c}}}});
  return op;
}

SymplecticOp SymplecticOp::mode_permutation(const std::vector<int>& source_of) {
  const int n = static_cast<int>(source_of.size());
  if (n == 0) throw std::invalid_argument("empty permutation");
  std::vector<bool> used(n, false);
  Triplets trip;
  for (int w = 0; w < n; ++w) {
    const int s = source_of[w];
    check_mode(n, s, "permutation source");
    if (used[s]) throw std::invalid_argument("permutation repeats a source");
    used[s] = true;
    trip.emplace_back(w, s, 1.0);
    trip.emplace_back(n + w, n + s, 1.0);
  }
  SymplecticOp op(n);
  op.mat_.setZero();
  op.mat_.setFromTriplets(trip.begin(), trip.end());
  return op;
}

SymplecticOp SymplecticOp::from_matrix(int n_modes,
                                        Eigen::SparseMatrix<double> mat) {
  SymplecticOp op(n_modes);
  if (mat.rows() != 2 * n_modes || mat.cols() != 2 * n_modes) {
    throw std::invalid_argument("matrix dimensions do not match mode count");
  }
  op.mat_ = std::move(mat);
  return op;
}

SymplecticOp SymplecticOp::inverse() const {
  // S^{-1} = -Omega S^T Omega, exact for symplectic S.
  const auto omega = symplectic_form(n_);
  SymplecticOp op(n_);
  op.mat_ = -(omega * (Eigen::SparseMatrix<double>(mat_.transpose()) * omega));
  return op;
}

SymplecticOp SymplecticOp::then(const SymplecticOp& later) const {
  if (later.n_ != n_) {
    throw std::invalid_argument("composed operators act on different modes");
  }
  SymplecticOp op(n_);
  op.mat_ = later.mat_ * mat_;
  return op;
}

Eigen::VectorXd SymplecticOp::apply(const Eigen::VectorXd& means) const {
  if (means.size() != 2 * n_) {
    throw std::invalid_argument("means vector has wrong length");
  }
  return mat_ * means;
}

double SymplecticOp::symplectic_defect() const {
  const auto omega = symplectic_form(n_);
  Eigen::SparseMatrix<double> defect =
      Eigen::SparseMatrix<double>(mat_.transpose()) * omega * mat_ - omega;
  defect.prune(0.0);
  return max_abs(defect);
}

SymplecticOp cz_network(const RhgLattice& lattice) {
  const int n = lattice.num_modes();
  Triplets trip;
  for (int i = 0; i < 2 * n; ++i) trip.emplace_back(i, i, 1.0);
  for (int a = 0; a < lattice.num_nodes(); ++a) {
    const auto& node = lattice.node(a);
    for (int j = 0; j < 4; ++j) {
      const int b = node.neighbor[j];
      const int k = node.partner_slot[j];
      const int ma = 4 * a + j;
      const int mb = 4 * b + k;
      if (ma < mb) {
        trip.emplace_back(n + ma, mb, 1.0);
        trip.emplace_back(n + mb, ma, 1.0);
      }
    }
  }
  Eigen::SparseMatrix<double> m(2 * n, 2 * n);
  m.setFromTriplets(trip.begin(), trip.end());
  return SymplecticOp::from_matrix(n, std::move(m));
}

namespace {

// Net action of the four-splitter sequence 2->1, 4->3, 3->1, 4->2 on one
// macronode's wires; rows are the outgoing wires.
constexpr double kSplitterBlock[4][4] = {
    {0.5, 0.5, 0.5, 0.5},
    {-0.5, 0.5, -0.5, 0.5},
    {-0.5, -0.5, 0.5, 0.5},
    {0.5, -0.5, -0.5, 0.5},
};

}  // namespace

SymplecticOp bs_network(int num_nodes) {
  if (num_nodes <= 0) throw std::invalid_argument("need at least one node");
  const int n = 4 * num_nodes;
  Triplets trip;
  for (int a = 0; a < num_nodes; ++a) {
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        trip.emplace_back(4 * a + r, 4 * a + c, kSplitterBlock[r][c]);
        trip.emplace_back(n + 4 * a + r, n + 4 * a + c, kSplitterBlock[r][c]);
      }
    }
  }
  Eigen::SparseMatrix<double> m(2 * n, 2 * n);
  m.setFromTriplets(trip.begin(), trip.end());
  return SymplecticOp::from_matrix(n, std::move(m));
}

Eigen::VectorXd propagate_macronode_wires(
    const Eigen::VectorXd& phys_means, const std::vector<int>& phys_of_wire) {
  const int n = static_cast<int>(phys_of_wire.size());
  if (phys_means.size() != 2 * n || n % 4 != 0) {
    throw std::invalid_argument("wire map and means sizes are inconsistent");
  }
  Eigen::VectorXd out(2 * n);
  for (int a = 0; a < n / 4; ++a) {
    double q[4], p[4];
    for (int w = 0; w < 4; ++w) {
      const int s = phys_of_wire[4 * a + w];
      q[w] = phys_means[s];
      p[w] = phys_means[n + s];
    }
    for (int r = 0; r < 4; ++r) {
      double accq = 0.0, accp = 0.0;
      for (int c = 0; c < 4; ++c) {
        accq += kSplitterBlock[r][c] * q[c];
        accp += kSplitterBlock[r][c] * p[c];
      }
      out[4 * a + r] = accq;
      out[n + 4 * a + r] = accp;
    }
  }
  return out;
}

InputSample sample_inputs(int n_modes, const StatePrepConfig& prep,
                          TrialRng& rng) {
  if (n_modes <= 0 || n_modes % 4 != 0) {
    throw std::invalid_argument("mode count must be a positive multiple of 4");
  }
  if (prep.mode == PrepMode::iid_swap &&
      !(prep.p_swap >= 0.0 && prep.p_swap <= 1.0)) {
    throw std::invalid_argument("swap-out probability must lie in [0, 1]");
  }
  InputSample s;
  s.type.assign(n_modes, ModeType::gkp_plus);
  s.means = Eigen::VectorXd::Zero(2 * n_modes);
  if (prep.mode == PrepMode::iid_swap) {
    for (int i = 0; i < n_modes; ++i) {
      if (rng.bernoulli(prep.p_swap)) s.type[i] = ModeType::p_squeezed;
    }
  } else {
    for (int a = 0; a < n_modes / 4; ++a) {
      const int keep = rng.uniform_int(4);
      for (int j = 0; j < 4; ++j) {
        if (j != keep) s.type[4 * a + j] = ModeType::p_squeezed;
      }
    }
  }
  for (int i = 0; i < n_modes; ++i) {
    if (s.type[i] == ModeType::gkp_plus) {
      s.means[i] = rng.bernoulli(0.5) ? kSqrtPi : 0.0;
    } else {
      s.means[i] = rng.uniform() * 2.0 * kSqrtPi;
    }
  }
  return s;
}

Eigen::VectorXd measure_with_noise(const Eigen::VectorXd& means,
                                   const std::vector<Basis>& bases,
                                   double variance, TrialRng& rng) {
  const int n = static_cast<int>(bases.size());
  if (means.size() != 2 * n) {
    throw std::invalid_argument("means/bases sizes are inconsistent");
  }
  if (variance < 0.0) throw std::invalid_argument("variance must be >= 0");
  const double sigma = std::sqrt(variance);
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) {
    const double mean = bases[i] == Basis::q ? means[i] : means[n + i];
    out[i] = mean + rng.normal(sigma);
  }
  return out;
}

double IdentityReport::max_deviation() const {
  return std::max(std::max(bs_cx_decomposition, rotated_bs_cz),
                  std::max(momentum_coupling_on_inputs, form_defect));
}

IdentityReport verify_identities() {
  using Op = SymplecticOp;
  const int n = 2;
  const double r2 = std::sqrt(2.0);
  auto dense = [](const Op& op) { return Eigen::MatrixXd(op.matrix()); };
  auto dev = [&](const Op& a, const Op& b) {
    return (dense(a) - dense(b)).cwiseAbs().maxCoeff();
  };

  IdentityReport rep;

  // A balanced splitter is a two-mode squeezing operation conjugated by
  // sum gates: temporally, C_X(j,k), then S_j(1/sqrt2) and S_k(sqrt2),
  // then the inverse of C_X(k,j).
  {
    const Op lhs = Op::beamsplitter(n, 0, 1);
    const Op rhs = Op::controlled_x(n, 0, 1)
                       .then(Op::squeeze(n, 0, 1.0 / r2))
                       .then(Op::squeeze(n, 1, r2))
                       .then(Op::controlled_x(n, 1, 0).inverse());
    rep.bs_cx_decomposition = dev(lhs, rhs);
  }

  // Conjugating one arm of a splitter by quarter rotations yields a unit
  // C_Z up to residual squeezing by 2 and a momentum coupling that is inert
  // on the zero-momentum input class.
  {
    const Op lhs = Op::squeeze(n, 0, r2)
                       .then(Op::squeeze(n, 1, r2))
                       .then(Op::rotation(n, 0, -M_PI / 2))
                       .then(Op::beamsplitter(n, 1, 0))
                       .then(Op::rotation(n, 0, M_PI / 2));
    const Op rhs = Op::momentum_coupling(n, 0, 1, 2.0)
                       .then(Op::squeeze(n, 0, 2.0))
                       .then(Op::squeeze(n, 1, 2.0))
                       .then(Op::controlled_z(n, 0, 1, 1.0));
    rep.rotated_bs_cz = dev(lhs, rhs);
  }

  // The residual coupling shifts positions by momenta only, so zero-momentum
  // means pass through unchanged.
  {
    const Op pp = Op::momentum_coupling(n, 0, 1, 2.0);
    Eigen::VectorXd v(4);
    double worst = 0.0;
    for (int trial = 0; trial < 32; ++trial) {
      v << 0.31 * trial, -1.7 * trial + 0.4, 0.0, 0.0;
      worst = std::max(worst, (pp.apply(v) - v).cwiseAbs().maxCoeff());
    }
    rep.momentum_coupling_on_inputs = worst;
  }

  {
    double worst = 0.0;
    auto track = [&](const Op& op) {
      worst = std::max(worst, op.symplectic_defect());
    };
    track(Op::beamsplitter(n, 0, 1));
    track(Op::controlled_z(n, 0, 1, 1.0));
    track(Op::controlled_x(n, 0, 1));
    track(Op::rotation(n, 0, 0.7));
    track(Op::squeeze(n, 0, 1.3));
    track(Op::momentum_coupling(n, 0, 1, 2.0));
    track(Op::mode_permutation({2, 0, 1, 3}));
    const RhgLattice lat({2});
    track(cz_network(lat));
    track(bs_network(lat.num_nodes()));
    rep.form_defect = worst;
  }

  return rep;
}

}  // namespace gkpft
