#include "gkpft/reduction.hpp"

#include <cassert>
#include <cfenv>
#include <cmath>
#include <stdexcept>

namespace gkpft {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;
constexpr double kPErrFloor = 1e-15;

double logaddexp(double a, double b) {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

}  // namespace

BinResult gkp_bin(double x) {
  // nearbyint under the default FP environment rounds half-way cases to the
  // even integer, which is exactly the committed tie rule.
  const double k = std::nearbyint(x / kSqrtPi);
  BinResult r;
  r.k = static_cast<long long>(k);
  r.bit = static_cast<int>(std::llabs(r.k) & 1);
  return r;
}

double theta_ratio(double x, int bit, double sigma2) {
  if (bit != 0 && bit != 1) throw std::invalid_argument("bit must be 0 or 1");
  if (sigma2 < 0.0) throw std::invalid_argument("variance must be >= 0");
  if (sigma2 == 0.0) return gkp_bin(x).bit == bit ? 1.0 : 0.0;

  // Gaussian comb evaluated over a window of multiples around x; terms
  // further than ~9.5 sigma contribute below double precision.
  const long long m0 = std::llround(x / kSqrtPi);
  const long long half_width =
      std::max<long long>(4, static_cast<long long>(std::ceil(
                                 9.5 * std::sqrt(sigma2) / kSqrtPi)) +
                                 1);
  double lse[2] = {-INFINITY, -INFINITY};
  for (long long m = m0 - half_width; m <= m0 + half_width; ++m) {
    const double d = x - static_cast<double>(m) * kSqrtPi;
    const double logterm = -d * d / (2.0 * sigma2);
    const int parity = static_cast<int>(std::llabs(m) & 1);
    lse[parity] = logaddexp(lse[parity], logterm);
  }
  return std::exp(lse[bit] - logaddexp(lse[0], lse[1]));
}

CentralChoice select_central(const std::array<ModeType, 4>& types) {
  CentralChoice c;
  c.central_slot = -1;
  for (int j = 0; j < 4; ++j) {
    if (types[j] == ModeType::gkp_plus) {
      c.central_slot = j;
      break;
    }
  }
  c.swapped = c.central_slot < 0;
  if (c.swapped) c.central_slot = 0;
  int w = 0;
  c.phys_of_wire[w++] = c.central_slot;
  for (int j = 0; j < 4; ++j) {
    if (j != c.central_slot) c.phys_of_wire[w++] = j;
  }
  return c;
}

std::vector<int> build_phys_of_wire(const std::vector<ModeType>& types) {
  if (types.empty() || types.size() % 4 != 0) {
    throw std::invalid_argument("type list must cover whole macronodes");
  }
  const int num_nodes = static_cast<int>(types.size()) / 4;
  std::vector<int> phys_of_wire(types.size());
  for (int a = 0; a < num_nodes; ++a) {
    const std::array<ModeType, 4> local = {types[4 * a + 0], types[4 * a + 1],
                                           types[4 * a + 2], types[4 * a + 3]};
    const CentralChoice c = select_central(local);
    for (int w = 0; w < 4; ++w) {
      phys_of_wire[4 * a + w] = 4 * a + c.phys_of_wire[w];
    }
  }
  return phys_of_wire;
}

std::vector<Basis> measurement_bases(int num_nodes) {
  if (num_nodes <= 0) throw std::invalid_argument("need at least one node");
  std::vector<Basis> bases(4 * num_nodes, Basis::q);
  for (int a = 0; a < num_nodes; ++a) bases[4 * a] = Basis::p;
  return bases;
}

double reduce_q(double m1, double m2, double m3, double m4) {
  return 0.5 * (m1 - (m2 + m3 - m4));
}

double satellite_byproduct(int wire, double m2, double m3, double m4) {
  switch (wire) {
    case 1: return 0.0;
    case 2: return m2 - m4;
    case 3: return m3 - m4;
    case 4: return m2 + m3;
    default:
      throw std::invalid_argument("wire must lie in 1..4");
  }
}

ReducedNode reduce_p(double m1p, const std::array<Byproduct, 4>& byproducts,
                     double variance) {
  if (variance < 0.0) throw std::invalid_argument("variance must be >= 0");
  double remainder = 2.0 * m1p;
  int t = 0;
  for (const auto& bp : byproducts) {
    if (bp.cls == ByproductClass::p_type) {
      remainder -= bp.value;
      ++t;
    }
  }

  ReducedNode out;
  out.value = remainder;
  double p_err = theta_ratio(remainder, 1 - gkp_bin(remainder).bit,
                             (4.0 + 2.0 * t) * variance);
  for (const auto& bp : byproducts) {
    if (bp.cls == ByproductClass::gkp) {
      const BinResult b = gkp_bin(bp.value);
      out.value -= static_cast<double>(b.k) * kSqrtPi;
      p_err += theta_ratio(bp.value, 1 - b.bit, 2.0 * variance);
    }
  }
  out.bit = gkp_bin(out.value).bit;
  out.p_err = std::min(1.0, std::max(kPErrFloor, p_err));
  return out;
}

std::vector<ReducedNode> reduce_lattice(const RhgLattice& lattice,
                                        const std::vector<ModeType>& types,
                                        const std::vector<int>& phys_of_wire,
                                        const Eigen::VectorXd& outcomes,
                                        double variance) {
  const int n = lattice.num_modes();
  if (static_cast<int>(types.size()) != n ||
      static_cast<int>(phys_of_wire.size()) != n || outcomes.size() != n) {
    throw std::invalid_argument("lattice, types, wiring and outcomes disagree");
  }

  // Invert the wire permutation so partner physical modes can be traced to
  // the wire (and hence the satellite combination) that reads them out.
  std::vector<int> wire_of_phys(n, -1);
  for (int w = 0; w < n; ++w) {
    const int s = phys_of_wire[w];
    if (s < 0 || s >= n || s / 4 != w / 4 || wire_of_phys[s] != -1) {
      throw std::invalid_argument("phys_of_wire is not a macronode-local "
                                  "permutation");
    }
    wire_of_phys[s] = w;
  }

  std::vector<ReducedNode> reduced(lattice.num_nodes());
  for (int a = 0; a < lattice.num_nodes(); ++a) {
    const auto& node = lattice.node(a);
    std::array<Byproduct, 4> bps;
    bool swapped = true;
    for (int w = 0; w < 4; ++w) {
      swapped = swapped && types[4 * a + w] == ModeType::p_squeezed;
      // Physical slot feeding wire w, and the partnered mode across the
      // entangling layer.
      const int slot = phys_of_wire[4 * a + w] - 4 * a;
      const int b = node.neighbor[slot];
      const int pslot = node.partner_slot[slot];
      const int pwire = wire_of_phys[4 * b + pslot] - 4 * b;
      if (pwire == 0) {
        bps[w] = {0.0, ByproductClass::none};
        continue;
      }
      bps[w].value =
          satellite_byproduct(pwire + 1, outcomes[4 * b + 1],
                              outcomes[4 * b + 2], outcomes[4 * b + 3]);
      bps[w].cls = types[4 * b + pslot] == ModeType::gkp_plus
                       ? ByproductClass::gkp
                       : ByproductClass::p_type;
    }
    reduced[a] = reduce_p(outcomes[4 * a], bps, variance);
    reduced[a].swapped = swapped;
  }
  return reduced;
}

std::vector<double> reduce_lattice_q(const RhgLattice& lattice,
                                     const std::vector<int>& phys_of_wire,
                                     const Eigen::VectorXd& outcomes) {
  const int n = lattice.num_modes();
  if (static_cast<int>(phys_of_wire.size()) != n || outcomes.size() != n) {
    throw std::invalid_argument("lattice, wiring and outcomes disagree");
  }
  std::vector<double> central(lattice.num_nodes());
  for (int a = 0; a < lattice.num_nodes(); ++a) {
    central[a] = reduce_q(outcomes[4 * a], outcomes[4 * a + 1],
                          outcomes[4 * a + 2], outcomes[4 * a + 3]);
  }
  return central;
}

}  // namespace gkpft
