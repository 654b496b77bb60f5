#pragma once

#include <cstdint>
#include <vector>

#include "gkpft/lattice.hpp"
#include "gkpft/reduction.hpp"

namespace gkpft {

// Matching weight per macronode. Nodes with two or more momentum-type
// (swapped-out) neighbors take fixed heuristic penalties:
//   4 neighbors -> -log(2/5), 3 -> -log(1/3), 2 -> -log(1/4);
// with at most one such neighbor the analog confidence drives the weight,
// -log(p_err).
std::vector<double> assign_weights(const RhgLattice& lattice,
                                   const std::vector<ReducedNode>& reduced);

// Ids of cubes whose six face bits have odd parity. `error_bits` is indexed
// by node id (one entry per macronode); only face entries participate.
std::vector<int> extract_syndrome(const RhgLattice& lattice,
                                  const std::vector<std::uint8_t>& error_bits);

struct MatchingArc {
  int u = 0;              // indices into MatchingGraph::syndrome, u < v
  int v = 0;
  double weight = 0.0;    // shortest-path weight between the two cubes
  std::vector<int> path;  // face nodes realizing that path, in walk order
};

struct MatchingGraph {
  std::vector<int> syndrome;      // unsatisfied cube ids, ascending
  std::vector<MatchingArc> arcs;  // lexicographic by (u, v)
};

// All-pairs shortest paths between unsatisfied cubes over the cube-adjacency
// graph, where crossing a shared face costs that face's weight. With
// prune_neighbors > 0 only arcs between mutual-or-better k-nearest pairs are
// kept (an accuracy/speed trade for very large lattices); the default keeps
// the complete graph. Throws std::logic_error on odd syndrome size.
MatchingGraph build_matching_graph(const RhgLattice& lattice,
                                   const std::vector<int>& syndrome,
                                   const std::vector<double>& weights,
                                   int prune_neighbors = 0);

// Minimum-weight pairing of the syndrome; mate[] is over syndrome indices.
// certify additionally validates the matcher's optimality certificate.
std::vector<int> match_syndrome(const MatchingGraph& graph,
                                bool certify = false);

// XOR the stored path qubits of every matched pair into `bits`.
void apply_recovery(const MatchingGraph& graph, const std::vector<int>& mate,
                    std::vector<std::uint8_t>& bits);

// Logical verdict on a fully corrected lattice: true when any of the three
// correlation surfaces has odd parity. Callers must hand in bits with an
// empty syndrome; surface parity alone cannot see open chains.
bool check_failure(const RhgLattice& lattice,
                   const std::vector<std::uint8_t>& corrected_bits);

struct DecodeReport {
  int syndrome_size = 0;
  double matched_weight = 0.0;
  bool failed = false;
};

// Full pass: syndrome extraction, matching-graph construction, minimum-weight
// matching, recovery, and the surface check of error XOR recovery.
DecodeReport decode_errors(const RhgLattice& lattice,
                           const std::vector<std::uint8_t>& error_bits,
                           const std::vector<double>& weights,
                           bool certify = false);

}  // namespace gkpft
