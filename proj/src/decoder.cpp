#include "gkpft/decoder.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <utility>

#include "gkpft/matching.hpp"

namespace gkpft {

namespace {

struct ShortestPaths {
  std::vector<double> dist;
  std::vector<int> parent_cube;
  std::vector<int> parent_face;
};

ShortestPaths dijkstra_from(const RhgLattice& lattice, int source,
                            const std::vector<double>& weights) {
  const auto& links = lattice.cube_links();
  const int num_cubes = static_cast<int>(links.size());
  ShortestPaths sp{
      std::vector<double>(num_cubes, std::numeric_limits<double>::infinity()),
      std::vector<int>(num_cubes, -1), std::vector<int>(num_cubes, -1)};
  sp.dist[source] = 0.0;
  // (distance, cube): ties pop the lowest cube id, keeping runs reproducible.
  std::priority_queue<std::pair<double, int>,
                      std::vector<std::pair<double, int>>,
                      std::greater<std::pair<double, int>>>
      frontier;
  frontier.emplace(0.0, source);
  while (!frontier.empty()) {
    const auto [dist_here, cube] = frontier.top();
    frontier.pop();
    if (dist_here > sp.dist[cube]) continue;  // stale entry
    for (const auto& link : links[cube]) {
      const double candidate = dist_here + weights[link.face];
      if (candidate < sp.dist[link.cube]) {
        sp.dist[link.cube] = candidate;
        sp.parent_cube[link.cube] = cube;
        sp.parent_face[link.cube] = link.face;
        frontier.emplace(candidate, link.cube);
      }
    }
  }
  return sp;
}

std::vector<int> walk_path(const ShortestPaths& sp, int source, int target) {
  std::vector<int> path;
  for (int cube = target; cube != source; cube = sp.parent_cube[cube]) {
    assert(sp.parent_cube[cube] >= 0);
    path.push_back(sp.parent_face[cube]);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

std::vector<double> assign_weights(const RhgLattice& lattice,
                                   const std::vector<ReducedNode>& reduced) {
  if (static_cast<int>(reduced.size()) != lattice.num_nodes()) {
    throw std::invalid_argument("assign_weights: one entry per node required");
  }
  std::vector<double> weights(reduced.size());
  for (int i = 0; i < lattice.num_nodes(); ++i) {
    int swapped_neighbors = 0;
    for (const int nbr : lattice.node(i).neighbor) {
      swapped_neighbors += reduced[nbr].swapped;
    }
    switch (swapped_neighbors) {
      case 4:
        weights[i] = -std::log(2.0 / 5.0);
        break;
      case 3:
        weights[i] = -std::log(1.0 / 3.0);
        break;
      case 2:
        weights[i] = -std::log(1.0 / 4.0);
        break;
      default:
        weights[i] = -std::log(std::clamp(reduced[i].p_err, 1e-15, 1.0));
        break;
    }
  }
  return weights;
}

std::vector<int> extract_syndrome(
    const RhgLattice& lattice, const std::vector<std::uint8_t>& error_bits) {
  if (static_cast<int>(error_bits.size()) != lattice.num_nodes()) {
    throw std::invalid_argument("extract_syndrome: one bit per node required");
  }
  std::vector<int> unsatisfied;
  const auto& cubes = lattice.cubes();
  for (int c = 0; c < static_cast<int>(cubes.size()); ++c) {
    int parity = 0;
    for (const int face : cubes[c].faces) parity ^= error_bits[face] & 1;
    if (parity) unsatisfied.push_back(c);
  }
  return unsatisfied;
}

MatchingGraph build_matching_graph(const RhgLattice& lattice,
                                   const std::vector<int>& syndrome,
                                   const std::vector<double>& weights,
                                   int prune_neighbors) {
  if (static_cast<int>(weights.size()) != lattice.num_nodes()) {
    throw std::invalid_argument(
        "build_matching_graph: one weight per node required");
  }
  if (syndrome.size() % 2 != 0) {
    throw std::logic_error(
        "build_matching_graph: odd syndrome size; error chains must have two "
        "endpoints under periodic boundaries");
  }
  const int s = static_cast<int>(syndrome.size());
  MatchingGraph graph;
  graph.syndrome = syndrome;
  for (int i = 0; i < s; ++i) {
    const ShortestPaths sp = dijkstra_from(lattice, syndrome[i], weights);
    for (int j = i + 1; j < s; ++j) {
      assert(std::isfinite(sp.dist[syndrome[j]]));
      graph.arcs.push_back({i, j, sp.dist[syndrome[j]],
                            walk_path(sp, syndrome[i], syndrome[j])});
    }
  }
  if (prune_neighbors > 0 && prune_neighbors < s - 1) {
    // Keep an arc when either endpoint ranks the other among its k nearest.
    std::vector<std::vector<std::pair<double, int>>> ranked(s);
    for (const auto& arc : graph.arcs) {
      ranked[arc.u].emplace_back(arc.weight, arc.v);
      ranked[arc.v].emplace_back(arc.weight, arc.u);
    }
    std::vector<std::vector<bool>> near(s, std::vector<bool>(s, false));
    for (int i = 0; i < s; ++i) {
      std::sort(ranked[i].begin(), ranked[i].end());
      for (int k = 0; k < prune_neighbors; ++k) {
        near[i][ranked[i][k].second] = true;
      }
    }
    std::vector<MatchingArc> kept;
    for (auto& arc : graph.arcs) {
      if (near[arc.u][arc.v] || near[arc.v][arc.u]) {
        kept.push_back(std::move(arc));
      }
    }
    graph.arcs = std::move(kept);
  }
  return graph;
}

std::vector<int> match_syndrome(const MatchingGraph& graph, bool certify) {
  const int s = static_cast<int>(graph.syndrome.size());
  std::vector<WeightedEdge> edges;
  edges.reserve(graph.arcs.size());
  for (const auto& arc : graph.arcs) {
    edges.push_back({arc.u, arc.v, arc.weight});
  }
  return min_weight_perfect_matching(s, edges, certify);
}

void apply_recovery(const MatchingGraph& graph, const std::vector<int>& mate,
                    std::vector<std::uint8_t>& bits) {
  if (mate.size() != graph.syndrome.size()) {
    throw std::invalid_argument("apply_recovery: mate/syndrome size mismatch");
  }
  for (const auto& arc : graph.arcs) {
    if (mate[arc.u] != arc.v) continue;
    for (const int face : arc.path) bits[face] ^= 1;
  }
}

bool check_failure(const RhgLattice& lattice,
                   const std::vector<std::uint8_t>& corrected_bits) {
  if (static_cast<int>(corrected_bits.size()) != lattice.num_nodes()) {
    throw std::invalid_argument("check_failure: one bit per node required");
  }
  for (const auto& surface : lattice.surfaces()) {
    int parity = 0;
    for (const int face : surface.faces) parity ^= corrected_bits[face] & 1;
    if (parity) return true;
  }
  return false;
}

DecodeReport decode_errors(const RhgLattice& lattice,
                           const std::vector<std::uint8_t>& error_bits,
                           const std::vector<double>& weights, bool certify) {
  DecodeReport report;
  const auto syndrome = extract_syndrome(lattice, error_bits);
  report.syndrome_size = static_cast<int>(syndrome.size());
  std::vector<std::uint8_t> corrected = error_bits;
  if (!syndrome.empty()) {
    const auto graph = build_matching_graph(lattice, syndrome, weights);
    const auto mate = match_syndrome(graph, certify);
    for (const auto& arc : graph.arcs) {
      if (mate[arc.u] == arc.v && arc.u < arc.v) {
        report.matched_weight += arc.weight;
      }
    }
    apply_recovery(graph, mate, corrected);
    assert(extract_syndrome(lattice, corrected).empty());
  }
  report.failed = check_failure(lattice, corrected);
  return report;
}

}  // namespace gkpft
