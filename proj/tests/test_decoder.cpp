#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "gkpft/decoder.hpp"
#include "gkpft/lattice.hpp"
#include "gkpft/reduction.hpp"
#include "gkpft/rng.hpp"
#include "gkpft/symplectic.hpp"

using namespace gkpft;

namespace {

std::vector<std::uint8_t> zero_bits(const RhgLattice& lat) {
  return std::vector<std::uint8_t>(lat.num_nodes(), 0);
}

// Independent all-pairs oracle: Floyd-Warshall over the cube graph, taking
// the lighter face when two cubes share more than one (distance 2 wraps).
std::vector<std::vector<double>> floyd_warshall(
    const RhgLattice& lat, const std::vector<double>& weights) {
  const int nc = static_cast<int>(lat.cubes().size());
  std::vector<std::vector<double>> dist(nc, std::vector<double>(nc, 1e300));
  for (int c = 0; c < nc; ++c) dist[c][c] = 0.0;
  for (int c = 0; c < nc; ++c) {
    for (const auto& link : lat.cube_links()[c]) {
      dist[c][link.cube] = std::min(dist[c][link.cube], weights[link.face]);
    }
  }
  for (int k = 0; k < nc; ++k) {
    for (int i = 0; i < nc; ++i) {
      for (int j = 0; j < nc; ++j) {
        dist[i][j] = std::min(dist[i][j], dist[i][k] + dist[k][j]);
      }
    }
  }
  return dist;
}

// Periodic taxicab distance between cube centers (doubled coordinates).
int taxicab_cubes(const RhgLattice& lat, int cu, int cv) {
  const NodeCoord a = lat.cubes()[cu].center;
  const NodeCoord b = lat.cubes()[cv].center;
  const int d = lat.distance();
  int total = 0;
  for (const auto [pa, pb] :
       {std::pair<int, int>{a.x, b.x}, {a.y, b.y}, {a.z, b.z}}) {
    const int step = std::abs(pa - pb) / 2;
    total += std::min(step, d - step);
  }
  return total;
}

double brute_min_perfect(const std::vector<std::vector<double>>& w,
                         std::vector<bool>& used) {
  const int n = static_cast<int>(w.size());
  int i = 0;
  while (i < n && used[i]) ++i;
  if (i == n) return 0.0;
  used[i] = true;
  double best = 1e300;
  for (int j = i + 1; j < n; ++j) {
    if (used[j]) continue;
    used[j] = true;
    best = std::min(best, w[i][j] + brute_min_perfect(w, used));
    used[j] = false;
  }
  used[i] = false;
  return best;
}

struct TrialData {
  std::vector<std::uint8_t> error_bits;
  std::vector<double> weights;
};

// Means-level trial: sample resources, entangle, split, measure twice (with
// and without measurement noise), reduce both records, and diff the bits.
TrialData run_noisy_trial(const RhgLattice& lat, const SymplecticOp& cz,
                          const StatePrepConfig& prep, double variance,
                          TrialRng& rng) {
  const InputSample sample = sample_inputs(lat.num_modes(), prep, rng);
  const std::vector<int> pw = build_phys_of_wire(sample.type);
  const Eigen::VectorXd wire_means =
      propagate_macronode_wires(cz.apply(sample.means), pw);
  const std::vector<Basis> bases = measurement_bases(lat.num_nodes());
  const Eigen::VectorXd noisy =
      measure_with_noise(wire_means, bases, variance, rng);
  const Eigen::VectorXd clean =
      measure_with_noise(wire_means, bases, 0.0, rng);
  const auto reduced = reduce_lattice(lat, sample.type, pw, noisy, variance);
  const auto reference = reduce_lattice(lat, sample.type, pw, clean, 0.0);
  TrialData t;
  t.error_bits.resize(reduced.size());
  for (std::size_t i = 0; i < reduced.size(); ++i) {
    t.error_bits[i] = static_cast<std::uint8_t>(reduced[i].bit ^
                                                reference[i].bit);
  }
  t.weights = assign_weights(lat, reduced);
  return t;
}

}  // namespace

TEST_CASE("weight table by swapped-neighbor count") {
  const RhgLattice lat({2});
  std::vector<ReducedNode> reduced(lat.num_nodes());
  for (auto& r : reduced) r.p_err = 0.01;

  auto w = assign_weights(lat, reduced);
  for (const double x : w) CHECK(x == doctest::Approx(4.605170185988091));

  for (auto& r : reduced) r.swapped = true;  // every neighbor count is 4
  w = assign_weights(lat, reduced);
  for (const double x : w) CHECK(x == doctest::Approx(-std::log(0.4)));

  for (auto& r : reduced) r.swapped = false;
  const auto& nbr = lat.node(0).neighbor;
  reduced[nbr[0]].swapped = true;
  reduced[nbr[1]].swapped = true;
  w = assign_weights(lat, reduced);
  CHECK(w[0] == doctest::Approx(std::log(4.0)));
  reduced[nbr[2]].swapped = true;
  w = assign_weights(lat, reduced);
  CHECK(w[0] == doctest::Approx(std::log(3.0)));
  reduced[nbr[2]].swapped = false;
  reduced[nbr[1]].swapped = false;  // single swapped neighbor: analog weight
  reduced[0].p_err = 0.2;
  w = assign_weights(lat, reduced);
  CHECK(w[0] == doctest::Approx(-std::log(0.2)));

  reduced[0].p_err = 1.0;
  reduced[nbr[0]].swapped = false;
  w = assign_weights(lat, reduced);
  CHECK(w[0] == 0.0);
  reduced[0].p_err = 0.0;  // floored to keep weights finite
  w = assign_weights(lat, reduced);
  CHECK(w[0] == doctest::Approx(-std::log(1e-15)));

  CHECK_THROWS_AS(assign_weights(lat, std::vector<ReducedNode>(3)),
                  std::invalid_argument);
}

TEST_CASE("syndrome extraction") {
  for (const int d : {2, 3}) {
    const RhgLattice lat({d});
    auto bits = zero_bits(lat);
    CHECK(extract_syndrome(lat, bits).empty());

    for (int f = 0; f < lat.num_nodes(); ++f) {
      bits[f] = 1;
      const auto syndrome = extract_syndrome(lat, bits);
      bits[f] = 0;
      if (lat.node(f).role == NodeRole::edge) {
        CHECK(syndrome.empty());  // edge nodes sit on no primal check
        continue;
      }
      REQUIRE(syndrome.size() == 2);
      for (const int c : syndrome) {
        const auto& faces = lat.cubes()[c].faces;
        CHECK(std::count(faces.begin(), faces.end(), f) == 1);
      }
    }
  }
}

TEST_CASE("random error sets: recount oracle and even syndrome") {
  const RhgLattice lat({3});
  TrialRng rng(17);
  for (int rep = 0; rep < 200; ++rep) {
    auto bits = zero_bits(lat);
    const int flips = 1 + rng.uniform_int(10);
    for (int k = 0; k < flips; ++k) {
      bits[rng.uniform_int(lat.num_nodes())] ^= 1;
    }
    const auto syndrome = extract_syndrome(lat, bits);
    CHECK(syndrome.size() % 2 == 0);
    CHECK(std::is_sorted(syndrome.begin(), syndrome.end()));
    // direct recount
    std::vector<int> expected;
    for (int c = 0; c < static_cast<int>(lat.cubes().size()); ++c) {
      int parity = 0;
      for (const int f : lat.cubes()[c].faces) parity ^= bits[f];
      if (parity) expected.push_back(c);
    }
    CHECK(syndrome == expected);
  }
}

TEST_CASE("adjacent unsatisfied cubes connect through the shared face") {
  const RhgLattice lat({3});
  int face = 0;
  while (lat.node(face).role != NodeRole::face) ++face;
  auto bits = zero_bits(lat);
  bits[face] = 1;
  const auto syndrome = extract_syndrome(lat, bits);
  REQUIRE(syndrome.size() == 2);

  std::vector<double> weights(lat.num_nodes(), 1.0);
  weights[face] = 0.37;
  const auto graph = build_matching_graph(lat, syndrome, weights);
  REQUIRE(graph.arcs.size() == 1);
  CHECK(graph.arcs[0].weight == doctest::Approx(0.37));
  CHECK(graph.arcs[0].path == std::vector<int>{face});
}

TEST_CASE("uniform weights reproduce periodic taxicab distances") {
  TrialRng rng(23);
  for (const int d : {2, 3, 5}) {
    const RhgLattice lat({d});
    const std::vector<double> weights(lat.num_nodes(), 1.0);
    const int nc = static_cast<int>(lat.cubes().size());
    for (int rep = 0; rep < 30; ++rep) {
      const int cu = rng.uniform_int(nc);
      int cv = rng.uniform_int(nc);
      if (cu == cv) cv = (cv + 1) % nc;
      const std::vector<int> syndrome = {std::min(cu, cv), std::max(cu, cv)};
      const auto graph = build_matching_graph(lat, syndrome, weights);
      REQUIRE(graph.arcs.size() == 1);
      const int expected = taxicab_cubes(lat, cu, cv);
      CHECK(graph.arcs[0].weight == doctest::Approx(expected));
      CHECK(static_cast<int>(graph.arcs[0].path.size()) == expected);
      // the stored path must realize exactly this cube pair
      auto bits = zero_bits(lat);
      for (const int f : graph.arcs[0].path) bits[f] ^= 1;
      CHECK(extract_syndrome(lat, bits) == syndrome);
    }
  }
}

TEST_CASE("arc weights match the all-pairs oracle under random weights") {
  TrialRng rng(29);
  for (const int d : {2, 3}) {
    const RhgLattice lat({d});
    const int nc = static_cast<int>(lat.cubes().size());
    for (int rep = 0; rep < 10; ++rep) {
      std::vector<double> weights(lat.num_nodes());
      for (auto& w : weights) w = 0.05 + 1.95 * rng.uniform();
      // random even-sized syndrome
      std::vector<int> all(nc);
      for (int c = 0; c < nc; ++c) all[c] = c;
      for (int c = nc - 1; c > 0; --c) {
        std::swap(all[c], all[rng.uniform_int(c + 1)]);
      }
      int take = 2 + rng.uniform_int(nc - 2);
      take -= take % 2;
      std::vector<int> syndrome(all.begin(), all.begin() + take);
      std::sort(syndrome.begin(), syndrome.end());

      const auto oracle = floyd_warshall(lat, weights);
      const auto graph = build_matching_graph(lat, syndrome, weights);
      CHECK(graph.arcs.size() == syndrome.size() * (syndrome.size() - 1) / 2);
      for (const auto& arc : graph.arcs) {
        const int cu = graph.syndrome[arc.u];
        const int cv = graph.syndrome[arc.v];
        CHECK(arc.weight == doctest::Approx(oracle[cu][cv]).epsilon(1e-12));
        double path_sum = 0.0;
        for (const int f : arc.path) path_sum += weights[f];
        CHECK(path_sum == doctest::Approx(arc.weight).epsilon(1e-12));
        auto bits = zero_bits(lat);
        for (const int f : arc.path) bits[f] ^= 1;
        CHECK(extract_syndrome(lat, bits) == std::vector<int>(
                                                 {std::min(cu, cv),
                                                  std::max(cu, cv)}));
      }
    }
  }
}

TEST_CASE("four-cube toy matching picks the dominant pairing") {
  MatchingGraph graph;
  graph.syndrome = {0, 1, 2, 3};
  graph.arcs = {{0, 1, 1.0, {}}, {0, 2, 5.0, {}}, {0, 3, 5.0, {}},
                {1, 2, 5.0, {}}, {1, 3, 5.0, {}}, {2, 3, 1.0, {}}};
  const auto mate = match_syndrome(graph, true);
  CHECK(mate == std::vector<int>{1, 0, 3, 2});
}

TEST_CASE("single flipped qubit decodes to success") {
  const RhgLattice lat({3});
  int face = 0;
  while (lat.node(face).role != NodeRole::face) ++face;
  auto bits = zero_bits(lat);
  bits[face] = 1;
  std::vector<double> weights(lat.num_nodes(), 1.0);
  auto report = decode_errors(lat, bits, weights, true);
  CHECK(report.syndrome_size == 2);
  CHECK(report.matched_weight == doctest::Approx(1.0));
  CHECK_FALSE(report.failed);

  weights[face] = 0.37;
  report = decode_errors(lat, bits, weights, true);
  CHECK(report.matched_weight == doctest::Approx(0.37));
  CHECK_FALSE(report.failed);

  CHECK(decode_errors(lat, zero_bits(lat), weights).syndrome_size == 0);
  CHECK_FALSE(decode_errors(lat, zero_bits(lat), weights).failed);
}

TEST_CASE("surface parity: cube sets pass, wrap-around lines fail") {
  const RhgLattice lat({3});
  // all six faces of one parity check: every surface meets it twice
  auto bits = zero_bits(lat);
  for (const int f : lat.cubes()[0].faces) bits[f] ^= 1;
  CHECK_FALSE(check_failure(lat, bits));

  // a periodic line of a-normal faces is invisible to the checks but flips
  // the a-surface parity
  for (int axis = 0; axis < 3; ++axis) {
    auto line = zero_bits(lat);
    for (int k = 0; k < lat.distance(); ++k) {
      NodeCoord c{1, 1, 1};
      if (axis == 0) c.x = 2 * k;
      if (axis == 1) c.y = 2 * k;
      if (axis == 2) c.z = 2 * k;
      const int node = lat.node_at(c);
      REQUIRE(node >= 0);
      REQUIRE(lat.node(node).role == NodeRole::face);
      REQUIRE(lat.node(node).axis == axis);
      line[node] = 1;
    }
    CHECK(extract_syndrome(lat, line).empty());
    CHECK(check_failure(lat, line));
    const std::vector<double> weights(lat.num_nodes(), 1.0);
    CHECK(decode_errors(lat, line, weights).failed);
  }
}

TEST_CASE("random noisy trials: recovery always clears the syndrome") {
  const RhgLattice lat({3});
  const SymplecticOp cz = cz_network(lat);
  TrialRng rng(101);
  const StatePrepConfig prep{PrepMode::iid_swap, 0.25};
  int matched_graph_count = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const TrialData t = run_noisy_trial(lat, cz, prep, 0.05, rng);
    const auto syndrome = extract_syndrome(lat, t.error_bits);
    CHECK(syndrome.size() % 2 == 0);
    if (!syndrome.empty()) {
      const auto graph = build_matching_graph(lat, syndrome, t.weights);
      const auto mate = match_syndrome(graph, true);
      auto corrected = t.error_bits;
      apply_recovery(graph, mate, corrected);
      CHECK(extract_syndrome(lat, corrected).empty());
      ++matched_graph_count;
    }
    // the bundled driver agrees with the manual steps and with itself
    const auto a = decode_errors(lat, t.error_bits, t.weights, true);
    const auto b = decode_errors(lat, t.error_bits, t.weights);
    CHECK(a.syndrome_size == static_cast<int>(syndrome.size()));
    CHECK(a.matched_weight == b.matched_weight);
    CHECK(a.failed == b.failed);
  }
  CHECK(matched_graph_count > 100);  // the noise level must actually bite
}

TEST_CASE("decoder-sized matchings agree with exhaustive search") {
  const RhgLattice lat({3});
  const SymplecticOp cz = cz_network(lat);
  TrialRng rng(113);
  const StatePrepConfig prep{PrepMode::iid_swap, 0.5};
  int compared = 0;
  int trial_budget = 4000;
  while (compared < 100 && trial_budget-- > 0) {
    const TrialData t = run_noisy_trial(lat, cz, prep, 0.03, rng);
    const auto syndrome = extract_syndrome(lat, t.error_bits);
    if (syndrome.empty() || syndrome.size() > 10) continue;
    const auto graph = build_matching_graph(lat, syndrome, t.weights);
    const auto mate = match_syndrome(graph, true);
    const int s = static_cast<int>(syndrome.size());
    std::vector<std::vector<double>> w(s, std::vector<double>(s, 0.0));
    for (const auto& arc : graph.arcs) {
      w[arc.u][arc.v] = w[arc.v][arc.u] = arc.weight;
    }
    double total = 0.0;
    for (int i = 0; i < s; ++i) {
      if (mate[i] > i) total += w[i][mate[i]];
    }
    std::vector<bool> used(s, false);
    CHECK(total == doctest::Approx(brute_min_perfect(w, used)).epsilon(1e-9));
    ++compared;
  }
  CHECK(compared == 100);
}

TEST_CASE("all-swapped lattices still decode cleanly") {
  const RhgLattice lat({3});
  const SymplecticOp cz = cz_network(lat);
  TrialRng rng(131);
  const StatePrepConfig prep{PrepMode::iid_swap, 1.0};
  for (int trial = 0; trial < 30; ++trial) {
    const TrialData t = run_noisy_trial(lat, cz, prep, 0.02, rng);
    for (const double w : t.weights) {
      CHECK(w == doctest::Approx(-std::log(0.4)));
    }
    const auto report = decode_errors(lat, t.error_bits, t.weights, true);
    CHECK(report.syndrome_size % 2 == 0);
  }
}

TEST_CASE("pruned graphs stay matchable and complete-prune is a no-op") {
  const RhgLattice lat({3});
  TrialRng rng(151);
  std::vector<double> weights(lat.num_nodes());
  for (auto& w : weights) w = 0.1 + rng.uniform();
  std::vector<int> syndrome;
  for (int c = 0; c < static_cast<int>(lat.cubes().size()); ++c) {
    if (c % 3 == 0) syndrome.push_back(c);  // 9 -> drop one to keep it even
  }
  syndrome.pop_back();
  const auto complete = build_matching_graph(lat, syndrome, weights);
  const auto same = build_matching_graph(lat, syndrome, weights,
                                         static_cast<int>(syndrome.size()));
  CHECK(same.arcs.size() == complete.arcs.size());
  const auto pruned = build_matching_graph(lat, syndrome, weights, 3);
  CHECK(pruned.arcs.size() < complete.arcs.size());
  const auto mate = match_syndrome(pruned, true);
  CHECK(std::count(mate.begin(), mate.end(), -1) == 0);
}

TEST_CASE("input validation") {
  const RhgLattice lat({2});
  const std::vector<double> weights(lat.num_nodes(), 1.0);
  CHECK_THROWS_AS(extract_syndrome(lat, std::vector<std::uint8_t>(5, 0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_matching_graph(lat, {0}, weights), std::logic_error);
  CHECK_THROWS_AS(build_matching_graph(lat, {0, 1}, {1.0, 2.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(check_failure(lat, std::vector<std::uint8_t>(5, 0)),
                  std::invalid_argument);
  MatchingGraph graph;
  graph.syndrome = {0, 1};
  graph.arcs = {{0, 1, 1.0, {}}};
  std::vector<std::uint8_t> bits(lat.num_nodes(), 0);
  CHECK_THROWS_AS(apply_recovery(graph, {1, 0, -1}, bits),
                  std::invalid_argument);
}
